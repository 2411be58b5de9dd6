#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tmkd/tm.hpp"

namespace tmkd {

/// Dense row-major real matrix.
struct RealMatrix {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> data;

  RealMatrix() = default;
  RealMatrix(int64_t r, int64_t c)
      : rows(r), cols(c), data(static_cast<size_t>(r * c), 0.0) {}

  double& at(int64_t r, int64_t c) {
    return data[static_cast<size_t>(r * cols + c)];
  }
  double at(int64_t r, int64_t c) const {
    return data[static_cast<size_t>(r * cols + c)];
  }
  std::span<const double> row(int64_t r) const {
    return {data.data() + r * cols, static_cast<size_t>(cols)};
  }
  std::span<double> row(int64_t r) {
    return {data.data() + r * cols, static_cast<size_t>(cols)};
  }
};

/// Per-sample class distributions; every row sums to 1 within 1e-9.
using SoftLabelMatrix = RealMatrix;

struct DistillParams {
  double alpha = 0.5;            // share of plain hard-label updates
  double tau = 3.0;              // temperature
  double weight_transfer_z = 0.2;  // direct (by-weight) transfer share
  double phi_floor = 0.001;      // soft updates below this are skipped
  bool guard_true_class = false;  // skip the true class even at alpha = 0

  void validate() const;
};

/// Raw (unclamped) class sums of every sample, one row per sample, one
/// column per class.
RealMatrix class_sums_unclamped(const TsetlinMachine& tm, const BitMatrix& x);

/// Normalizes class sums into per-row distributions: shift by the row
/// minimum, divide by the shifted maximum, exponentiate, normalize. A row
/// with all sums equal becomes uniform. Throws DataError on non-finite
/// input.
SoftLabelMatrix get_soft_labels(const RealMatrix& class_sums);

/// Sharpens or flattens a distribution: p^(1/tau^2), renormalized.
/// tau = 1 returns the input unchanged.
std::vector<double> temperature_scale(std::span<const double> p, double tau);

/// Throws DataError unless every row of s is a distribution (nonnegative,
/// sums to 1 within tolerance).
void validate_soft_labels(const SoftLabelMatrix& s, double tolerance = 1e-9);

/// Which teacher clauses seeded the student, per class. Selection order is
/// the student slot order: positive half first, each half listing its
/// by-weight picks before its by-diversity picks.
struct TransferSelection {
  struct PerClass {
    std::vector<int> selected;      // teacher clause indices, slot order
    std::vector<int> by_weight;     // descending weight, ties by index
    std::vector<int> by_diversity;  // descending v = w' * a, ties by index
    // v scores of the candidates left after the by-weight picks.
    std::vector<std::pair<int, double>> diversity_scores;
  };
  std::vector<PerClass> classes;
};

/// Seeds the student bank from the teacher: per class and per polarity half,
/// the top clauses by weight fill a direct quota of max(1, floor(z*|C_S|))
/// overall, and the remaining slots take the highest v = (w/max W) *
/// (included fraction). Clause states and weights are copied verbatim.
/// Teacher and student must share n_features, n_classes and s_max, and the
/// student may not have more clauses than the teacher.
TransferSelection intelligent_transfer(const TsetlinMachine& teacher,
                                       TsetlinMachine& student, double z);

/// The per-class decision inside the enhanced fit: given the scaled
/// probability p of one class, yields the update target and its final
/// application probability, or nothing when the update is skipped.
struct SoftFeedback {
  int target = 0;
  double probability = 0.0;
};
std::optional<SoftFeedback> soft_feedback_decision(double p, double alpha,
                                                   double tau,
                                                   double phi_floor);

/// Distribution-guided training. Per sample: with probability alpha the
/// labeled class receives a plain target-1 update; then every class (the
/// labeled one only when alpha = 0 and the guard is off) receives a
/// soft update per soft_feedback_decision on its temperature-scaled
/// probability. Orchestration draws: alpha first, then one draw per
/// non-skipped class in ascending class order.
FitReport fit_enhanced(TsetlinMachine& student, const BitMatrix& x,
                       const std::vector<int>& y,
                       const SoftLabelMatrix& soft_labels, int epochs,
                       const DistillParams& params);

/// CSV round-trip (one row per sample, one column per class, 9 significant
/// digits). Loading validates rows to 1e-6 and renormalizes them.
void save_soft_labels_csv(const SoftLabelMatrix& s, const std::string& path);
SoftLabelMatrix load_soft_labels_csv(const std::string& path);

}  // namespace tmkd
