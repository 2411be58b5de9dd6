#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tmkd/bitmatrix.hpp"
#include "tmkd/errors.hpp"
#include "tmkd/rng.hpp"

namespace tmkd {

/// One boolean sample, length n_features, elements 0/1.
using BitSample = std::vector<uint8_t>;

struct TMParams {
  int n_clauses = 20;        // per class, even; half positive, half negative
  int threshold = 15;        // vote clamp T
  double specificity = 3.9;  // s, >= 1
  double weight_lr = 0.03;   // gamma; weights move by a factor (1 + gamma)
  int n_features = 2;
  int n_classes = 2;
  int s_max = 127;           // automaton depth; states live in [1, 2*s_max]
  uint64_t rng_seed = 0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

enum class EvalMode {
  kTrain,  // a clause with no included literal outputs 1
  kInfer,  // a clause with no included literal outputs 0
};

/// A conjunctive clause: one two-action automaton per literal plus a weight.
struct Clause {
  std::vector<uint16_t> states;   // 2n automata, state in [1, 2*s_max]
  std::vector<uint64_t> include;  // bit k set iff states[k] > s_max
  double weight = 1.0;
  int8_t polarity = 1;

  void rebuild_include(int s_max);
  int64_t included_count() const;
};

struct ClauseBank {
  int class_id = 0;
  std::vector<Clause> clauses;  // first half polarity +1, second half -1
};

/// Literals of one sample: bits [0, n) are the features, bits [n, 2n) their
/// negations.
struct LiteralVector {
  int n_features = 0;
  std::vector<uint64_t> words;

  bool lit(int k) const { return (words[k >> 6] >> (k & 63)) & 1u; }
};

/// Expands a sample into its 2n literals. Throws DimensionError if the
/// sample length differs from n_features.
LiteralVector build_literals(const BitSample& x, int n_features);

/// Expands every row of an n_features-wide bit matrix into a 2n-wide one.
BitMatrix build_literal_matrix(const BitMatrix& x);

/// Conjunction over the included literals; empty clauses follow the mode
/// convention. `lits` must span ceil(2n/64) words.
int evaluate_clause(const Clause& c, std::span<const uint64_t> lits,
                    EvalMode mode);

/// Probability that a clause receives feedback given the class sum:
/// (T - clamp(sum, -T, T)) / 2T toward target 1, mirrored for target 0.
double feedback_probability(double class_sum, int target, int threshold);

/// Type I feedback. On a firing clause, literals with value 1 step toward
/// inclusion with probability (s-1)/s; every other position steps toward
/// exclusion with probability 1/s. A firing clause's weight grows by
/// (1 + gamma). Consumes exactly one draw per literal.
void type_i_feedback(Clause& c, std::span<const uint64_t> lits,
                     const TMParams& params, Rng& rng);

/// Type II feedback. No-op unless the clause fires; then every excluded
/// literal with value 0 steps toward inclusion and the weight shrinks by
/// (1 + gamma), floored at 2^-20. Draws nothing.
void type_ii_feedback(Clause& c, std::span<const uint64_t> lits,
                      const TMParams& params);

class TsetlinMachine {
 public:
  explicit TsetlinMachine(TMParams params);

  const TMParams& params() const { return params_; }
  std::vector<ClauseBank>& banks() { return banks_; }
  const std::vector<ClauseBank>& banks() const { return banks_; }
  int half_clauses() const { return params_.n_clauses / 2; }

  /// Weighted vote balance of one class (inference-mode clause outputs),
  /// optionally clamped to [-clamp_to, clamp_to].
  double class_sum(int cls, std::span<const uint64_t> lits,
                   std::optional<int> clamp_to = std::nullopt) const;

  /// Raw class sums for every class.
  std::vector<double> class_sums(std::span<const uint64_t> lits) const;

  /// Argmax over raw class sums; ties resolve to the lowest class index.
  int predict_literals(std::span<const uint64_t> lits) const;
  int predict(const BitSample& x) const;

  /// Predicts every row of x. When elapsed_seconds is non-null it receives
  /// the wall-clock inference time (monotonic clock). `parallel` splits the
  /// rows over hardware threads; predictions are identical either way.
  std::vector<int> predict_batch(const BitMatrix& x,
                                 double* elapsed_seconds = nullptr,
                                 bool parallel = false) const;

  /// One feedback pass over a class bank toward the given target. Every
  /// clause is selected with the feedback probability of the current
  /// (unclamped-then-clamped) class sum; selected clauses receive Type I
  /// or Type II feedback according to target and polarity.
  void update_bank(int cls, std::span<const uint64_t> lits, int target);

  Rng& feedback_rng() { return feedback_rng_; }
  Rng& orch_rng() { return orch_rng_; }
  const Rng& feedback_rng() const { return feedback_rng_; }
  const Rng& orch_rng() const { return orch_rng_; }

 private:
  TMParams params_;
  std::vector<ClauseBank> banks_;
  Rng feedback_rng_;  // per-clause selection and per-literal Type I draws
  Rng orch_rng_;      // trainer-level draws (negative class, alpha, phi)
};

struct FitOptions {
  bool negative_phase = true;  // pair each positive update with one random
                               // other class pushed toward target 0
};

struct FitReport {
  std::vector<double> train_accuracy;  // after each epoch, on the fit data
  std::vector<double> epoch_seconds;   // update loop only, excludes scoring
};

/// Standard weighted multi-class training. Per sample: the labeled class is
/// pushed toward target 1, then one uniformly random other class toward
/// target 0 (drawn from the orchestration stream). Samples are visited in
/// natural order; trajectories are a pure function of the machine state.
FitReport fit_standard(TsetlinMachine& tm, const BitMatrix& x,
                       const std::vector<int>& y, int epochs,
                       const FitOptions& options = {});

/// Full machine state: parameters, both generator states, and per class the
/// clause polarities, weights and automaton states (clause-major).
struct StateSnapshot {
  TMParams params;
  std::array<uint64_t, 4> feedback_rng_state{};
  std::array<uint64_t, 4> orch_rng_state{};

  struct ClassState {
    std::vector<int8_t> polarities;
    std::vector<double> weights;
    std::vector<uint16_t> states;  // n_clauses * 2n, clause-major
  };
  std::vector<ClassState> classes;
};

StateSnapshot export_state(const TsetlinMachine& tm);

/// Rebuilds a machine from a snapshot; include masks are derived, not
/// trusted. Throws DataError on inconsistent shapes or state ranges.
TsetlinMachine import_state(const StateSnapshot& snapshot);

}  // namespace tmkd
