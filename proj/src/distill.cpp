#include "tmkd/distill.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tmkd {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

/// Indices of `candidates` ordered by descending key, ties by lower index.
template <typename KeyFn>
std::vector<int> order_descending(const std::vector<int>& candidates,
                                  KeyFn key) {
  std::vector<int> order = candidates;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return key(a) > key(b);
  });
  return order;
}

}  // namespace

void DistillParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ConfigError("alpha must be in [0, 1], got " + std::to_string(alpha));
  if (!(tau > 0.0))
    throw ConfigError("tau must be > 0, got " + std::to_string(tau));
  if (!(weight_transfer_z >= 0.0 && weight_transfer_z <= 1.0))
    throw ConfigError("weight_transfer_z must be in [0, 1], got " +
                      std::to_string(weight_transfer_z));
  if (!(phi_floor >= 0.0))
    throw ConfigError("phi_floor must be >= 0, got " +
                      std::to_string(phi_floor));
}

RealMatrix class_sums_unclamped(const TsetlinMachine& tm, const BitMatrix& x) {
  const TMParams& p = tm.params();
  if (x.cols() != p.n_features)
    throw DimensionError("batch has " + std::to_string(x.cols()) +
                         " features, machine expects " +
                         std::to_string(p.n_features));
  const BitMatrix lits = build_literal_matrix(x);
  RealMatrix sums(x.rows(), p.n_classes);
  for (int64_t i = 0; i < x.rows(); ++i) {
    const auto row = lits.row(i);
    for (int cls = 0; cls < p.n_classes; ++cls)
      sums.at(i, cls) = tm.class_sum(cls, row);
  }
  return sums;
}

SoftLabelMatrix get_soft_labels(const RealMatrix& class_sums) {
  SoftLabelMatrix out(class_sums.rows, class_sums.cols);
  const int64_t n = class_sums.cols;
  std::vector<double> shifted(static_cast<size_t>(n));
  for (int64_t i = 0; i < class_sums.rows; ++i) {
    const auto row = class_sums.row(i);
    for (double v : row)
      if (!std::isfinite(v)) throw DataError("non-finite class sum");

    const double lo = *std::min_element(row.begin(), row.end());
    double hi = 0.0;
    for (int64_t k = 0; k < n; ++k) {
      shifted[k] = row[k] - lo;
      hi = std::max(hi, shifted[k]);
    }
    double total = 0.0;
    for (int64_t k = 0; k < n; ++k) {
      shifted[k] = hi > 0.0 ? std::exp(shifted[k] / hi) : 1.0;
      total += shifted[k];
    }
    for (int64_t k = 0; k < n; ++k) out.at(i, k) = shifted[k] / total;
  }
  return out;
}

std::vector<double> temperature_scale(std::span<const double> p, double tau) {
  std::vector<double> out(p.begin(), p.end());
  if (tau == 1.0) return out;
  const double exponent = 1.0 / (tau * tau);
  double total = 0.0;
  for (double& v : out) {
    v = std::pow(v, exponent);
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

void validate_soft_labels(const SoftLabelMatrix& s, double tolerance) {
  for (int64_t i = 0; i < s.rows; ++i) {
    double total = 0.0;
    for (double v : s.row(i)) {
      if (!(v >= 0.0)) throw DataError("negative soft label");
      total += v;
    }
    if (std::abs(total - 1.0) > tolerance)
      throw DataError("soft label row " + std::to_string(i) +
                      " sums to " + std::to_string(total));
  }
}

TransferSelection intelligent_transfer(const TsetlinMachine& teacher,
                                       TsetlinMachine& student, double z) {
  const TMParams& tp = teacher.params();
  const TMParams& sp = student.params();
  if (!(z >= 0.0 && z <= 1.0))
    throw ConfigError("z must be in [0, 1], got " + std::to_string(z));
  if (tp.n_features != sp.n_features || tp.n_classes != sp.n_classes ||
      tp.s_max != sp.s_max)
    throw DimensionError(
        "teacher and student must share n_features, n_classes and s_max");
  if (sp.n_clauses > tp.n_clauses)
    throw DimensionError("student has " + std::to_string(sp.n_clauses) +
                         " clauses, teacher only " +
                         std::to_string(tp.n_clauses));

  const int teacher_half = teacher.half_clauses();
  const int student_half = student.half_clauses();
  const int n_direct_total =
      std::max(1, static_cast<int>(std::floor(z * sp.n_clauses)));
  // Split the direct quota over the halves; the positive half takes the
  // odd pick, both capped by the slots a half actually has.
  int direct_pos = std::min((n_direct_total + 1) / 2, student_half);
  int direct_neg = n_direct_total - direct_pos;
  if (direct_neg > student_half) {
    direct_pos = std::min(direct_pos + (direct_neg - student_half),
                          student_half);
    direct_neg = student_half;
  }

  const int n_literals = 2 * tp.n_features;
  TransferSelection selection;
  selection.classes.resize(tp.n_classes);

  for (int cls = 0; cls < tp.n_classes; ++cls) {
    const auto& teacher_clauses = teacher.banks()[cls].clauses;
    double max_weight = 0.0;
    for (const Clause& c : teacher_clauses)
      max_weight = std::max(max_weight, c.weight);

    auto& per_class = selection.classes[cls];
    int slot = 0;

    for (int half = 0; half < 2; ++half) {
      const int begin = half == 0 ? 0 : teacher_half;
      const int n_direct = half == 0 ? direct_pos : direct_neg;
      const int n_slots = student_half;

      std::vector<int> candidates(teacher_half);
      std::iota(candidates.begin(), candidates.end(), begin);
      const std::vector<int> by_weight = order_descending(
          candidates, [&](int j) { return teacher_clauses[j].weight; });

      std::vector<int> picks(by_weight.begin(), by_weight.begin() + n_direct);
      per_class.by_weight.insert(per_class.by_weight.end(), picks.begin(),
                                 picks.end());

      std::vector<int> remain(by_weight.begin() + n_direct, by_weight.end());
      std::sort(remain.begin(), remain.end());
      std::vector<std::pair<int, double>> scored;
      scored.reserve(remain.size());
      for (int j : remain) {
        const double active =
            static_cast<double>(teacher_clauses[j].included_count()) /
            n_literals;
        const double v = (teacher_clauses[j].weight / max_weight) * active;
        scored.emplace_back(j, v);
      }
      std::stable_sort(scored.begin(), scored.end(), [](auto& a, auto& b) {
        return a.second > b.second;
      });
      per_class.diversity_scores.insert(per_class.diversity_scores.end(),
                                        scored.begin(), scored.end());
      for (int i = 0; i < n_slots - n_direct; ++i) {
        picks.push_back(scored[i].first);
        per_class.by_diversity.push_back(scored[i].first);
      }

      for (int j : picks) {
        Clause& dst = student.banks()[cls].clauses[slot++];
        const Clause& src = teacher_clauses[j];
        dst.states = src.states;
        dst.include = src.include;
        dst.weight = src.weight;
        per_class.selected.push_back(j);
      }
    }
  }
  return selection;
}

std::optional<SoftFeedback> soft_feedback_decision(double p, double alpha,
                                                   double tau,
                                                   double phi_floor) {
  double phi = (1.0 - alpha) * p;
  if (phi < phi_floor) return std::nullopt;
  SoftFeedback fb;
  if (p > 0.5) {
    fb.target = 1;
    phi *= 1.0 + p * tau;
  } else {
    fb.target = 0;
    phi *= 1.0 + (1.0 - p) * tau;
  }
  fb.probability = std::min(phi, 1.0);
  return fb;
}

FitReport fit_enhanced(TsetlinMachine& student, const BitMatrix& x,
                       const std::vector<int>& y,
                       const SoftLabelMatrix& soft_labels, int epochs,
                       const DistillParams& params) {
  params.validate();
  const TMParams& p = student.params();
  if (x.rows() != static_cast<int64_t>(y.size()))
    throw DimensionError("sample count " + std::to_string(x.rows()) +
                         " != label count " + std::to_string(y.size()));
  if (soft_labels.rows != x.rows() || soft_labels.cols != p.n_classes)
    throw DimensionError("soft label matrix is " +
                         std::to_string(soft_labels.rows) + "x" +
                         std::to_string(soft_labels.cols) + ", expected " +
                         std::to_string(x.rows()) + "x" +
                         std::to_string(p.n_classes));
  for (int label : y)
    if (label < 0 || label >= p.n_classes)
      throw DataError("label " + std::to_string(label) +
                      " out of range for " + std::to_string(p.n_classes) +
                      " classes");
  validate_soft_labels(soft_labels);

  const BitMatrix lits = build_literal_matrix(x);
  // The scaled distributions do not change between epochs.
  RealMatrix scaled(soft_labels.rows, soft_labels.cols);
  for (int64_t i = 0; i < soft_labels.rows; ++i) {
    const auto row = temperature_scale(soft_labels.row(i), params.tau);
    std::copy(row.begin(), row.end(), scaled.row(i).begin());
  }

  FitReport report;
  report.train_accuracy.reserve(epochs);
  report.epoch_seconds.reserve(epochs);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int64_t i = 0; i < x.rows(); ++i) {
      const auto row = lits.row(i);
      const int label = y[i];
      if (student.orch_rng().next_double() < params.alpha)
        student.update_bank(label, row, 1);
      for (int cls = 0; cls < p.n_classes; ++cls) {
        if (cls == label && (params.alpha > 0.0 || params.guard_true_class))
          continue;
        const auto decision = soft_feedback_decision(
            scaled.at(i, cls), params.alpha, params.tau, params.phi_floor);
        if (!decision) continue;
        if (student.orch_rng().next_double() < decision->probability)
          student.update_bank(cls, row, decision->target);
      }
    }
    report.epoch_seconds.push_back(seconds_since(t0));

    int64_t correct = 0;
    for (int64_t i = 0; i < x.rows(); ++i)
      if (student.predict_literals(lits.row(i)) == y[i]) ++correct;
    report.train_accuracy.push_back(
        x.rows() ? static_cast<double>(correct) / x.rows() : 0.0);
  }
  return report;
}

void save_soft_labels_csv(const SoftLabelMatrix& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  char buf[64];
  for (int64_t i = 0; i < s.rows; ++i) {
    for (int64_t k = 0; k < s.cols; ++k) {
      std::snprintf(buf, sizeof buf, "%.9g", s.at(i, k));
      out << (k ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

SoftLabelMatrix load_soft_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      size_t used = 0;
      double v;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw DataError("bad number '" + cell + "' in " + path);
      }
      if (used != cell.size())
        throw DataError("bad number '" + cell + "' in " + path);
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("ragged soft label rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("empty soft label file " + path);

  SoftLabelMatrix s(static_cast<int64_t>(rows.size()),
                    static_cast<int64_t>(rows.front().size()));
  for (int64_t i = 0; i < s.rows; ++i)
    std::copy(rows[i].begin(), rows[i].end(), s.row(i).begin());
  validate_soft_labels(s, 1e-6);
  // Rounding to 9 significant digits can leave row sums a hair off 1;
  // renormalize so downstream invariants hold at full precision.
  for (int64_t i = 0; i < s.rows; ++i) {
    auto row = s.row(i);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    for (double& v : row) v /= total;
  }
  return s;
}

}  // namespace tmkd
