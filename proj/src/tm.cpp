#include "tmkd/tm.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <future>
#include <string>
#include <thread>

namespace tmkd {

namespace {

constexpr double kMinWeight = 1.0 / (1 << 20);

int64_t literal_words(int n_features) { return (2 * n_features + 63) / 64; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

void TMParams::validate() const {
  if (n_clauses < 2 || n_clauses % 2 != 0)
    throw ConfigError("n_clauses must be even and >= 2, got " +
                      std::to_string(n_clauses));
  if (threshold < 1)
    throw ConfigError("threshold must be >= 1, got " +
                      std::to_string(threshold));
  if (!(specificity >= 1.0))
    throw ConfigError("specificity must be >= 1, got " +
                      std::to_string(specificity));
  if (!(weight_lr >= 0.0))
    throw ConfigError("weight_lr must be >= 0, got " +
                      std::to_string(weight_lr));
  if (n_features < 1)
    throw ConfigError("n_features must be >= 1, got " +
                      std::to_string(n_features));
  if (n_classes < 2)
    throw ConfigError("n_classes must be >= 2, got " +
                      std::to_string(n_classes));
  if (s_max < 1 || s_max > 32767)
    throw ConfigError("s_max must be in [1, 32767], got " +
                      std::to_string(s_max));
}

void Clause::rebuild_include(int s_max) {
  std::fill(include.begin(), include.end(), 0);
  for (size_t k = 0; k < states.size(); ++k)
    if (states[k] > s_max) include[k >> 6] |= uint64_t{1} << (k & 63);
}

int64_t Clause::included_count() const {
  int64_t count = 0;
  for (uint64_t w : include) count += std::popcount(w);
  return count;
}

LiteralVector build_literals(const BitSample& x, int n_features) {
  if (static_cast<int>(x.size()) != n_features)
    throw DimensionError("sample has " + std::to_string(x.size()) +
                         " features, machine expects " +
                         std::to_string(n_features));
  LiteralVector lv;
  lv.n_features = n_features;
  lv.words.assign(literal_words(n_features), 0);
  for (int k = 0; k < n_features; ++k) {
    if (x[k]) lv.words[k >> 6] |= uint64_t{1} << (k & 63);
    const int neg = k + n_features;
    if (!x[k]) lv.words[neg >> 6] |= uint64_t{1} << (neg & 63);
  }
  return lv;
}

BitMatrix build_literal_matrix(const BitMatrix& x) {
  const int64_t n = x.cols();
  BitMatrix lits(x.rows(), 2 * n);
  for (int64_t i = 0; i < x.rows(); ++i) {
    for (int64_t k = 0; k < n; ++k) {
      const bool v = x.get(i, k);
      lits.set(i, k, v);
      lits.set(i, k + n, !v);
    }
  }
  return lits;
}

int evaluate_clause(const Clause& c, std::span<const uint64_t> lits,
                    EvalMode mode) {
  bool any_included = false;
  for (size_t w = 0; w < c.include.size(); ++w) {
    const uint64_t inc = c.include[w];
    if (!inc) continue;
    any_included = true;
    if ((inc & lits[w]) != inc) return 0;
  }
  if (!any_included) return mode == EvalMode::kTrain ? 1 : 0;
  return 1;
}

double feedback_probability(double class_sum, int target, int threshold) {
  const double t = threshold;
  const double clamped = std::clamp(class_sum, -t, t);
  return target == 0 ? (t + clamped) / (2.0 * t) : (t - clamped) / (2.0 * t);
}

void type_i_feedback(Clause& c, std::span<const uint64_t> lits,
                     const TMParams& params, Rng& rng) {
  const int out = evaluate_clause(c, lits, EvalMode::kTrain);
  const double p_step_in = (params.specificity - 1.0) / params.specificity;
  const double p_step_out = 1.0 / params.specificity;
  const uint16_t hi = static_cast<uint16_t>(2 * params.s_max);
  const int n_literals = static_cast<int>(c.states.size());
  for (int k = 0; k < n_literals; ++k) {
    const bool value = (lits[k >> 6] >> (k & 63)) & 1u;
    if (out == 1 && value) {
      if (rng.bernoulli(p_step_in) && c.states[k] < hi) ++c.states[k];
    } else {
      if (rng.bernoulli(p_step_out) && c.states[k] > 1) --c.states[k];
    }
  }
  if (out == 1) c.weight *= 1.0 + params.weight_lr;
  c.rebuild_include(params.s_max);
}

void type_ii_feedback(Clause& c, std::span<const uint64_t> lits,
                      const TMParams& params) {
  if (evaluate_clause(c, lits, EvalMode::kTrain) == 0) return;
  const int n_literals = static_cast<int>(c.states.size());
  for (int k = 0; k < n_literals; ++k) {
    const bool value = (lits[k >> 6] >> (k & 63)) & 1u;
    if (!value && c.states[k] <= params.s_max) ++c.states[k];
  }
  c.weight = std::max(c.weight / (1.0 + params.weight_lr), kMinWeight);
  c.rebuild_include(params.s_max);
}

TsetlinMachine::TsetlinMachine(TMParams params)
    : params_(params),
      feedback_rng_(0),
      orch_rng_(0) {
  params_.validate();
  uint64_t s = params_.rng_seed;
  std::array<uint64_t, 4> fb{}, orch{};
  for (auto& w : fb) w = splitmix64(s);
  for (auto& w : orch) w = splitmix64(s);
  feedback_rng_.set_state(fb);
  orch_rng_.set_state(orch);

  const int64_t words = literal_words(params_.n_features);
  banks_.resize(params_.n_classes);
  for (int cls = 0; cls < params_.n_classes; ++cls) {
    banks_[cls].class_id = cls;
    banks_[cls].clauses.resize(params_.n_clauses);
    for (int j = 0; j < params_.n_clauses; ++j) {
      Clause& c = banks_[cls].clauses[j];
      c.states.assign(2 * params_.n_features,
                      static_cast<uint16_t>(params_.s_max));
      c.include.assign(words, 0);
      c.weight = 1.0;
      c.polarity = j < half_clauses() ? int8_t{1} : int8_t{-1};
    }
  }
}

double TsetlinMachine::class_sum(int cls, std::span<const uint64_t> lits,
                                 std::optional<int> clamp_to) const {
  double sum = 0.0;
  for (const Clause& c : banks_[cls].clauses)
    if (evaluate_clause(c, lits, EvalMode::kInfer))
      sum += c.polarity > 0 ? c.weight : -c.weight;
  if (clamp_to) {
    const double t = *clamp_to;
    sum = std::clamp(sum, -t, t);
  }
  return sum;
}

std::vector<double> TsetlinMachine::class_sums(
    std::span<const uint64_t> lits) const {
  std::vector<double> sums(params_.n_classes);
  for (int cls = 0; cls < params_.n_classes; ++cls)
    sums[cls] = class_sum(cls, lits);
  return sums;
}

int TsetlinMachine::predict_literals(std::span<const uint64_t> lits) const {
  int best = 0;
  double best_sum = class_sum(0, lits);
  for (int cls = 1; cls < params_.n_classes; ++cls) {
    const double sum = class_sum(cls, lits);
    if (sum > best_sum) {
      best = cls;
      best_sum = sum;
    }
  }
  return best;
}

int TsetlinMachine::predict(const BitSample& x) const {
  const LiteralVector lv = build_literals(x, params_.n_features);
  return predict_literals(lv.words);
}

std::vector<int> TsetlinMachine::predict_batch(const BitMatrix& x,
                                               double* elapsed_seconds,
                                               bool parallel) const {
  if (x.cols() != params_.n_features)
    throw DimensionError("batch has " + std::to_string(x.cols()) +
                         " features, machine expects " +
                         std::to_string(params_.n_features));
  std::vector<int> out(x.rows());
  const auto t0 = std::chrono::steady_clock::now();

  const auto predict_range = [&](int64_t begin, int64_t end) {
    BitSample sample(params_.n_features);
    for (int64_t i = begin; i < end; ++i) {
      for (int k = 0; k < params_.n_features; ++k)
        sample[k] = x.get(i, k) ? 1 : 0;
      const LiteralVector lv = build_literals(sample, params_.n_features);
      out[i] = predict_literals(lv.words);
    }
  };

  const unsigned hw = std::thread::hardware_concurrency();
  if (parallel && hw > 1 && x.rows() > 1) {
    const int64_t n_chunks = std::min<int64_t>(hw, x.rows());
    const int64_t chunk = (x.rows() + n_chunks - 1) / n_chunks;
    std::vector<std::future<void>> futures;
    for (int64_t b = 0; b < x.rows(); b += chunk)
      futures.push_back(std::async(std::launch::async, predict_range, b,
                                   std::min(b + chunk, x.rows())));
    for (auto& f : futures) f.get();
  } else {
    predict_range(0, x.rows());
  }

  if (elapsed_seconds) *elapsed_seconds = seconds_since(t0);
  return out;
}

void TsetlinMachine::update_bank(int cls, std::span<const uint64_t> lits,
                                 int target) {
  const double sum = class_sum(cls, lits);
  const double p = feedback_probability(sum, target, params_.threshold);
  for (Clause& c : banks_[cls].clauses) {
    if (!feedback_rng_.bernoulli(p)) continue;
    const bool toward_one = (target == 1) == (c.polarity > 0);
    if (toward_one)
      type_i_feedback(c, lits, params_, feedback_rng_);
    else
      type_ii_feedback(c, lits, params_);
  }
}

FitReport fit_standard(TsetlinMachine& tm, const BitMatrix& x,
                       const std::vector<int>& y, int epochs,
                       const FitOptions& options) {
  const TMParams& p = tm.params();
  if (x.rows() != static_cast<int64_t>(y.size()))
    throw DimensionError("sample count " + std::to_string(x.rows()) +
                         " != label count " + std::to_string(y.size()));
  if (x.cols() != p.n_features)
    throw DimensionError("batch has " + std::to_string(x.cols()) +
                         " features, machine expects " +
                         std::to_string(p.n_features));
  for (int label : y)
    if (label < 0 || label >= p.n_classes)
      throw DataError("label " + std::to_string(label) +
                      " out of range for " + std::to_string(p.n_classes) +
                      " classes");

  const BitMatrix lits = build_literal_matrix(x);
  FitReport report;
  report.train_accuracy.reserve(epochs);
  report.epoch_seconds.reserve(epochs);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int64_t i = 0; i < x.rows(); ++i) {
      const auto row = lits.row(i);
      const int label = y[i];
      int negative = -1;
      if (options.negative_phase && p.n_classes > 1) {
        negative = static_cast<int>(tm.orch_rng().below(p.n_classes - 1));
        if (negative >= label) ++negative;
      }
      tm.update_bank(label, row, 1);
      if (negative >= 0) tm.update_bank(negative, row, 0);
    }
    report.epoch_seconds.push_back(seconds_since(t0));

    int64_t correct = 0;
    for (int64_t i = 0; i < x.rows(); ++i)
      if (tm.predict_literals(lits.row(i)) == y[i]) ++correct;
    report.train_accuracy.push_back(
        x.rows() ? static_cast<double>(correct) / x.rows() : 0.0);
  }
  return report;
}

StateSnapshot export_state(const TsetlinMachine& tm) {
  StateSnapshot snap;
  snap.params = tm.params();
  snap.feedback_rng_state = tm.feedback_rng().state();
  snap.orch_rng_state = tm.orch_rng().state();
  snap.classes.reserve(tm.banks().size());
  for (const ClauseBank& bank : tm.banks()) {
    StateSnapshot::ClassState cs;
    for (const Clause& c : bank.clauses) {
      cs.polarities.push_back(c.polarity);
      cs.weights.push_back(c.weight);
      cs.states.insert(cs.states.end(), c.states.begin(), c.states.end());
    }
    snap.classes.push_back(std::move(cs));
  }
  return snap;
}

TsetlinMachine import_state(const StateSnapshot& snapshot) {
  snapshot.params.validate();
  const TMParams& p = snapshot.params;
  if (static_cast<int>(snapshot.classes.size()) != p.n_classes)
    throw DataError("snapshot has " + std::to_string(snapshot.classes.size()) +
                    " classes, parameters say " + std::to_string(p.n_classes));

  TsetlinMachine tm(p);
  tm.feedback_rng().set_state(snapshot.feedback_rng_state);
  tm.orch_rng().set_state(snapshot.orch_rng_state);

  const size_t n_literals = 2 * static_cast<size_t>(p.n_features);
  for (int cls = 0; cls < p.n_classes; ++cls) {
    const auto& cs = snapshot.classes[cls];
    if (cs.polarities.size() != static_cast<size_t>(p.n_clauses) ||
        cs.weights.size() != static_cast<size_t>(p.n_clauses) ||
        cs.states.size() != static_cast<size_t>(p.n_clauses) * n_literals)
      throw DataError("snapshot class " + std::to_string(cls) +
                      " has inconsistent clause data");
    for (int j = 0; j < p.n_clauses; ++j) {
      Clause& c = tm.banks()[cls].clauses[j];
      if (cs.polarities[j] != c.polarity)
        throw DataError("snapshot polarity layout mismatch at clause " +
                        std::to_string(j));
      if (!(cs.weights[j] > 0.0))
        throw DataError("snapshot weight must be positive");
      c.weight = cs.weights[j];
      for (size_t k = 0; k < n_literals; ++k) {
        const uint16_t st = cs.states[j * n_literals + k];
        if (st < 1 || st > 2 * p.s_max)
          throw DataError("snapshot automaton state out of range");
        c.states[k] = st;
      }
      c.rebuild_include(p.s_max);
    }
  }
  return tm;
}

}  // namespace tmkd
