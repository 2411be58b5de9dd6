#pragma once

#include <string>
#include <vector>

namespace tmkd {

/// One evaluated epoch of one model in one run. For clause-transform
/// pipelines the test seconds already include the teacher transform cost.
struct EpochRow {
  int run = 0;
  int epoch = 0;           // global epoch index (distilled curves start
                           // after the teacher checkpoint epoch)
  std::string split;       // "train" or "test"
  double accuracy = 0.0;
  double seconds = 0.0;
};

struct ModelCurves {
  std::string model;  // "teacher", "student", "distilled", "distilled_pcd"
  std::vector<EpochRow> rows;
};

/// Aggregates over the K runs: each run is reduced to the mean over its own
/// epochs first, then mean and sample standard deviation are taken across
/// runs.
struct SplitSummary {
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double seconds_mean = 0.0;
  double seconds_std = 0.0;
};

struct ModelSummary {
  std::string model;
  SplitSummary train;
  SplitSummary test;
  double train_seconds_vs_teacher = 0.0;  // mean epoch seconds / teacher's
  double test_seconds_vs_teacher = 0.0;
};

/// csv: "run,epoch,split,accuracy,seconds", accuracy and seconds to 6
/// decimals.
void write_model_csv(const ModelCurves& curves, const std::string& path);
ModelCurves read_model_csv(const std::string& path, const std::string& model);

std::vector<ModelSummary> summarize(const std::vector<ModelCurves>& curves);

/// summary.csv plus a human-readable summary.txt in `dir`.
void write_summary(const std::vector<ModelSummary>& summaries,
                   const std::string& dir);

}  // namespace tmkd
