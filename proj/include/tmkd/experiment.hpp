#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tmkd/data.hpp"
#include "tmkd/distill.hpp"
#include "tmkd/report.hpp"
#include "tmkd/tm.hpp"

namespace tmkd {

struct DatasetConfig {
  std::string name = "noisy_xor";  // noisy_xor | idx | text
  std::string data_dir;
  int binarize_threshold = 75;
  int max_features = 5000;
  // synthetic generator
  int64_t synth_samples = 6250;
  int synth_features = 12;
  double synth_noise = 0.1;
  uint64_t synth_seed = 1;
  // idx file names, relative to data_dir
  std::string train_images = "train-images-idx3-ubyte";
  std::string train_labels = "train-labels-idx1-ubyte";
  std::string test_images = "t10k-images-idx3-ubyte";
  std::string test_labels = "t10k-labels-idx1-ubyte";
};

struct ModelConfig {
  int clauses = 100;
  int threshold = 15;
  double specificity = 3.9;
};

struct CkdConfig {
  double delta = 0.15;
  bool use_pcd = true;
};

/// Everything one benchmark invocation needs, loadable from one JSON file.
struct ExperimentConfig {
  DatasetConfig dataset;
  ModelConfig teacher{100, 15, 3.9};
  ModelConfig student{10, 15, 3.9};
  int epochs_teacher = 50;   // E_T, checkpoint epoch
  int epochs_student = 100;  // E_S, distilled training length
  int runs = 1;              // K
  std::string mode = "dkd";  // dkd | ckd | baselines_only
  DistillParams distill;
  CkdConfig ckd;
  double weight_lr = 0.03;
  int s_max = 127;
  uint64_t seed = 42;
  int jobs = 1;
  bool deterministic = true;
  std::string out_dir = "out";

  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

/// Per-run bookkeeping beyond the epoch curves.
struct RunExtras {
  int run = 0;
  double transform_test_seconds = 0.0;  // teacher pass over the test split
  int64_t pcd_source_width = 0;
  int64_t pcd_retained = 0;
  double info_full = 0.0;  // info measure of the full clause set
  double info_pcd = 0.0;   // and of the retained subset
};

struct RunReport {
  ExperimentConfig config;
  std::vector<ModelCurves> curves;  // teacher, student, then mode-specific
  std::vector<RunExtras> extras;    // ckd mode only
};

/// Runs the full protocol: a student baseline and a teacher baseline for
/// E_T + E_S epochs each (the teacher checkpointed at E_T), then per mode
/// the distilled branch, repeated over `runs` seeds. Soft-label and
/// clause-transform generation is never part of the timed epochs.
/// soft_labels_in, when set, replaces the teacher-generated training
/// distributions (dkd mode); soft_labels_out dumps run 0's distributions.
RunReport run_experiment(const ExperimentConfig& cfg,
                         const std::string& soft_labels_in = "",
                         const std::string& soft_labels_out = "");

/// Writes one CSV per model, summary.csv, summary.txt and the resolved
/// config into `dir`.
void emit_report(const RunReport& report, const std::string& dir);

/// Loads the dataset a config describes.
Dataset load_dataset(const DatasetConfig& cfg);

/// Per-run and per-model seed derivation, shared by tools and tests.
uint64_t run_seed(uint64_t base, int run);
uint64_t model_seed(uint64_t run_seed_value, int model_tag);

/// Accuracy and wall-clock prediction time over one split.
struct Eval {
  double accuracy = 0.0;
  double seconds = 0.0;
};
Eval evaluate_split(const TsetlinMachine& tm, const BitMatrix& x,
                    const std::vector<int>& y, bool parallel = false);

/// Standard training one epoch at a time, evaluating the test split after
/// each epoch. extra_test_seconds is added to every test row (transform
/// cost accounting); a checkpoint is saved after checkpoint_epoch epochs
/// when a path is given, outside the timed sections.
ModelCurves fit_and_track(TsetlinMachine& tm, const std::string& name,
                          int run, const BitMatrix& train_x,
                          const std::vector<int>& train_y,
                          const BitMatrix& test_x,
                          const std::vector<int>& test_y, int epochs,
                          int epoch_offset = 0, double extra_test_seconds = 0.0,
                          bool parallel_eval = false,
                          int checkpoint_epoch = -1,
                          const std::string& checkpoint_path = "");

}  // namespace tmkd
