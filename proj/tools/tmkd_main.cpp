#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tmkd/activation.hpp"
#include "tmkd/ckd.hpp"
#include "tmkd/experiment.hpp"
#include "tmkd/persist.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string dataset;
  std::string data_dir;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  std::string deterministic;  // "", "true", "false"
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config_path,
                              "experiment config JSON");
  if (config_required) opt->required();
  cmd->add_option("--dataset", flags.dataset,
                  "dataset name override (noisy_xor, idx, text)");
  cmd->add_option("--data-dir", flags.data_dir, "dataset directory override");
  cmd->add_option("--out", flags.out_dir, "output directory override");
  cmd->add_option("--seed", flags.seed, "base seed override")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--jobs", flags.jobs, "worker cap for repeated runs");
  cmd->add_option("--deterministic", flags.deterministic,
                  "true: fully sequential; false: parallel inference passes")
      ->check(CLI::IsMember({"true", "false"}));
}

tmkd::ExperimentConfig resolve_config(const CommonFlags& flags) {
  tmkd::ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = tmkd::load_config(flags.config_path);
  if (!flags.dataset.empty()) cfg.dataset.name = flags.dataset;
  if (!flags.data_dir.empty()) cfg.dataset.data_dir = flags.data_dir;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.jobs > 0) cfg.jobs = flags.jobs;
  if (flags.deterministic == "true") cfg.deterministic = true;
  if (flags.deterministic == "false") cfg.deterministic = false;
  cfg.validate();
  return cfg;
}

int run_train(const CommonFlags& flags, const std::string& which, int epochs,
              const std::string& model_out) {
  tmkd::ExperimentConfig cfg = resolve_config(flags);
  const tmkd::Dataset ds = tmkd::load_dataset(cfg.dataset);
  const tmkd::ModelConfig& block =
      which == "student" ? cfg.student : cfg.teacher;
  const int n_epochs =
      epochs > 0 ? epochs : cfg.epochs_teacher + cfg.epochs_student;

  tmkd::TMParams params;
  params.n_clauses = block.clauses;
  params.threshold = block.threshold;
  params.specificity = block.specificity;
  params.weight_lr = cfg.weight_lr;
  params.n_features = ds.n_features;
  params.n_classes = ds.n_classes;
  params.s_max = cfg.s_max;
  params.rng_seed = tmkd::model_seed(tmkd::run_seed(cfg.seed, 0),
                                     which == "student" ? 1 : 2);

  tmkd::TsetlinMachine tm(params);
  std::filesystem::create_directories(cfg.out_dir);
  const tmkd::ModelCurves curves = tmkd::fit_and_track(
      tm, which, 0, ds.train_x, ds.train_y, ds.test_x, ds.test_y, n_epochs,
      0, 0.0, !cfg.deterministic);
  tmkd::write_model_csv(curves, cfg.out_dir + "/" + which + ".csv");

  const std::string model_path =
      model_out.empty() ? cfg.out_dir + "/" + which + ".tm" : model_out;
  tmkd::save_model(tm, model_path);

  const tmkd::EpochRow& last = curves.rows.back();
  std::printf("%s: %d epochs, final test accuracy %.4f, model %s\n",
              which.c_str(), n_epochs, last.accuracy, model_path.c_str());
  return 0;
}

int run_distill(const CommonFlags& flags, const std::string& mode,
                const std::string& soft_in, const std::string& soft_out) {
  tmkd::ExperimentConfig cfg = resolve_config(flags);
  if (!mode.empty()) cfg.mode = mode;
  cfg.validate();
  const tmkd::RunReport report =
      tmkd::run_experiment(cfg, soft_in, soft_out);
  tmkd::emit_report(report, cfg.out_dir);
  std::printf("%s: %d run(s) complete, report in %s\n", cfg.mode.c_str(),
              cfg.runs, cfg.out_dir.c_str());
  for (const tmkd::ModelSummary& s : tmkd::summarize(report.curves))
    std::printf("  %-13s test accuracy %.4f +- %.4f\n", s.model.c_str(),
                s.test.accuracy_mean, s.test.accuracy_std);
  return 0;
}

int run_evaluate(const CommonFlags& flags, const std::string& model_path,
                 const std::string& split) {
  const tmkd::ExperimentConfig cfg = resolve_config(flags);
  const tmkd::Dataset ds = tmkd::load_dataset(cfg.dataset);
  const tmkd::TsetlinMachine tm = tmkd::load_model(model_path);
  const bool train = split == "train";
  const tmkd::Eval eval =
      tmkd::evaluate_split(tm, train ? ds.train_x : ds.test_x,
                           train ? ds.train_y : ds.test_y, !cfg.deterministic);
  std::printf("%s %s accuracy %.4f in %.6fs\n", model_path.c_str(),
              split.c_str(), eval.accuracy, eval.seconds);
  return 0;
}

int run_activation_map(const std::string& model_path, int height, int width,
                       const std::string& out_path, bool gray) {
  const tmkd::TsetlinMachine tm = tmkd::load_model(model_path);
  const tmkd::ActivationMap map = tmkd::activation_map(tm, height, width);
  if (gray)
    tmkd::write_activation_pgm(map, out_path);
  else
    tmkd::write_activation_ppm(map, out_path);
  std::printf("%s: %lldx%lld map, %lld active features -> %s\n",
              model_path.c_str(), static_cast<long long>(height),
              static_cast<long long>(width),
              static_cast<long long>(map.nonzero_count()), out_path.c_str());
  return 0;
}

int run_report(const std::string& in_dir, const std::string& out_dir) {
  std::vector<tmkd::ModelCurves> curves;
  for (const char* model :
       {"teacher", "student", "distilled", "distilled_pcd"}) {
    const std::string path = in_dir + "/" + model + ".csv";
    if (std::filesystem::exists(path))
      curves.push_back(tmkd::read_model_csv(path, model));
  }
  if (curves.empty())
    throw tmkd::DataError("no model CSVs found in " + in_dir);
  const std::string dir = out_dir.empty() ? in_dir : out_dir;
  std::filesystem::create_directories(dir);
  tmkd::write_summary(tmkd::summarize(curves), dir);
  std::printf("summary written to %s\n", dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Tsetlin machine training, distillation and "
               "benchmark reports"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  std::string train_which = "teacher";
  int train_epochs = 0;
  std::string train_model_out;
  CLI::App* train = app.add_subcommand("train", "train one baseline model");
  add_common(train, train_flags, true);
  train->add_option("--model", train_which, "teacher or student block")
      ->check(CLI::IsMember({"teacher", "student"}));
  train->add_option("--epochs", train_epochs,
                    "epoch count (default: epochs_teacher + epochs_student)");
  train->add_option("--save-model", train_model_out, "model file path");

  CommonFlags distill_flags;
  std::string distill_mode;
  std::string soft_in, soft_out;
  CLI::App* distill =
      app.add_subcommand("distill", "run the full benchmark protocol");
  add_common(distill, distill_flags, true);
  distill->add_option("--mode", distill_mode, "dkd, ckd or baselines_only")
      ->check(CLI::IsMember({"dkd", "ckd", "baselines_only"}));
  distill->add_option("--soft-labels-in", soft_in,
                      "use these training distributions instead of the "
                      "teacher's (runs must be 1)");
  distill->add_option("--soft-labels-out", soft_out,
                      "dump run 0's training distributions as CSV");

  CommonFlags eval_flags;
  std::string eval_model, eval_split = "test";
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score a saved model on a dataset");
  add_common(evaluate, eval_flags, true);
  evaluate->add_option("--model", eval_model, "model file")->required();
  evaluate->add_option("--split", eval_split, "train or test")
      ->check(CLI::IsMember({"train", "test"}));

  std::string map_model, map_out = "activation.ppm";
  int map_height = 0, map_width = 0;
  bool map_gray = false;
  CLI::App* map = app.add_subcommand(
      "activation-map", "render per-feature influence of a saved model");
  map->add_option("--model", map_model, "model file")->required();
  map->add_option("--height", map_height, "map rows")->required();
  map->add_option("--width", map_width, "map columns")->required();
  map->add_option("--out", map_out, "image path");
  map->add_flag("--gray", map_gray, "write a PGM instead of a red/green PPM");

  std::string report_in, report_out;
  CLI::App* report = app.add_subcommand(
      "report", "recompute the summary from per-model CSVs");
  report->add_option("--dir", report_in, "directory with model CSVs")
      ->required();
  report->add_option("--out", report_out, "summary directory (default: --dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train)
      return run_train(train_flags, train_which, train_epochs,
                       train_model_out);
    if (*distill)
      return run_distill(distill_flags, distill_mode, soft_in, soft_out);
    if (*evaluate) return run_evaluate(eval_flags, eval_model, eval_split);
    if (*map)
      return run_activation_map(map_model, map_height, map_width, map_out,
                                map_gray);
    if (*report) return run_report(report_in, report_out);
  } catch (const tmkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const tmkd::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
