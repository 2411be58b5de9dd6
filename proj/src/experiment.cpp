#include "tmkd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include "json.hpp"
#include "tmkd/ckd.hpp"
#include "tmkd/persist.hpp"

namespace tmkd {

namespace {

using nlohmann::json;

constexpr int kStudentTag = 1;
constexpr int kTeacherTag = 2;
constexpr int kDistilledTag = 3;
constexpr int kPcdTag = 4;

void require_keys(const json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) known = true;
    if (!known)
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

DatasetConfig parse_dataset(const json& j) {
  require_keys(j, "dataset",
               {"name", "data_dir", "binarize_threshold", "max_features",
                "synth", "train_images", "train_labels", "test_images",
                "test_labels"});
  DatasetConfig cfg;
  cfg.name = j.value("name", cfg.name);
  cfg.data_dir = j.value("data_dir", cfg.data_dir);
  cfg.binarize_threshold = j.value("binarize_threshold", cfg.binarize_threshold);
  cfg.max_features = j.value("max_features", cfg.max_features);
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    require_keys(s, "dataset.synth", {"samples", "features", "noise", "seed"});
    cfg.synth_samples = s.value("samples", cfg.synth_samples);
    cfg.synth_features = s.value("features", cfg.synth_features);
    cfg.synth_noise = s.value("noise", cfg.synth_noise);
    cfg.synth_seed = s.value("seed", cfg.synth_seed);
  }
  cfg.train_images = j.value("train_images", cfg.train_images);
  cfg.train_labels = j.value("train_labels", cfg.train_labels);
  cfg.test_images = j.value("test_images", cfg.test_images);
  cfg.test_labels = j.value("test_labels", cfg.test_labels);
  return cfg;
}

ModelConfig parse_model(const json& j, const std::string& where,
                        ModelConfig defaults) {
  require_keys(j, where, {"clauses", "threshold", "specificity"});
  ModelConfig cfg = defaults;
  cfg.clauses = j.value("clauses", cfg.clauses);
  cfg.threshold = j.value("threshold", cfg.threshold);
  cfg.specificity = j.value("specificity", cfg.specificity);
  return cfg;
}

TMParams make_params(const ModelConfig& model, const ExperimentConfig& cfg,
                     int n_features, int n_classes, uint64_t seed) {
  TMParams p;
  p.n_clauses = model.clauses;
  p.threshold = model.threshold;
  p.specificity = model.specificity;
  p.weight_lr = cfg.weight_lr;
  p.n_features = n_features;
  p.n_classes = n_classes;
  p.s_max = cfg.s_max;
  p.rng_seed = seed;
  return p;
}

void push_rows(ModelCurves& curves, int run, int epoch, double train_acc,
               double train_seconds, const Eval& test) {
  curves.rows.push_back({run, epoch, "train", train_acc, train_seconds});
  curves.rows.push_back({run, epoch, "test", test.accuracy, test.seconds});
}

struct RunOutput {
  std::vector<ModelCurves> curves;
  RunExtras extras;
};

}  // namespace

Eval evaluate_split(const TsetlinMachine& tm, const BitMatrix& x,
                    const std::vector<int>& y, bool parallel) {
  Eval e;
  const std::vector<int> pred = tm.predict_batch(x, &e.seconds, parallel);
  int64_t correct = 0;
  for (size_t i = 0; i < y.size(); ++i)
    if (pred[i] == y[i]) ++correct;
  e.accuracy = y.empty() ? 0.0 : static_cast<double>(correct) / y.size();
  return e;
}

void ExperimentConfig::validate() const {
  if (mode != "dkd" && mode != "ckd" && mode != "baselines_only")
    throw ConfigError("mode must be dkd, ckd or baselines_only, got '" +
                      mode + "'");
  if (epochs_teacher < 1 || epochs_student < 1)
    throw ConfigError("epoch counts must be >= 1");
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (teacher.clauses < student.clauses)
    throw ConfigError("teacher must have at least as many clauses as the "
                      "student");
  distill.validate();
  if (!(ckd.delta >= 0.0 && ckd.delta < 0.5))
    throw ConfigError("ckd.delta must be in [0, 0.5)");
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
  if (dataset.name != "noisy_xor" && dataset.name != "idx" &&
      dataset.name != "text")
    throw ConfigError("dataset.name must be noisy_xor, idx or text, got '" +
                      dataset.name + "'");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }

  try {
    require_keys(j, "config",
                 {"dataset", "teacher", "student", "epochs_teacher",
                  "epochs_student", "runs", "mode", "distill", "ckd",
                  "weight_lr", "s_max", "seed", "jobs", "deterministic",
                  "out_dir"});
    ExperimentConfig cfg;
    if (j.contains("dataset")) cfg.dataset = parse_dataset(j.at("dataset"));
    if (j.contains("teacher"))
      cfg.teacher = parse_model(j.at("teacher"), "teacher", cfg.teacher);
    if (j.contains("student"))
      cfg.student = parse_model(j.at("student"), "student", cfg.student);
    cfg.epochs_teacher = j.value("epochs_teacher", cfg.epochs_teacher);
    cfg.epochs_student = j.value("epochs_student", cfg.epochs_student);
    cfg.runs = j.value("runs", cfg.runs);
    cfg.mode = j.value("mode", cfg.mode);
    if (j.contains("distill")) {
      const json& d = j.at("distill");
      require_keys(d, "distill",
                   {"alpha", "tau", "weight_transfer", "phi_floor",
                    "guard_true_class"});
      cfg.distill.alpha = d.value("alpha", cfg.distill.alpha);
      cfg.distill.tau = d.value("tau", cfg.distill.tau);
      cfg.distill.weight_transfer_z =
          d.value("weight_transfer", cfg.distill.weight_transfer_z);
      cfg.distill.phi_floor = d.value("phi_floor", cfg.distill.phi_floor);
      cfg.distill.guard_true_class =
          d.value("guard_true_class", cfg.distill.guard_true_class);
    }
    if (j.contains("ckd")) {
      const json& c = j.at("ckd");
      require_keys(c, "ckd", {"delta", "use_pcd"});
      cfg.ckd.delta = c.value("delta", cfg.ckd.delta);
      cfg.ckd.use_pcd = c.value("use_pcd", cfg.ckd.use_pcd);
    }
    cfg.weight_lr = j.value("weight_lr", cfg.weight_lr);
    cfg.s_max = j.value("s_max", cfg.s_max);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.deterministic = j.value("deterministic", cfg.deterministic);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["dataset"]["name"] = cfg.dataset.name;
  j["dataset"]["data_dir"] = cfg.dataset.data_dir;
  j["dataset"]["binarize_threshold"] = cfg.dataset.binarize_threshold;
  j["dataset"]["max_features"] = cfg.dataset.max_features;
  j["dataset"]["synth"]["samples"] = cfg.dataset.synth_samples;
  j["dataset"]["synth"]["features"] = cfg.dataset.synth_features;
  j["dataset"]["synth"]["noise"] = cfg.dataset.synth_noise;
  j["dataset"]["synth"]["seed"] = cfg.dataset.synth_seed;
  j["dataset"]["train_images"] = cfg.dataset.train_images;
  j["dataset"]["train_labels"] = cfg.dataset.train_labels;
  j["dataset"]["test_images"] = cfg.dataset.test_images;
  j["dataset"]["test_labels"] = cfg.dataset.test_labels;
  j["teacher"] = {{"clauses", cfg.teacher.clauses},
                  {"threshold", cfg.teacher.threshold},
                  {"specificity", cfg.teacher.specificity}};
  j["student"] = {{"clauses", cfg.student.clauses},
                  {"threshold", cfg.student.threshold},
                  {"specificity", cfg.student.specificity}};
  j["epochs_teacher"] = cfg.epochs_teacher;
  j["epochs_student"] = cfg.epochs_student;
  j["runs"] = cfg.runs;
  j["mode"] = cfg.mode;
  j["distill"] = {{"alpha", cfg.distill.alpha},
                  {"tau", cfg.distill.tau},
                  {"weight_transfer", cfg.distill.weight_transfer_z},
                  {"phi_floor", cfg.distill.phi_floor},
                  {"guard_true_class", cfg.distill.guard_true_class}};
  j["ckd"] = {{"delta", cfg.ckd.delta}, {"use_pcd", cfg.ckd.use_pcd}};
  j["weight_lr"] = cfg.weight_lr;
  j["s_max"] = cfg.s_max;
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  j["deterministic"] = cfg.deterministic;
  j["out_dir"] = cfg.out_dir;
  return j.dump(2) + "\n";
}

Dataset load_dataset(const DatasetConfig& cfg) {
  const std::string dir =
      cfg.data_dir.empty() ? std::string(".") : cfg.data_dir;
  if (cfg.name == "noisy_xor") {
    return synth_noisy_xor(cfg.synth_samples, cfg.synth_features,
                           cfg.synth_noise, cfg.synth_seed);
  }
  if (cfg.name == "idx") {
    auto [train_images, train_y] = load_idx(dir + "/" + cfg.train_images,
                                            dir + "/" + cfg.train_labels);
    auto [test_images, test_y] =
        load_idx(dir + "/" + cfg.test_images, dir + "/" + cfg.test_labels);
    Dataset ds;
    ds.name = "idx";
    ds.train_x = binarize(train_images, cfg.binarize_threshold);
    ds.train_y = std::move(train_y);
    ds.test_x = binarize(test_images, cfg.binarize_threshold);
    ds.test_y = std::move(test_y);
    ds.n_features = static_cast<int>(ds.train_x.cols());
    int top = 0;
    for (int v : ds.train_y) top = std::max(top, v);
    for (int v : ds.test_y) top = std::max(top, v);
    ds.n_classes = top + 1;
    ds.validate();
    return ds;
  }
  if (cfg.name == "text") {
    return booleanize_text(read_lines(dir + "/train.txt"),
                           read_label_lines(dir + "/train.labels"),
                           read_lines(dir + "/test.txt"),
                           read_label_lines(dir + "/test.labels"),
                           cfg.max_features);
  }
  throw ConfigError("unknown dataset '" + cfg.name + "'");
}

uint64_t run_seed(uint64_t base, int run) {
  return derive_seed(base, static_cast<uint64_t>(run));
}

uint64_t model_seed(uint64_t run_seed_value, int model_tag) {
  return derive_seed(run_seed_value, static_cast<uint64_t>(model_tag));
}

ModelCurves fit_and_track(TsetlinMachine& tm, const std::string& name,
                          int run, const BitMatrix& train_x,
                          const std::vector<int>& train_y,
                          const BitMatrix& test_x,
                          const std::vector<int>& test_y, int epochs,
                          int epoch_offset, double extra_test_seconds,
                          bool parallel_eval, int checkpoint_epoch,
                          const std::string& checkpoint_path) {
  ModelCurves curves;
  curves.model = name;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const FitReport fit = fit_standard(tm, train_x, train_y, 1);
    const Eval test = evaluate_split(tm, test_x, test_y, parallel_eval);
    push_rows(curves, run, epoch_offset + epoch, fit.train_accuracy[0],
              fit.epoch_seconds[0],
              {test.accuracy, test.seconds + extra_test_seconds});
    if (epoch == checkpoint_epoch && !checkpoint_path.empty())
      save_model(tm, checkpoint_path);
  }
  return curves;
}

namespace {

ModelCurves fit_and_track_enhanced(TsetlinMachine& tm, const std::string& name,
                                   int run, const BitMatrix& train_x,
                                   const std::vector<int>& train_y,
                                   const SoftLabelMatrix& soft_labels,
                                   const DistillParams& params,
                                   const BitMatrix& test_x,
                                   const std::vector<int>& test_y, int epochs,
                                   int epoch_offset, bool parallel_eval) {
  ModelCurves curves;
  curves.model = name;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const FitReport fit =
        fit_enhanced(tm, train_x, train_y, soft_labels, 1, params);
    const Eval test = evaluate_split(tm, test_x, test_y, parallel_eval);
    push_rows(curves, run, epoch_offset + epoch, fit.train_accuracy[0],
              fit.epoch_seconds[0], test);
  }
  return curves;
}

RunOutput run_one(const ExperimentConfig& cfg, const Dataset& ds, int run,
                  const std::string& soft_labels_in,
                  const std::string& soft_labels_out) {
  const uint64_t rs = run_seed(cfg.seed, run);
  const bool parallel_eval = !cfg.deterministic;
  const int e_total = cfg.epochs_teacher + cfg.epochs_student;
  const std::string checkpoint_path = cfg.out_dir + "/checkpoints/teacher_run" +
                                      std::to_string(run) + ".tm";

  RunOutput out;
  out.extras.run = run;

  TsetlinMachine student(make_params(cfg.student, cfg, ds.n_features,
                                     ds.n_classes,
                                     model_seed(rs, kStudentTag)));
  out.curves.push_back(fit_and_track(
      student, "student", run, ds.train_x, ds.train_y, ds.test_x, ds.test_y,
      e_total, 0, 0.0, parallel_eval, -1, ""));

  TsetlinMachine teacher(make_params(cfg.teacher, cfg, ds.n_features,
                                     ds.n_classes,
                                     model_seed(rs, kTeacherTag)));
  out.curves.push_back(fit_and_track(
      teacher, "teacher", run, ds.train_x, ds.train_y, ds.test_x, ds.test_y,
      e_total, 0, 0.0, parallel_eval, cfg.epochs_teacher, checkpoint_path));

  if (cfg.mode == "baselines_only") return out;

  const TsetlinMachine teacher_at_checkpoint = load_model(checkpoint_path);

  if (cfg.mode == "dkd") {
    TsetlinMachine distilled(make_params(cfg.student, cfg, ds.n_features,
                                         ds.n_classes,
                                         model_seed(rs, kDistilledTag)));
    intelligent_transfer(teacher_at_checkpoint, distilled,
                         cfg.distill.weight_transfer_z);

    SoftLabelMatrix soft_labels;
    if (!soft_labels_in.empty()) {
      soft_labels = load_soft_labels_csv(soft_labels_in);
    } else {
      soft_labels = get_soft_labels(
          class_sums_unclamped(teacher_at_checkpoint, ds.train_x));
    }
    if (run == 0 && !soft_labels_out.empty())
      save_soft_labels_csv(soft_labels, soft_labels_out);

    out.curves.push_back(fit_and_track_enhanced(
        distilled, "distilled", run, ds.train_x, ds.train_y, soft_labels,
        cfg.distill, ds.test_x, ds.test_y, cfg.epochs_student,
        cfg.epochs_teacher, parallel_eval));
    return out;
  }

  // ckd: the distilled models consume teacher clause outputs, so their
  // reported inference time carries the transform cost of the test split.
  BitMatrix train_t = clause_transform(teacher_at_checkpoint, ds.train_x);
  BitMatrix test_t = clause_transform(teacher_at_checkpoint, ds.test_x,
                                      &out.extras.transform_test_seconds);
  const int64_t width = train_t.cols();
  out.extras.info_full = info_measure(2 * width, cfg.student.clauses);

  {
    ModelConfig model = cfg.student;
    TsetlinMachine distilled(make_params(model, cfg,
                                         static_cast<int>(width),
                                         ds.n_classes,
                                         model_seed(rs, kDistilledTag)));
    out.curves.push_back(fit_and_track(
        distilled, "distilled", run, train_t, ds.train_y, test_t, ds.test_y,
        cfg.epochs_student, cfg.epochs_teacher,
        out.extras.transform_test_seconds, parallel_eval, -1, ""));
  }

  if (cfg.ckd.use_pcd) {
    const PcdProjection proj = fit_pcd_projection(train_t, cfg.ckd.delta);
    out.extras.pcd_source_width = proj.source_width;
    out.extras.pcd_retained = static_cast<int64_t>(proj.retained.size());
    if (proj.retained.empty())
      throw DataError("downsampling retained no clause outputs; lower delta");
    out.extras.info_pcd =
        info_measure(2 * out.extras.pcd_retained, cfg.student.clauses);
    const BitMatrix train_p = apply_projection(train_t, proj);
    const BitMatrix test_p = apply_projection(test_t, proj);
    TsetlinMachine pcd(make_params(cfg.student, cfg,
                                   static_cast<int>(train_p.cols()),
                                   ds.n_classes, model_seed(rs, kPcdTag)));
    out.curves.push_back(fit_and_track(
        pcd, "distilled_pcd", run, train_p, ds.train_y, test_p, ds.test_y,
        cfg.epochs_student, cfg.epochs_teacher,
        out.extras.transform_test_seconds, parallel_eval, -1, ""));
  }
  return out;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg,
                         const std::string& soft_labels_in,
                         const std::string& soft_labels_out) {
  cfg.validate();
  if (!soft_labels_in.empty() && cfg.runs > 1)
    throw ConfigError(
        "an external soft label file fixes one teacher; use runs = 1");
  const Dataset ds = load_dataset(cfg.dataset);
  std::filesystem::create_directories(cfg.out_dir + "/checkpoints");

  std::vector<RunOutput> outputs(static_cast<size_t>(cfg.runs));
  const int workers = std::min(cfg.jobs, cfg.runs);
  if (workers <= 1) {
    for (int r = 0; r < cfg.runs; ++r)
      outputs[static_cast<size_t>(r)] =
          run_one(cfg, ds, r, soft_labels_in, soft_labels_out);
  } else {
    std::atomic<int> next{0};
    std::vector<std::future<void>> pool;
    for (int w = 0; w < workers; ++w)
      pool.push_back(std::async(std::launch::async, [&] {
        for (int r = next.fetch_add(1); r < cfg.runs; r = next.fetch_add(1))
          outputs[static_cast<size_t>(r)] =
              run_one(cfg, ds, r, soft_labels_in, soft_labels_out);
      }));
    for (auto& f : pool) f.get();
  }

  RunReport report;
  report.config = cfg;
  for (RunOutput& out : outputs) {
    for (ModelCurves& curves : out.curves) {
      auto it = std::find_if(
          report.curves.begin(), report.curves.end(),
          [&](const ModelCurves& c) { return c.model == curves.model; });
      if (it == report.curves.end()) {
        report.curves.push_back(std::move(curves));
      } else {
        it->rows.insert(it->rows.end(), curves.rows.begin(),
                        curves.rows.end());
      }
    }
    if (cfg.mode == "ckd") report.extras.push_back(out.extras);
  }
  return report;
}

void emit_report(const RunReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const ModelCurves& curves : report.curves)
    write_model_csv(curves, dir + "/" + curves.model + ".csv");
  write_summary(summarize(report.curves), dir);
  {
    std::ofstream out(dir + "/config.json", std::ios::binary);
    if (!out) throw DataError("cannot open " + dir + "/config.json");
    out << config_to_json(report.config);
  }
  if (!report.extras.empty()) {
    std::ofstream out(dir + "/ckd_accounting.csv", std::ios::binary);
    if (!out) throw DataError("cannot open " + dir + "/ckd_accounting.csv");
    out << "run,transform_test_seconds,source_width,retained,info_full,"
           "info_pcd\n";
    char buf[128];
    for (const RunExtras& e : report.extras) {
      std::snprintf(buf, sizeof buf, "%d,%.6f,%lld,%lld,%.9g,%.9g\n", e.run,
                    e.transform_test_seconds,
                    static_cast<long long>(e.pcd_source_width),
                    static_cast<long long>(e.pcd_retained), e.info_full,
                    e.info_pcd);
      out << buf;
    }
  }
}

}  // namespace tmkd
