#include "tmkd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tmkd/errors.hpp"

namespace tmkd {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct RunningStats {
  std::vector<double> per_run_means;

  void add(const std::vector<double>& values) {
    if (values.empty()) return;
    double total = 0.0;
    for (double v : values) total += v;
    per_run_means.push_back(total / static_cast<double>(values.size()));
  }

  double mean() const {
    if (per_run_means.empty()) return 0.0;
    double total = 0.0;
    for (double v : per_run_means) total += v;
    return total / static_cast<double>(per_run_means.size());
  }

  double sample_std() const {
    if (per_run_means.size() < 2) return 0.0;
    const double m = mean();
    double sq = 0.0;
    for (double v : per_run_means) sq += (v - m) * (v - m);
    return std::sqrt(sq / static_cast<double>(per_run_means.size() - 1));
  }
};

SplitSummary summarize_split(const ModelCurves& curves,
                             const std::string& split) {
  std::map<int, std::vector<double>> acc_by_run, sec_by_run;
  for (const EpochRow& row : curves.rows) {
    if (row.split != split) continue;
    acc_by_run[row.run].push_back(row.accuracy);
    sec_by_run[row.run].push_back(row.seconds);
  }
  RunningStats acc, sec;
  for (auto& [run, values] : acc_by_run) acc.add(values);
  for (auto& [run, values] : sec_by_run) sec.add(values);
  SplitSummary out;
  out.accuracy_mean = acc.mean();
  out.accuracy_std = acc.sample_std();
  out.seconds_mean = sec.mean();
  out.seconds_std = sec.sample_std();
  return out;
}

}  // namespace

void write_model_csv(const ModelCurves& curves, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "run,epoch,split,accuracy,seconds\n";
  for (const EpochRow& row : curves.rows)
    out << row.run << ',' << row.epoch << ',' << row.split << ','
        << fixed6(row.accuracy) << ',' << fixed6(row.seconds) << '\n';
  if (!out) throw DataError("failed writing " + path);
}

ModelCurves read_model_csv(const std::string& path, const std::string& model) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  ModelCurves curves;
  curves.model = model;
  std::string line;
  if (!std::getline(in, line) || line != "run,epoch,split,accuracy,seconds")
    throw DataError("unexpected header in " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string run, epoch, split, accuracy, seconds;
    if (!std::getline(ss, run, ',') || !std::getline(ss, epoch, ',') ||
        !std::getline(ss, split, ',') || !std::getline(ss, accuracy, ',') ||
        !std::getline(ss, seconds, ','))
      throw DataError("bad row in " + path + ": " + line);
    EpochRow row;
    try {
      row.run = std::stoi(run);
      row.epoch = std::stoi(epoch);
      row.split = split;
      row.accuracy = std::stod(accuracy);
      row.seconds = std::stod(seconds);
    } catch (const std::exception&) {
      throw DataError("bad row in " + path + ": " + line);
    }
    curves.rows.push_back(std::move(row));
  }
  return curves;
}

std::vector<ModelSummary> summarize(const std::vector<ModelCurves>& curves) {
  std::vector<ModelSummary> out;
  const ModelCurves* teacher = nullptr;
  for (const ModelCurves& c : curves)
    if (c.model == "teacher") teacher = &c;

  SplitSummary teacher_train, teacher_test;
  if (teacher) {
    teacher_train = summarize_split(*teacher, "train");
    teacher_test = summarize_split(*teacher, "test");
  }

  for (const ModelCurves& c : curves) {
    ModelSummary s;
    s.model = c.model;
    s.train = summarize_split(c, "train");
    s.test = summarize_split(c, "test");
    if (teacher && teacher_train.seconds_mean > 0.0)
      s.train_seconds_vs_teacher =
          s.train.seconds_mean / teacher_train.seconds_mean;
    if (teacher && teacher_test.seconds_mean > 0.0)
      s.test_seconds_vs_teacher =
          s.test.seconds_mean / teacher_test.seconds_mean;
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary(const std::vector<ModelSummary>& summaries,
                   const std::string& dir) {
  {
    std::ofstream out(dir + "/summary.csv", std::ios::binary);
    if (!out) throw DataError("cannot open " + dir + "/summary.csv");
    out << "model,split,accuracy_mean,accuracy_std,seconds_mean,seconds_std,"
           "seconds_vs_teacher\n";
    for (const ModelSummary& s : summaries) {
      out << s.model << ",train," << fixed6(s.train.accuracy_mean) << ','
          << fixed6(s.train.accuracy_std) << ','
          << fixed6(s.train.seconds_mean) << ',' << fixed6(s.train.seconds_std)
          << ',' << fixed6(s.train_seconds_vs_teacher) << '\n';
      out << s.model << ",test," << fixed6(s.test.accuracy_mean) << ','
          << fixed6(s.test.accuracy_std) << ',' << fixed6(s.test.seconds_mean)
          << ',' << fixed6(s.test.seconds_std) << ','
          << fixed6(s.test_seconds_vs_teacher) << '\n';
    }
    if (!out) throw DataError("failed writing " + dir + "/summary.csv");
  }
  {
    std::ofstream out(dir + "/summary.txt", std::ios::binary);
    if (!out) throw DataError("cannot open " + dir + "/summary.txt");
    out << "Per-epoch means +- sample std over runs. seconds_vs_teacher is\n"
           "the model's mean epoch seconds divided by the teacher's on the\n"
           "same split and data; test seconds for clause-transform models\n"
           "include the teacher transform pass.\n\n";
    for (const ModelSummary& s : summaries) {
      out << s.model << "\n";
      out << "  train acc " << fixed6(s.train.accuracy_mean) << " +- "
          << fixed6(s.train.accuracy_std) << "  epoch "
          << fixed6(s.train.seconds_mean) << "s (x"
          << fixed6(s.train_seconds_vs_teacher) << " teacher)\n";
      out << "  test  acc " << fixed6(s.test.accuracy_mean) << " +- "
          << fixed6(s.test.accuracy_std) << "  epoch "
          << fixed6(s.test.seconds_mean) << "s (x"
          << fixed6(s.test_seconds_vs_teacher) << " teacher)\n";
    }
    if (!out) throw DataError("failed writing " + dir + "/summary.txt");
  }
}

}  // namespace tmkd
