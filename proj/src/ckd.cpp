#include "tmkd/ckd.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tmkd {

namespace {

constexpr char kMatrixMagic[8] = {'T', 'M', 'K', 'D', 'C', 'O', 'M', '1'};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

BitMatrix clause_transform(const TsetlinMachine& teacher, const BitMatrix& x,
                           double* elapsed_seconds) {
  const TMParams& p = teacher.params();
  if (x.cols() != p.n_features)
    throw DimensionError("batch has " + std::to_string(x.cols()) +
                         " features, machine expects " +
                         std::to_string(p.n_features));
  const auto t0 = std::chrono::steady_clock::now();
  const BitMatrix lits = build_literal_matrix(x);
  BitMatrix out(x.rows(), static_cast<int64_t>(p.n_classes) * p.n_clauses);
  for (int64_t i = 0; i < x.rows(); ++i) {
    const auto row = lits.row(i);
    for (int cls = 0; cls < p.n_classes; ++cls) {
      const auto& clauses = teacher.banks()[cls].clauses;
      const int64_t base = static_cast<int64_t>(cls) * p.n_clauses;
      for (int j = 0; j < p.n_clauses; ++j)
        if (evaluate_clause(clauses[j], row, EvalMode::kInfer))
          out.set(i, base + j, true);
    }
  }
  if (elapsed_seconds) *elapsed_seconds = seconds_since(t0);
  return out;
}

PcdProjection fit_pcd_projection(const BitMatrix& clause_outputs,
                                 double delta) {
  if (!(delta >= 0.0 && delta < 0.5))
    throw ConfigError("delta must be in [0, 0.5), got " +
                      std::to_string(delta));
  if (clause_outputs.rows() == 0 || clause_outputs.cols() == 0)
    throw DataError("cannot fit a projection on an empty matrix");

  PcdProjection proj;
  proj.delta = delta;
  proj.source_width = clause_outputs.cols();
  proj.train_frequencies.resize(clause_outputs.cols());
  for (int64_t c = 0; c < clause_outputs.cols(); ++c) {
    int64_t ones = 0;
    for (int64_t r = 0; r < clause_outputs.rows(); ++r)
      if (clause_outputs.get(r, c)) ++ones;
    const double p = static_cast<double>(ones) / clause_outputs.rows();
    proj.train_frequencies[c] = p;
    if (p > 1.0 - delta || p < delta) continue;
    proj.retained.push_back(static_cast<int>(c));
  }
  return proj;
}

BitMatrix apply_projection(const BitMatrix& m, const PcdProjection& proj) {
  if (m.cols() != proj.source_width)
    throw DimensionError("matrix width " + std::to_string(m.cols()) +
                         " does not match projection source width " +
                         std::to_string(proj.source_width));
  BitMatrix out(m.rows(), static_cast<int64_t>(proj.retained.size()));
  for (int64_t r = 0; r < m.rows(); ++r)
    for (size_t k = 0; k < proj.retained.size(); ++k)
      if (m.get(r, proj.retained[k])) out.set(r, static_cast<int64_t>(k), true);
  return out;
}

double info_measure(int64_t n_literals, int64_t n_clauses) {
  if (n_literals < 1 || n_clauses < 1)
    throw ConfigError("info_measure needs positive literal and clause counts");
  const double x = static_cast<double>(n_literals) * n_clauses;
  return (1.0 / x) * std::log(1.0 / x);
}

void save_clause_matrix(const BitMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.write(kMatrixMagic, sizeof kMatrixMagic);
  const uint32_t rows = static_cast<uint32_t>(m.rows());
  const uint32_t width = static_cast<uint32_t>(m.cols());
  char header[8];
  for (int b = 0; b < 4; ++b) header[b] = char(rows >> (8 * b));
  for (int b = 0; b < 4; ++b) header[4 + b] = char(width >> (8 * b));
  out.write(header, sizeof header);

  const int64_t row_bytes = (m.cols() + 7) / 8;
  std::vector<char> packed(static_cast<size_t>(row_bytes));
  for (int64_t r = 0; r < m.rows(); ++r) {
    std::fill(packed.begin(), packed.end(), 0);
    for (int64_t c = 0; c < m.cols(); ++c)
      if (m.get(r, c)) packed[c >> 3] |= char(1 << (c & 7));
    out.write(packed.data(), row_bytes);
  }
  if (!out) throw DataError("failed writing " + path);
}

BitMatrix load_clause_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof magic))
    throw DataError("truncated clause matrix file " + path);
  if (std::memcmp(magic, kMatrixMagic, sizeof magic) != 0)
    throw DataError("bad magic in clause matrix file " + path);
  char header[8];
  if (!in.read(header, sizeof header))
    throw DataError("truncated clause matrix file " + path);
  uint32_t rows = 0, width = 0;
  for (int b = 0; b < 4; ++b) rows |= uint32_t(uint8_t(header[b])) << (8 * b);
  for (int b = 0; b < 4; ++b)
    width |= uint32_t(uint8_t(header[4 + b])) << (8 * b);

  BitMatrix m(rows, width);
  const int64_t row_bytes = (static_cast<int64_t>(width) + 7) / 8;
  std::vector<char> packed(static_cast<size_t>(row_bytes));
  for (uint32_t r = 0; r < rows; ++r) {
    if (!in.read(packed.data(), row_bytes))
      throw DataError("truncated clause matrix file " + path);
    for (uint32_t c = 0; c < width; ++c)
      if ((packed[c >> 3] >> (c & 7)) & 1) m.set(r, c, true);
  }
  return m;
}

void save_projection_csv(const PcdProjection& proj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", proj.delta);
  out << "delta," << buf << '\n';
  out << "source_width," << proj.source_width << '\n';
  out << "retained";
  for (int c : proj.retained) out << ',' << c;
  out << '\n';
  if (!out) throw DataError("failed writing " + path);
}

PcdProjection load_projection_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  PcdProjection proj;
  std::string line;
  bool have_delta = false, have_width = false, have_retained = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string key;
    std::getline(ss, key, ',');
    try {
      if (key == "delta") {
        std::string v;
        std::getline(ss, v, ',');
        proj.delta = std::stod(v);
        have_delta = true;
      } else if (key == "source_width") {
        std::string v;
        std::getline(ss, v, ',');
        proj.source_width = std::stoll(v);
        have_width = true;
      } else if (key == "retained") {
        std::string v;
        while (std::getline(ss, v, ','))
          proj.retained.push_back(std::stoi(v));
        have_retained = true;
      } else {
        throw DataError("unknown projection field '" + key + "' in " + path);
      }
    } catch (const DataError&) {
      throw;
    } catch (const std::exception&) {
      throw DataError("bad projection value in " + path);
    }
  }
  if (!have_delta || !have_width || !have_retained)
    throw DataError("incomplete projection file " + path);
  for (int c : proj.retained)
    if (c < 0 || c >= proj.source_width)
      throw DataError("retained index out of range in " + path);
  return proj;
}

}  // namespace tmkd
