#pragma once

#include <string>
#include <vector>

#include "tmkd/tm.hpp"

namespace tmkd {

/// Evaluates every teacher clause on every sample (inference mode). The
/// result has n_classes * n_clauses columns, class-major: column
/// cls * n_clauses + j holds clause j of class cls. When elapsed_seconds is
/// non-null it receives the wall-clock transform time.
BitMatrix clause_transform(const TsetlinMachine& teacher, const BitMatrix& x,
                           double* elapsed_seconds = nullptr);

/// Column subset chosen by firing frequency on a fitting split.
struct PcdProjection {
  std::vector<int> retained;  // ascending source column indices
  double delta = 0.0;
  int64_t source_width = 0;
  std::vector<double> train_frequencies;  // per source column, fitting split
};

/// Keeps the columns whose firing frequency p satisfies
/// delta <= ... strictly: drops p > 1 - delta and p < delta. Throws
/// DataError on an empty matrix, ConfigError on delta outside [0, 0.5).
PcdProjection fit_pcd_projection(const BitMatrix& clause_outputs,
                                 double delta);

/// Keeps only the retained columns, in ascending order. Throws
/// DimensionError when the width does not match the fitting split's.
BitMatrix apply_projection(const BitMatrix& m, const PcdProjection& proj);

/// Reporting-only size measure of a clause set over its literals:
/// (1/(n_literals*n_clauses)) * ln(1/(n_literals*n_clauses)).
double info_measure(int64_t n_literals, int64_t n_clauses);

/// Packed on-disk form of a clause-output matrix: magic "TMKDCOM1",
/// u32 rows, u32 width (little-endian), then each row packed LSB-first
/// into ceil(width/8) bytes.
void save_clause_matrix(const BitMatrix& m, const std::string& path);
BitMatrix load_clause_matrix(const std::string& path);

/// Projection round-trip as CSV: delta, source_width, then the retained
/// indices. Frequencies are not persisted; a loaded projection applies
/// exactly like the fitted one.
void save_projection_csv(const PcdProjection& proj, const std::string& path);
PcdProjection load_projection_csv(const std::string& path);

}  // namespace tmkd
