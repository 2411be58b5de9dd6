#pragma once

#include <string>

#include "tmkd/tm.hpp"

namespace tmkd {

/// Model file layout (all integers little-endian):
///   offset 0   8 bytes  magic "TMKD0001" ("TMKD" + 4 version digits)
///          8   u32      n_clauses
///         12   u32      threshold
///         16   f64      specificity
///         24   f64      weight_lr
///         32   u32      n_features
///         36   u32      n_classes
///         40   u32      s_max      (must be <= 127 so states fit a byte)
///         44   u64      rng_seed
///         52   4 x u64  feedback generator state
///         84   4 x u64  orchestration generator state
///        116   payload: per class, per clause:
///                i8 polarity, f64 weight, 2*n_features u8 automaton states
void save_model(const TsetlinMachine& tm, const std::string& path);

/// Inverse of save_model. Distinct failures: missing file, bad magic,
/// unsupported version, truncated payload, out-of-range content.
TsetlinMachine load_model(const std::string& path);

}  // namespace tmkd
