#pragma once

#include <stdexcept>

namespace tmkd {

/// Invalid configuration or parameters. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable or inconsistent data / model files. CLI exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operands whose shapes do not line up (feature width, row counts, ...).
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tmkd
