#pragma once

#include <string>
#include <vector>

#include "tmkd/tm.hpp"

namespace tmkd {

/// Per-feature influence scores in [-1, 1]. A feature scores the weighted
/// count of clauses (all classes) that include its positive literal minus
/// those that include its negation, normalized by the largest magnitude.
struct ActivationMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // row-major, height * width

  int64_t nonzero_count() const;
};

/// height * width must equal the machine's feature count.
ActivationMap activation_map(const TsetlinMachine& tm, int height, int width);

/// Binary PPM (P6): positive scores on the green channel, negative on red.
void write_activation_ppm(const ActivationMap& map, const std::string& path);

/// Binary PGM (P5): absolute scores as gray levels.
void write_activation_pgm(const ActivationMap& map, const std::string& path);

}  // namespace tmkd
