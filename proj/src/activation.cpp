#include "tmkd/activation.hpp"

#include <cmath>
#include <fstream>

namespace tmkd {

int64_t ActivationMap::nonzero_count() const {
  int64_t count = 0;
  for (double v : values)
    if (v != 0.0) ++count;
  return count;
}

ActivationMap activation_map(const TsetlinMachine& tm, int height, int width) {
  const TMParams& p = tm.params();
  if (height < 1 || width < 1 ||
      static_cast<int64_t>(height) * width != p.n_features)
    throw DimensionError("map shape " + std::to_string(height) + "x" +
                         std::to_string(width) + " does not cover " +
                         std::to_string(p.n_features) + " features");

  ActivationMap map;
  map.height = height;
  map.width = width;
  map.values.assign(static_cast<size_t>(p.n_features), 0.0);

  for (const ClauseBank& bank : tm.banks()) {
    for (const Clause& c : bank.clauses) {
      for (int f = 0; f < p.n_features; ++f) {
        const bool pos = (c.include[f >> 6] >> (f & 63)) & 1u;
        const int neg_bit = f + p.n_features;
        const bool neg = (c.include[neg_bit >> 6] >> (neg_bit & 63)) & 1u;
        if (pos) map.values[f] += c.weight;
        if (neg) map.values[f] -= c.weight;
      }
    }
  }

  double peak = 0.0;
  for (double v : map.values) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : map.values) v /= peak;
  return map;
}

void write_activation_ppm(const ActivationMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "P6\n" << map.width << ' ' << map.height << "\n255\n";
  for (double v : map.values) {
    const uint8_t green =
        static_cast<uint8_t>(std::lround(255.0 * std::max(v, 0.0)));
    const uint8_t red =
        static_cast<uint8_t>(std::lround(255.0 * std::max(-v, 0.0)));
    const char rgb[3] = {char(red), char(green), 0};
    out.write(rgb, 3);
  }
  if (!out) throw DataError("failed writing " + path);
}

void write_activation_pgm(const ActivationMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "P5\n" << map.width << ' ' << map.height << "\n255\n";
  for (double v : map.values) {
    const char gray =
        char(static_cast<uint8_t>(std::lround(255.0 * std::abs(v))));
    out.write(&gray, 1);
  }
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace tmkd
