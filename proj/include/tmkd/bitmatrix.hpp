#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tmkd/errors.hpp"

namespace tmkd {

/// Row-major packed bit matrix. Bit j of a row lives in word j/64 at bit
/// position j%64. Trailing bits of the last word of each row are zero.
class BitMatrix {
 public:
  BitMatrix() = default;

  BitMatrix(int64_t rows, int64_t cols)
      : rows_(rows),
        cols_(cols),
        words_per_row_((cols + 63) / 64),
        bits_(static_cast<size_t>(rows * words_per_row_), 0) {
    if (rows < 0 || cols < 0) throw DimensionError("negative matrix shape");
  }

  int64_t rows() const { return rows_; }
  int64_t cols() const { return cols_; }
  int64_t words_per_row() const { return words_per_row_; }

  bool get(int64_t r, int64_t c) const {
    return (word(r, c) >> (c & 63)) & 1u;
  }

  void set(int64_t r, int64_t c, bool v) {
    uint64_t& w = word(r, c);
    const uint64_t mask = uint64_t{1} << (c & 63);
    w = v ? (w | mask) : (w & ~mask);
  }

  std::span<const uint64_t> row(int64_t r) const {
    return {bits_.data() + r * words_per_row_,
            static_cast<size_t>(words_per_row_)};
  }

  std::span<uint64_t> row(int64_t r) {
    return {bits_.data() + r * words_per_row_,
            static_cast<size_t>(words_per_row_)};
  }

  bool operator==(const BitMatrix&) const = default;

 private:
  uint64_t& word(int64_t r, int64_t c) {
    return bits_[static_cast<size_t>(r * words_per_row_ + (c >> 6))];
  }
  const uint64_t& word(int64_t r, int64_t c) const {
    return bits_[static_cast<size_t>(r * words_per_row_ + (c >> 6))];
  }

  int64_t rows_ = 0;
  int64_t cols_ = 0;
  int64_t words_per_row_ = 0;
  std::vector<uint64_t> bits_;
};

}  // namespace tmkd
