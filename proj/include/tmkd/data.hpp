#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tmkd/bitmatrix.hpp"

namespace tmkd {

/// A ready-to-train boolean classification corpus.
struct Dataset {
  std::string name;
  BitMatrix train_x;
  std::vector<int> train_y;
  BitMatrix test_x;
  std::vector<int> test_y;
  int n_features = 0;
  int n_classes = 0;

  /// Throws DataError on mismatched shapes or out-of-range labels.
  void validate() const;
};

/// Raw grayscale images from an IDX file.
struct RawImages {
  int64_t count = 0;
  int rows = 0;
  int cols = 0;
  std::vector<uint8_t> pixels;  // count * rows * cols
};

/// Reads an IDX image file (magic 0x00000803, big-endian dimensions).
RawImages load_idx_images(const std::string& path);

/// Reads an IDX label file (magic 0x00000801).
std::vector<int> load_idx_labels(const std::string& path);

/// Reads a matching image/label pair; throws DataError when the counts
/// disagree.
std::pair<RawImages, std::vector<int>> load_idx(const std::string& images_path,
                                                const std::string& labels_path);

/// Thresholds grayscale images into bits: 1 iff pixel > threshold.
BitMatrix binarize(const RawImages& images, int threshold = 75);

/// Builds presence features from text. The vocabulary is the max_features
/// most document-frequent unigrams and bigrams of the training documents
/// (ties broken lexicographically); test rows reuse it unchanged. Tokens
/// are lowercased maximal alphanumeric runs; bigrams join adjacent tokens
/// with a space.
Dataset booleanize_text(const std::vector<std::string>& train_docs,
                        const std::vector<int>& train_labels,
                        const std::vector<std::string>& test_docs,
                        const std::vector<int>& test_labels,
                        int max_features);

/// Synthetic sanity corpus: every feature is an independent fair coin, the
/// label is feature0 XOR feature1 with its value flipped with probability
/// noise_rate, and the first 80% of samples form the training split.
Dataset synth_noisy_xor(int64_t n_samples, int n_features = 12,
                        double noise_rate = 0.1, uint64_t seed = 1);

/// One line per document.
std::vector<std::string> read_lines(const std::string& path);
/// One integer label per line.
std::vector<int> read_label_lines(const std::string& path);

}  // namespace tmkd
