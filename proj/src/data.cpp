#include "tmkd/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tmkd/rng.hpp"

namespace tmkd {

namespace {

uint32_t read_u32_be(std::istream& in, const std::string& path) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4))
    throw DataError("truncated idx file " + path);
  return (uint32_t(bytes[0]) << 24) | (uint32_t(bytes[1]) << 16) |
         (uint32_t(bytes[2]) << 8) | uint32_t(bytes[3]);
}

std::vector<std::string> tokenize(const std::string& doc) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char ch : doc) {
    if (std::isalnum(ch)) {
      current.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::set<std::string> doc_terms(const std::string& doc) {
  const std::vector<std::string> tokens = tokenize(doc);
  std::set<std::string> terms(tokens.begin(), tokens.end());
  for (size_t i = 0; i + 1 < tokens.size(); ++i)
    terms.insert(tokens[i] + " " + tokens[i + 1]);
  return terms;
}

int infer_n_classes(const std::vector<int>& a, const std::vector<int>& b) {
  int top = -1;
  for (int v : a) top = std::max(top, v);
  for (int v : b) top = std::max(top, v);
  return top + 1;
}

}  // namespace

void Dataset::validate() const {
  if (train_x.cols() != n_features || test_x.cols() != n_features)
    throw DataError("dataset " + name + ": split widths disagree");
  if (train_x.rows() != static_cast<int64_t>(train_y.size()) ||
      test_x.rows() != static_cast<int64_t>(test_y.size()))
    throw DataError("dataset " + name + ": sample/label counts disagree");
  if (n_classes < 2) throw DataError("dataset " + name + ": needs >= 2 classes");
  if (n_features < 1)
    throw DataError("dataset " + name + ": needs >= 1 feature");
  for (int v : train_y)
    if (v < 0 || v >= n_classes)
      throw DataError("dataset " + name + ": train label out of range");
  for (int v : test_y)
    if (v < 0 || v >= n_classes)
      throw DataError("dataset " + name + ": test label out of range");
}

RawImages load_idx_images(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  const uint32_t magic = read_u32_be(in, path);
  if (magic != 0x00000803)
    throw DataError("bad magic in idx image file " + path);
  RawImages images;
  images.count = read_u32_be(in, path);
  images.rows = static_cast<int>(read_u32_be(in, path));
  images.cols = static_cast<int>(read_u32_be(in, path));
  const size_t total = static_cast<size_t>(images.count) *
                       static_cast<size_t>(images.rows) *
                       static_cast<size_t>(images.cols);
  images.pixels.resize(total);
  if (!in.read(reinterpret_cast<char*>(images.pixels.data()),
               static_cast<std::streamsize>(total)))
    throw DataError("truncated idx file " + path);
  return images;
}

std::vector<int> load_idx_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  const uint32_t magic = read_u32_be(in, path);
  if (magic != 0x00000801)
    throw DataError("bad magic in idx label file " + path);
  const uint32_t count = read_u32_be(in, path);
  std::vector<uint8_t> raw(count);
  if (count &&
      !in.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(count)))
    throw DataError("truncated idx file " + path);
  return {raw.begin(), raw.end()};
}

std::pair<RawImages, std::vector<int>> load_idx(
    const std::string& images_path, const std::string& labels_path) {
  RawImages images = load_idx_images(images_path);
  std::vector<int> labels = load_idx_labels(labels_path);
  if (images.count != static_cast<int64_t>(labels.size()))
    throw DataError("count mismatch: " + std::to_string(images.count) +
                    " images vs " + std::to_string(labels.size()) +
                    " labels");
  return {std::move(images), std::move(labels)};
}

BitMatrix binarize(const RawImages& images, int threshold) {
  const int64_t width = static_cast<int64_t>(images.rows) * images.cols;
  BitMatrix out(images.count, width);
  for (int64_t i = 0; i < images.count; ++i)
    for (int64_t k = 0; k < width; ++k)
      if (images.pixels[static_cast<size_t>(i * width + k)] > threshold)
        out.set(i, k, true);
  return out;
}

Dataset booleanize_text(const std::vector<std::string>& train_docs,
                        const std::vector<int>& train_labels,
                        const std::vector<std::string>& test_docs,
                        const std::vector<int>& test_labels,
                        int max_features) {
  if (max_features < 1) throw ConfigError("max_features must be >= 1");
  if (train_docs.size() != train_labels.size() ||
      test_docs.size() != test_labels.size())
    throw DataError("document/label counts disagree");
  if (train_docs.empty()) throw DataError("empty training corpus");

  std::vector<std::set<std::string>> train_terms;
  train_terms.reserve(train_docs.size());
  std::map<std::string, int64_t> document_frequency;
  for (const std::string& doc : train_docs) {
    train_terms.push_back(doc_terms(doc));
    for (const std::string& term : train_terms.back())
      ++document_frequency[term];
  }
  if (document_frequency.empty())
    throw DataError("training corpus has no tokens");

  std::vector<std::pair<std::string, int64_t>> ranked(
      document_frequency.begin(), document_frequency.end());
  // Map iteration is already lexicographic, so a stable sort on frequency
  // keeps the tie order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](auto& a, auto& b) { return a.second > b.second; });
  const int n_features =
      std::min<int>(max_features, static_cast<int>(ranked.size()));

  std::map<std::string, int> vocabulary;
  for (int k = 0; k < n_features; ++k) vocabulary[ranked[k].first] = k;

  const auto encode = [&](const std::vector<std::string>& docs,
                          const std::vector<std::set<std::string>>* cached) {
    BitMatrix m(static_cast<int64_t>(docs.size()), n_features);
    for (size_t i = 0; i < docs.size(); ++i) {
      const std::set<std::string> terms =
          cached ? (*cached)[i] : doc_terms(docs[i]);
      for (const std::string& term : terms) {
        const auto it = vocabulary.find(term);
        if (it != vocabulary.end()) m.set(static_cast<int64_t>(i), it->second, true);
      }
    }
    return m;
  };

  Dataset ds;
  ds.name = "text";
  ds.train_x = encode(train_docs, &train_terms);
  ds.train_y = train_labels;
  ds.test_x = encode(test_docs, nullptr);
  ds.test_y = test_labels;
  ds.n_features = n_features;
  ds.n_classes = infer_n_classes(train_labels, test_labels);
  ds.validate();
  return ds;
}

Dataset synth_noisy_xor(int64_t n_samples, int n_features, double noise_rate,
                        uint64_t seed) {
  if (n_samples < 2) throw ConfigError("need at least 2 samples");
  if (n_features < 2) throw ConfigError("need at least 2 features");
  if (!(noise_rate >= 0.0 && noise_rate < 0.5))
    throw ConfigError("noise_rate must be in [0, 0.5)");

  Rng rng(seed);
  BitMatrix x(n_samples, n_features);
  std::vector<int> y(static_cast<size_t>(n_samples));
  for (int64_t i = 0; i < n_samples; ++i) {
    for (int k = 0; k < n_features; ++k)
      if (rng.bernoulli(0.5)) x.set(i, k, true);
    int label = int(x.get(i, 0)) ^ int(x.get(i, 1));
    if (rng.bernoulli(noise_rate)) label ^= 1;
    y[static_cast<size_t>(i)] = label;
  }

  const int64_t n_train = n_samples * 4 / 5;
  Dataset ds;
  ds.name = "noisy_xor";
  ds.n_features = n_features;
  ds.n_classes = 2;
  ds.train_x = BitMatrix(n_train, n_features);
  ds.test_x = BitMatrix(n_samples - n_train, n_features);
  for (int64_t i = 0; i < n_samples; ++i) {
    BitMatrix& dst = i < n_train ? ds.train_x : ds.test_x;
    const int64_t r = i < n_train ? i : i - n_train;
    for (int k = 0; k < n_features; ++k) dst.set(r, k, x.get(i, k));
    (i < n_train ? ds.train_y : ds.test_y)
        .push_back(y[static_cast<size_t>(i)]);
  }
  ds.validate();
  return ds;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<int> read_label_lines(const std::string& path) {
  std::vector<int> labels;
  for (const std::string& line : read_lines(path)) {
    if (line.empty()) continue;
    try {
      size_t used = 0;
      const int v = std::stoi(line, &used);
      if (used != line.size()) throw std::invalid_argument(line);
      labels.push_back(v);
    } catch (const std::exception&) {
      throw DataError("bad label '" + line + "' in " + path);
    }
  }
  return labels;
}

}  // namespace tmkd
