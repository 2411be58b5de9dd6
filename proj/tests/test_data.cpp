#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tmkd/data.hpp"

namespace {

void put_be32(std::string& out, uint32_t v) {
  out.push_back(char(v >> 24));
  out.push_back(char(v >> 16));
  out.push_back(char(v >> 8));
  out.push_back(char(v));
}

std::string idx_images(const std::vector<std::vector<uint8_t>>& images,
                       int rows, int cols) {
  std::string out;
  put_be32(out, 0x00000803);
  put_be32(out, static_cast<uint32_t>(images.size()));
  put_be32(out, static_cast<uint32_t>(rows));
  put_be32(out, static_cast<uint32_t>(cols));
  for (const auto& img : images)
    out.append(reinterpret_cast<const char*>(img.data()), img.size());
  return out;
}

std::string idx_labels(const std::vector<uint8_t>& labels) {
  std::string out;
  put_be32(out, 0x00000801);
  put_be32(out, static_cast<uint32_t>(labels.size()));
  out.append(reinterpret_cast<const char*>(labels.data()), labels.size());
  return out;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

}  // namespace

TEST_CASE("idx image and label pairs load back verbatim") {
  const std::vector<std::vector<uint8_t>> images{
      {0, 75, 76, 255, 10, 200}, {1, 2, 3, 4, 5, 6}};
  write_file("t_images.idx", idx_images(images, 2, 3));
  write_file("t_labels.idx", idx_labels({7, 2}));

  const auto [raw, labels] = tmkd::load_idx("t_images.idx", "t_labels.idx");
  CHECK(raw.count == 2);
  CHECK(raw.rows == 2);
  CHECK(raw.cols == 3);
  CHECK(raw.pixels == std::vector<uint8_t>{0, 75, 76, 255, 10, 200,
                                           1, 2, 3, 4, 5, 6});
  CHECK(labels == std::vector<int>{7, 2});

  std::filesystem::remove("t_images.idx");
  std::filesystem::remove("t_labels.idx");
}

TEST_CASE("idx loaders reject damaged files with distinct reasons") {
  using Catch = tmkd::DataError;

  write_file("t_bad.idx", std::string("\x00\x00\x08\x04rest", 8));
  CHECK_THROWS_WITH_AS(tmkd::load_idx_images("t_bad.idx"),
                       doctest::Contains("bad magic"), Catch);

  write_file("t_bad.idx", idx_images({{1, 2, 3, 4}}, 2, 2).substr(0, 18));
  CHECK_THROWS_WITH_AS(tmkd::load_idx_images("t_bad.idx"),
                       doctest::Contains("truncated"), Catch);

  write_file("t_bad.idx", std::string("\x00\x00", 2));
  CHECK_THROWS_WITH_AS(tmkd::load_idx_images("t_bad.idx"),
                       doctest::Contains("truncated"), Catch);

  write_file("t_bad.idx", idx_images({{1, 2, 3, 4}}, 2, 2));
  CHECK_THROWS_WITH_AS(tmkd::load_idx_labels("t_bad.idx"),
                       doctest::Contains("bad magic"), Catch);

  CHECK_THROWS_AS(tmkd::load_idx_images("missing.idx"), Catch);

  // Counts that disagree between the two files.
  write_file("t_images.idx", idx_images({{1, 2, 3, 4}}, 2, 2));
  write_file("t_labels.idx", idx_labels({1, 0}));
  CHECK_THROWS_WITH_AS(tmkd::load_idx("t_images.idx", "t_labels.idx"),
                       doctest::Contains("count mismatch"), Catch);

  std::filesystem::remove("t_bad.idx");
  std::filesystem::remove("t_images.idx");
  std::filesystem::remove("t_labels.idx");
}

TEST_CASE("binarization keeps only pixels above the threshold") {
  tmkd::RawImages raw;
  raw.count = 1;
  raw.rows = 1;
  raw.cols = 4;
  raw.pixels = {0, 75, 76, 255};

  const tmkd::BitMatrix bits = tmkd::binarize(raw, 75);
  CHECK_FALSE(bits.get(0, 0));
  CHECK_FALSE(bits.get(0, 1));  // exactly at the threshold maps to 0
  CHECK(bits.get(0, 2));
  CHECK(bits.get(0, 3));

  const tmkd::BitMatrix none = tmkd::binarize(raw, 255);
  for (int k = 0; k < 4; ++k) CHECK_FALSE(none.get(0, k));
}

TEST_CASE("binarization is stable on already-binary images") {
  tmkd::RawImages raw;
  raw.count = 2;
  raw.rows = 1;
  raw.cols = 3;
  raw.pixels = {0, 255, 0, 255, 255, 0};

  const tmkd::BitMatrix once = tmkd::binarize(raw, 0);
  tmkd::RawImages back;
  back.count = 2;
  back.rows = 1;
  back.cols = 3;
  for (int64_t i = 0; i < 2; ++i)
    for (int64_t k = 0; k < 3; ++k)
      back.pixels.push_back(once.get(i, k) ? 255 : 0);

  CHECK(tmkd::binarize(back, 0) == once);
}

TEST_CASE("text booleanization ranks terms by document frequency") {
  // Terms: movie appears in both documents, everything else in one.
  // Frequency ties resolve lexicographically, so the top four are
  // movie, bad, "bad movie", good.
  const tmkd::Dataset ds = tmkd::booleanize_text(
      {"good movie", "bad movie"}, {1, 0}, {"excellent movie"}, {1}, 4);

  CHECK(ds.n_features == 4);
  CHECK(ds.n_classes == 2);

  // "good movie": the unigrams made the cut, its bigram did not.
  int row0 = 0, row1 = 0;
  for (int k = 0; k < 4; ++k) {
    row0 += ds.train_x.get(0, k);
    row1 += ds.train_x.get(1, k);
  }
  CHECK(row0 == 2);  // movie, good
  CHECK(row1 == 3);  // movie, bad, "bad movie"

  // The only shared feature is "movie".
  int shared = 0;
  for (int k = 0; k < 4; ++k)
    if (ds.train_x.get(0, k) && ds.train_x.get(1, k)) ++shared;
  CHECK(shared == 1);

  // Unseen test terms contribute nothing: only "movie" fires.
  int test_bits = 0;
  for (int k = 0; k < 4; ++k) test_bits += ds.test_x.get(0, k);
  CHECK(test_bits == 1);
}

TEST_CASE("a generous feature budget keeps the whole vocabulary") {
  const tmkd::Dataset ds = tmkd::booleanize_text(
      {"good movie", "bad movie"}, {1, 0}, {}, {}, 100);
  // movie, good, bad, "good movie", "bad movie"
  CHECK(ds.n_features == 5);
  int row0 = 0;
  for (int k = 0; k < 5; ++k) row0 += ds.train_x.get(0, k);
  CHECK(row0 == 3);  // every term of the document is in the vocabulary
}

TEST_CASE("text booleanization rejects degenerate corpora") {
  CHECK_THROWS_AS(tmkd::booleanize_text({}, {}, {}, {}, 10),
                  tmkd::DataError);
  CHECK_THROWS_AS(tmkd::booleanize_text({"..."}, {0}, {}, {}, 10),
                  tmkd::DataError);
  CHECK_THROWS_AS(tmkd::booleanize_text({"a b"}, {0, 1}, {}, {}, 10),
                  tmkd::DataError);
  CHECK_THROWS_AS(tmkd::booleanize_text({"a b"}, {0}, {}, {}, 0),
                  tmkd::ConfigError);
}

TEST_CASE("tokenization lowercases and splits on non-alphanumerics") {
  const tmkd::Dataset ds = tmkd::booleanize_text(
      {"GOOD, movie!!", "good movie"}, {1, 1}, {}, {}, 100);
  // Both documents produce identical term sets, so identical rows.
  for (int k = 0; k < ds.n_features; ++k)
    CHECK(ds.train_x.get(0, k) == ds.train_x.get(1, k));
}

TEST_CASE("the synthetic corpus is a noisy exclusive-or") {
  const tmkd::Dataset ds = tmkd::synth_noisy_xor(1000, 6, 0.0, 99);
  CHECK(ds.train_x.rows() == 800);
  CHECK(ds.test_x.rows() == 200);
  CHECK(ds.n_features == 6);
  CHECK(ds.n_classes == 2);

  for (int64_t i = 0; i < ds.train_x.rows(); ++i)
    CHECK(ds.train_y[static_cast<size_t>(i)] ==
          (int(ds.train_x.get(i, 0)) ^ int(ds.train_x.get(i, 1))));
  for (int64_t i = 0; i < ds.test_x.rows(); ++i)
    CHECK(ds.test_y[static_cast<size_t>(i)] ==
          (int(ds.test_x.get(i, 0)) ^ int(ds.test_x.get(i, 1))));
}

TEST_CASE("label noise hits at the configured rate") {
  const tmkd::Dataset ds = tmkd::synth_noisy_xor(10000, 4, 0.1, 7);
  int64_t flips = 0;
  int64_t total = 0;
  const auto count = [&](const tmkd::BitMatrix& x, const std::vector<int>& y) {
    for (int64_t i = 0; i < x.rows(); ++i) {
      const int clean = int(x.get(i, 0)) ^ int(x.get(i, 1));
      if (y[static_cast<size_t>(i)] != clean) ++flips;
      ++total;
    }
  };
  count(ds.train_x, ds.train_y);
  count(ds.test_x, ds.test_y);
  // The noiseless rule is the Bayes-optimal classifier; its accuracy is
  // 1 - noise_rate up to sampling error.
  const double rate = static_cast<double>(flips) / total;
  CHECK(rate == doctest::Approx(0.1).epsilon(0.2));
  CHECK(1.0 - rate > 0.88);
  CHECK(1.0 - rate < 0.92);
}

TEST_CASE("equal seeds rebuild the identical corpus") {
  const tmkd::Dataset a = tmkd::synth_noisy_xor(500, 5, 0.2, 31);
  const tmkd::Dataset b = tmkd::synth_noisy_xor(500, 5, 0.2, 31);
  CHECK(a.train_x == b.train_x);
  CHECK(a.test_x == b.test_x);
  CHECK(a.train_y == b.train_y);
  CHECK(a.test_y == b.test_y);

  const tmkd::Dataset c = tmkd::synth_noisy_xor(500, 5, 0.2, 32);
  CHECK(a.train_x != c.train_x);
}

TEST_CASE("the synthetic generator validates its arguments") {
  CHECK_THROWS_AS(tmkd::synth_noisy_xor(1, 4, 0.1, 1), tmkd::ConfigError);
  CHECK_THROWS_AS(tmkd::synth_noisy_xor(100, 1, 0.1, 1), tmkd::ConfigError);
  CHECK_THROWS_AS(tmkd::synth_noisy_xor(100, 4, 0.5, 1), tmkd::ConfigError);
  CHECK_THROWS_AS(tmkd::synth_noisy_xor(100, 4, -0.1, 1), tmkd::ConfigError);
}

TEST_CASE("line readers strip carriage returns and validate labels") {
  write_file("t_lines.txt", "first doc\r\nsecond doc\nthird\n");
  const auto lines = tmkd::read_lines("t_lines.txt");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "first doc");
  CHECK(lines[1] == "second doc");

  write_file("t_labels.txt", "0\n1\r\n2\n");
  CHECK(tmkd::read_label_lines("t_labels.txt") == std::vector<int>{0, 1, 2});

  write_file("t_labels.txt", "0\nnope\n");
  CHECK_THROWS_AS(tmkd::read_label_lines("t_labels.txt"), tmkd::DataError);

  CHECK_THROWS_AS(tmkd::read_lines("missing.txt"), tmkd::DataError);

  std::filesystem::remove("t_lines.txt");
  std::filesystem::remove("t_labels.txt");
}

TEST_CASE("dataset validation catches inconsistencies") {
  tmkd::Dataset ds = tmkd::synth_noisy_xor(100, 4, 0.1, 1);
  CHECK_NOTHROW(ds.validate());

  tmkd::Dataset bad = ds;
  bad.train_y.push_back(0);
  CHECK_THROWS_AS(bad.validate(), tmkd::DataError);

  bad = ds;
  bad.train_y[0] = 5;
  CHECK_THROWS_AS(bad.validate(), tmkd::DataError);

  bad = ds;
  bad.n_features = 3;
  CHECK_THROWS_AS(bad.validate(), tmkd::DataError);
}
