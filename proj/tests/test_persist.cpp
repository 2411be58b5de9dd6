#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "tmkd/data.hpp"
#include "tmkd/persist.hpp"
#include "tmkd/tm.hpp"

namespace {

tmkd::TMParams persist_params(uint64_t seed) {
  tmkd::TMParams p;
  p.n_clauses = 8;
  p.threshold = 10;
  p.specificity = 3.9;
  p.weight_lr = 0.1;
  p.n_features = 6;
  p.n_classes = 2;
  p.s_max = 127;
  p.rng_seed = seed;
  return p;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

tmkd::TsetlinMachine trained_machine(uint64_t seed, int epochs = 3) {
  const tmkd::Dataset ds = tmkd::synth_noisy_xor(200, 6, 0.1, 5);
  tmkd::TsetlinMachine tm(persist_params(seed));
  tmkd::fit_standard(tm, ds.train_x, ds.train_y, epochs);
  return tm;
}

}  // namespace

TEST_CASE("a model file reloads to the identical machine") {
  const tmkd::TsetlinMachine tm = trained_machine(77);
  tmkd::save_model(tm, "t_model.bin");
  const tmkd::TsetlinMachine back = tmkd::load_model("t_model.bin");

  // Re-saving the loaded machine reproduces the file byte for byte, which
  // covers parameters, both generator states, polarities, weights and
  // automaton states at full precision.
  tmkd::save_model(back, "t_model2.bin");
  CHECK(read_bytes("t_model.bin") == read_bytes("t_model2.bin"));

  // Behavioural check on every input of the 6-feature space.
  for (uint32_t mask = 0; mask < (1u << 6); ++mask) {
    tmkd::BitSample x(6);
    for (int k = 0; k < 6; ++k) x[k] = (mask >> k) & 1;
    CHECK(tm.predict(x) == back.predict(x));
  }

  std::filesystem::remove("t_model.bin");
  std::filesystem::remove("t_model2.bin");
}

TEST_CASE("training resumed from a checkpoint matches an unbroken run") {
  const tmkd::Dataset ds = tmkd::synth_noisy_xor(200, 6, 0.1, 5);

  tmkd::TsetlinMachine continuous(persist_params(123));
  tmkd::fit_standard(continuous, ds.train_x, ds.train_y, 6);

  tmkd::TsetlinMachine first_half(persist_params(123));
  tmkd::fit_standard(first_half, ds.train_x, ds.train_y, 3);
  tmkd::save_model(first_half, "t_ckpt.bin");
  tmkd::TsetlinMachine resumed = tmkd::load_model("t_ckpt.bin");
  tmkd::fit_standard(resumed, ds.train_x, ds.train_y, 3);

  tmkd::save_model(continuous, "t_cont.bin");
  tmkd::save_model(resumed, "t_resumed.bin");
  CHECK(read_bytes("t_cont.bin") == read_bytes("t_resumed.bin"));

  std::filesystem::remove("t_ckpt.bin");
  std::filesystem::remove("t_cont.bin");
  std::filesystem::remove("t_resumed.bin");
}

TEST_CASE("models whose states cannot fit a byte refuse to save") {
  tmkd::TMParams p = persist_params(9);
  p.s_max = 128;
  const tmkd::TsetlinMachine tm(p);
  CHECK_THROWS_WITH_AS(tmkd::save_model(tm, "t_never.bin"),
                       doctest::Contains("s_max overflow"), tmkd::DataError);
  CHECK_FALSE(std::filesystem::exists("t_never.bin"));
}

TEST_CASE("damaged model files fail with distinct reasons") {
  const tmkd::TsetlinMachine tm = trained_machine(55);
  tmkd::save_model(tm, "t_base.bin");
  const std::string good = read_bytes("t_base.bin");

  CHECK_THROWS_WITH_AS(tmkd::load_model("t_absent.bin"),
                       doctest::Contains("cannot open"), tmkd::DataError);

  std::string bad = good;
  bad[0] = 'X';
  write_bytes("t_bad.bin", bad);
  CHECK_THROWS_WITH_AS(tmkd::load_model("t_bad.bin"),
                       doctest::Contains("bad magic"), tmkd::DataError);

  bad = good;
  bad[7] = '2';  // claims format version 0002
  write_bytes("t_bad.bin", bad);
  CHECK_THROWS_WITH_AS(tmkd::load_model("t_bad.bin"),
                       doctest::Contains("unsupported"), tmkd::DataError);

  write_bytes("t_bad.bin", good.substr(0, good.size() - 5));
  CHECK_THROWS_WITH_AS(tmkd::load_model("t_bad.bin"),
                       doctest::Contains("truncated"), tmkd::DataError);

  write_bytes("t_bad.bin", good.substr(0, 20));
  CHECK_THROWS_WITH_AS(tmkd::load_model("t_bad.bin"),
                       doctest::Contains("truncated"), tmkd::DataError);

  std::filesystem::remove("t_base.bin");
  std::filesystem::remove("t_bad.bin");
}

TEST_CASE("corrupted header fields are rejected before the payload") {
  const tmkd::TsetlinMachine tm = trained_machine(56);
  tmkd::save_model(tm, "t_base.bin");
  const std::string good = read_bytes("t_base.bin");

  // n_classes lives at offset 36; zero classes is not a valid machine.
  std::string bad = good;
  bad[36] = 0;
  write_bytes("t_bad.bin", bad);
  CHECK_THROWS_WITH_AS(tmkd::load_model("t_bad.bin"),
                       doctest::Contains("header invalid"), tmkd::DataError);

  // s_max lives at offset 40; 200 passes parameter validation but the file
  // format cannot have stored such states faithfully.
  bad = good;
  bad[40] = char(200);
  write_bytes("t_bad.bin", bad);
  CHECK_THROWS_WITH_AS(tmkd::load_model("t_bad.bin"),
                       doctest::Contains("s_max overflow"), tmkd::DataError);

  std::filesystem::remove("t_base.bin");
  std::filesystem::remove("t_bad.bin");
}

TEST_CASE("out-of-range payload content is rejected") {
  const tmkd::TsetlinMachine tm = trained_machine(57);
  tmkd::save_model(tm, "t_base.bin");
  std::string bad = read_bytes("t_base.bin");

  // First automaton state byte of the first clause: after the payload
  // offset 116 come 1 polarity byte and 8 weight bytes.
  bad[125] = 0;  // automaton states are 1-based
  write_bytes("t_bad.bin", bad);
  CHECK_THROWS_AS(tmkd::load_model("t_bad.bin"), tmkd::DataError);

  std::filesystem::remove("t_base.bin");
  std::filesystem::remove("t_bad.bin");
}
