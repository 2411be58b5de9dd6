#include "tmkd/persist.hpp"

#include <cstring>
#include <fstream>

namespace tmkd {

namespace {

constexpr char kMagicPrefix[4] = {'T', 'M', 'K', 'D'};
constexpr char kMagicVersion[4] = {'0', '0', '0', '1'};

void put_u32(std::string& out, uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(char(v >> (8 * b)));
}

void put_u64(std::string& out, uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(char(v >> (8 * b)));
}

void put_f64(std::string& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

class Reader {
 public:
  Reader(std::istream& in, std::string path)
      : in_(in), path_(std::move(path)) {}

  void bytes(char* dst, size_t n) {
    if (!in_.read(dst, static_cast<std::streamsize>(n)))
      throw DataError("truncated model file " + path_);
  }
  uint32_t u32() {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
           uint32_t(b[3]) << 24;
  }
  uint64_t u64() {
    uint64_t v = 0;
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8);
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
  }
  double f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }

 private:
  std::istream& in_;
  std::string path_;
};

}  // namespace

void save_model(const TsetlinMachine& tm, const std::string& path) {
  const TMParams& p = tm.params();
  if (p.s_max > 127)
    throw DataError("s_max overflow: " + std::to_string(p.s_max) +
                    " exceeds the model file limit of 127");

  std::string out;
  out.reserve(116 + static_cast<size_t>(p.n_classes) * p.n_clauses *
                        (9 + 2 * static_cast<size_t>(p.n_features)));
  out.append(kMagicPrefix, 4);
  out.append(kMagicVersion, 4);
  put_u32(out, static_cast<uint32_t>(p.n_clauses));
  put_u32(out, static_cast<uint32_t>(p.threshold));
  put_f64(out, p.specificity);
  put_f64(out, p.weight_lr);
  put_u32(out, static_cast<uint32_t>(p.n_features));
  put_u32(out, static_cast<uint32_t>(p.n_classes));
  put_u32(out, static_cast<uint32_t>(p.s_max));
  put_u64(out, p.rng_seed);
  for (uint64_t w : tm.feedback_rng().state()) put_u64(out, w);
  for (uint64_t w : tm.orch_rng().state()) put_u64(out, w);

  for (const ClauseBank& bank : tm.banks()) {
    for (const Clause& c : bank.clauses) {
      out.push_back(char(c.polarity));
      put_f64(out, c.weight);
      for (uint16_t st : c.states) out.push_back(char(uint8_t(st)));
    }
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open " + path + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw DataError("failed writing " + path);
}

TsetlinMachine load_model(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open " + path);
  Reader in(file, path);

  char magic[8];
  in.bytes(magic, 8);
  if (std::memcmp(magic, kMagicPrefix, 4) != 0)
    throw DataError("bad magic in model file " + path);
  if (std::memcmp(magic + 4, kMagicVersion, 4) != 0)
    throw DataError("unsupported model file version in " + path);

  StateSnapshot snap;
  snap.params.n_clauses = static_cast<int>(in.u32());
  snap.params.threshold = static_cast<int>(in.u32());
  snap.params.specificity = in.f64();
  snap.params.weight_lr = in.f64();
  snap.params.n_features = static_cast<int>(in.u32());
  snap.params.n_classes = static_cast<int>(in.u32());
  snap.params.s_max = static_cast<int>(in.u32());
  snap.params.rng_seed = in.u64();
  try {
    snap.params.validate();
  } catch (const ConfigError& e) {
    throw DataError("model file " + path + " header invalid: " + e.what());
  }
  if (snap.params.s_max > 127)
    throw DataError("s_max overflow in model file " + path);
  for (uint64_t& w : snap.feedback_rng_state) w = in.u64();
  for (uint64_t& w : snap.orch_rng_state) w = in.u64();

  const int n_literals = 2 * snap.params.n_features;
  snap.classes.resize(snap.params.n_classes);
  for (auto& cs : snap.classes) {
    cs.polarities.resize(snap.params.n_clauses);
    cs.weights.resize(snap.params.n_clauses);
    cs.states.reserve(static_cast<size_t>(snap.params.n_clauses) * n_literals);
    for (int j = 0; j < snap.params.n_clauses; ++j) {
      char polarity;
      in.bytes(&polarity, 1);
      cs.polarities[j] = static_cast<int8_t>(polarity);
      cs.weights[j] = in.f64();
      for (int k = 0; k < n_literals; ++k) {
        unsigned char st;
        in.bytes(reinterpret_cast<char*>(&st), 1);
        cs.states.push_back(st);
      }
    }
  }
  return import_state(snap);
}

}  // namespace tmkd
