#include "vlpic/checkpoint.hpp"

#include "vlpic/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace vlpic {

namespace {

constexpr char kMagic[6] = {'V', 'L', 'P', 'I', 'C', '1'};

class Writer {
public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw IoError("cannot open " + path + " for writing");
  }

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  void u32(std::uint32_t v) { unsigned_le(v, 4); }
  void u64(std::uint64_t v) { unsigned_le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) f64(v[i]);
  }
  void finish() {
    out_.flush();
    if (!out_) throw IoError("write to " + path_ + " failed");
  }

private:
  void unsigned_le(std::uint64_t v, int width) {
    char buf[8];
    for (int i = 0; i < width; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    bytes(buf, static_cast<std::size_t>(width));
  }

  std::ofstream out_;
  std::string path_;
};

class Reader {
public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IoError("cannot open checkpoint " + path);
  }

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n))
      throw IoError("checkpoint " + path_ + " is truncated");
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(unsigned_le(4)); }
  std::uint64_t u64() { return unsigned_le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  void f64s(double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) v[i] = f64();
  }
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof())
      throw IoError("checkpoint " + path_ + " has trailing data");
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw IoError("checkpoint " + path_ + ": " + what);
  }

private:
  std::uint64_t unsigned_le(int width) {
    unsigned char buf[8];
    bytes(buf, static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }

  std::ifstream in_;
  std::string path_;
};

std::vector<std::size_t> coefficient_sizes(Model model, const std::array<std::uint32_t, 2>& cells) {
  if (model == Model::one_d) {
    const std::size_t n = cells[0];
    return {n, n, n, n, n};
  }
  const std::size_t n = static_cast<std::size_t>(cells[0]) * cells[1];
  return {2 * n, n, n, n};
}

} // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const int axes = ckpt.model == Model::two_d ? 2 : 1;
  const std::vector<std::size_t> sizes = coefficient_sizes(ckpt.model, ckpt.cells);
  if (ckpt.coeffs.size() != sizes.size())
    throw IoError("checkpoint has " + std::to_string(ckpt.coeffs.size()) + " coefficient vectors");
  for (std::size_t i = 0; i < sizes.size(); ++i)
    if (static_cast<std::size_t>(ckpt.coeffs[i].size()) != sizes[i])
      throw IoError("checkpoint coefficient vector " + std::to_string(i) + " has the wrong size");
  const ParticleEnsemble& ens = ckpt.ensemble;
  const std::size_t np = ens.size();
  const std::size_t dim = static_cast<std::size_t>(axes);
  if (ens.X.size() != dim * np || ens.P.size() != dim * np || ens.S.size() != 3 * np)
    throw IoError("checkpoint particle arrays are inconsistent");

  Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u32(axes);
  w.u64(np);
  for (int a = 0; a < axes; ++a) {
    w.u32(ckpt.cells[a]);
    w.u32(ckpt.degree[a]);
  }
  for (const Vec& v : ckpt.coeffs) w.f64s(v.data(), static_cast<std::size_t>(v.size()));
  w.f64s(ens.X.data(), ens.X.size());
  w.f64s(ens.P.data(), ens.P.size());
  w.f64s(ens.S.data(), ens.S.size());
  w.f64s(ens.W.data(), ens.W.size());
  w.f64(ckpt.time);
  w.u64(ckpt.step);
  w.f64(ckpt.h0);
  w.finish();
}

Checkpoint read_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[6];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) r.fail("bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));
  const std::uint32_t tag = r.u32();
  if (tag != 1 && tag != 2) r.fail("unknown model tag " + std::to_string(tag));

  Checkpoint ckpt;
  ckpt.model = tag == 2 ? Model::two_d : Model::one_d;
  const std::uint64_t np = r.u64();
  if (np > (std::uint64_t{1} << 40)) r.fail("implausible particle count");
  for (std::uint32_t a = 0; a < tag; ++a) {
    ckpt.cells[a] = r.u32();
    ckpt.degree[a] = r.u32();
    if (ckpt.cells[a] == 0 || ckpt.cells[a] > (1u << 16)) r.fail("implausible cell count");
  }
  for (std::size_t n : coefficient_sizes(ckpt.model, ckpt.cells)) {
    Vec v(static_cast<Eigen::Index>(n));
    r.f64s(v.data(), n);
    ckpt.coeffs.push_back(std::move(v));
  }
  ParticleEnsemble& ens = ckpt.ensemble;
  ens.dim = static_cast<int>(tag);
  ens.X.resize(tag * np);
  ens.P.resize(tag * np);
  ens.S.resize(3 * np);
  ens.W.resize(np);
  r.f64s(ens.X.data(), ens.X.size());
  r.f64s(ens.P.data(), ens.P.size());
  r.f64s(ens.S.data(), ens.S.size());
  r.f64s(ens.W.data(), ens.W.size());
  ckpt.time = r.f64();
  ckpt.step = r.u64();
  ckpt.h0 = r.f64();
  r.expect_end();
  return ckpt;
}

} // namespace vlpic
