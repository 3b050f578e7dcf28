#include "fraclab/snapshot.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "fraclab/decay.hpp"
#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_bytes(std::istream& is, int n) {
  unsigned char b[8] = {0};
  is.read(reinterpret_cast<char*>(b), n);
  if (!is) throw PreconditionError("snapshot truncated");
  std::uint64_t v = 0;
  for (int i = n - 1; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64(std::istream& is) {
  std::uint64_t v = get_bytes(is, 8);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

}  // namespace

void write_snapshot(const std::string& path, const Field& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw PreconditionError("cannot open " + path + " for writing");
  const auto& g = u.grid();
  os.write("FRL1", 4);
  os.put(static_cast<char>(g.dim));
  put_u32(os, static_cast<std::uint32_t>(g.points_per_axis));
  put_f64(os, g.half_width);
  os.put(static_cast<char>(u.decay() ? 1 : 0));
  for (const auto& v : u.values()) {
    put_f64(os, v.real());
    put_f64(os, v.imag());
  }
  if (!os) throw PreconditionError("write failed for " + path);
}

Field read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw PreconditionError("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "FRL1", 4) != 0) throw PreconditionError("bad snapshot magic in " + path);
  int dim = static_cast<int>(get_bytes(is, 1));
  int M = static_cast<int>(get_bytes(is, 4));
  double L = get_f64(is);
  bool flag = get_bytes(is, 1) != 0;
  GridSpec g = GridSpec::make(dim, L, M);
  std::vector<cplx> v(g.size());
  for (auto& x : v) {
    double re = get_f64(is);
    double im = get_f64(is);
    x = {re, im};
  }
  Field f(g, std::move(v));
  if (flag && f.max_abs() > 0.0) {
    DecayFit fit = fit_super_exp_decay(f);
    if (fit.success) return f.with_decay(fit.certificate);
  } else if (flag) {
    return Field::zeros(g);
  }
  return f;
}

}  // namespace fraclab
