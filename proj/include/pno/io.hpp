#ifndef PNO_IO_HPP
#define PNO_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pno/grid.hpp"
#include "pno/tensor.hpp"

namespace pno {

// ---------------------------------------------------------------------------
// EIKF portable field format.
//
//   magic   4 bytes  "EIKF"
//   version u32 LE   1
//   rank    u8
//   dims    rank x u64 LE
//   payload float32 LE, row-major
//
// Grids store booleans as 0.0 (obstacle) / 1.0 (safe). +inf survives the
// float32 round-trip and marks obstacle / unreachable cells in value fields.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f32(std::ostream& out, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(out, v);
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("eikf: truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("eikf: truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline float get_f32(std::istream& in) {
  std::uint32_t v = get_u32(in);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

inline void put_f64(std::ostream& out, double f) {
  std::uint64_t v;
  std::memcpy(&v, &f, 8);
  put_u64(out, v);
}

inline double get_f64(std::istream& in) {
  std::uint64_t v = get_u64(in);
  double f;
  std::memcpy(&f, &v, 8);
  return f;
}

}  // namespace detail

// version 1: float32 payload (interchange artifacts); version 2: float64
// payload, used by training checkpoints so a resumed run restores the exact
// optimizer trajectory
inline void write_eikf(std::ostream& out, const std::vector<std::uint64_t>& dims,
                       const std::vector<double>& values,
                       std::uint32_t version = 1) {
  if (version != 1 && version != 2)
    throw std::runtime_error("eikf: unsupported version");
  out.write("EIKF", 4);
  detail::put_u32(out, version);
  out.put(static_cast<char>(dims.size()));
  std::uint64_t n = 1;
  for (auto d : dims) {
    detail::put_u64(out, d);
    n *= d;
  }
  if (n != values.size()) throw std::runtime_error("eikf: dim/value mismatch");
  if (version == 1)
    for (double v : values) detail::put_f32(out, static_cast<float>(v));
  else
    for (double v : values) detail::put_f64(out, v);
}

struct EikfBlob {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;  // widened from float32
};

inline EikfBlob read_eikf(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "EIKF", 4) != 0)
    throw std::runtime_error("eikf: bad magic");
  const std::uint32_t version = detail::get_u32(in);
  if (version != 1 && version != 2)
    throw std::runtime_error("eikf: unsupported version");
  const int rank = in.get();
  if (rank < 0) throw std::runtime_error("eikf: truncated");
  EikfBlob blob;
  std::uint64_t n = 1;
  for (int i = 0; i < rank; ++i) {
    blob.dims.push_back(detail::get_u64(in));
    n *= blob.dims.back();
  }
  blob.values.resize(n);
  for (std::uint64_t i = 0; i < n; ++i)
    blob.values[i] = version == 1 ? static_cast<double>(detail::get_f32(in))
                                  : detail::get_f64(in);
  return blob;
}

inline void write_eikf_field(std::ostream& out, const ScalarField& f) {
  write_eikf(out, {static_cast<std::uint64_t>(f.height),
                   static_cast<std::uint64_t>(f.width)},
             f.values);
}

inline ScalarField read_eikf_field(std::istream& in, FieldKind kind) {
  EikfBlob blob = read_eikf(in);
  if (blob.dims.size() != 2) throw std::runtime_error("eikf: expected rank 2");
  ScalarField f(static_cast<int>(blob.dims[0]), static_cast<int>(blob.dims[1]),
                kind);
  f.values = std::move(blob.values);
  return f;
}

inline void write_eikf_grid(std::ostream& out, const OccupancyGrid& g) {
  std::vector<double> vals(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) vals[i] = g.cells[i] ? 1.0 : 0.0;
  write_eikf(out, {static_cast<std::uint64_t>(g.height),
                   static_cast<std::uint64_t>(g.width)},
             vals);
}

inline OccupancyGrid read_eikf_grid(std::istream& in) {
  EikfBlob blob = read_eikf(in);
  if (blob.dims.size() != 2) throw std::runtime_error("eikf: expected rank 2");
  OccupancyGrid g(static_cast<int>(blob.dims[0]), static_cast<int>(blob.dims[1]));
  for (std::size_t i = 0; i < g.size(); ++i)
    g.cells[i] = blob.values[i] >= 0.5 ? 1 : 0;
  return g;
}

inline void write_eikf_tensor(std::ostream& out, const Tensor& t) {
  std::vector<std::uint64_t> dims(t.shape.begin(), t.shape.end());
  write_eikf(out, dims, t.data);
}

inline Tensor read_eikf_tensor(std::istream& in) {
  EikfBlob blob = read_eikf(in);
  Tensor t(std::vector<std::size_t>(blob.dims.begin(), blob.dims.end()));
  t.data = std::move(blob.values);
  return t;
}

// File convenience wrappers.
template <typename WriteFn>
void write_file(const std::string& path, WriteFn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  fn(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void save_field(const std::string& path, const ScalarField& f) {
  write_file(path, [&](std::ostream& o) { write_eikf_field(o, f); });
}
inline void save_grid(const std::string& path, const OccupancyGrid& g) {
  write_file(path, [&](std::ostream& o) { write_eikf_grid(o, g); });
}
inline ScalarField load_field(const std::string& path, FieldKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_eikf_field(in, kind);
}
inline OccupancyGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_eikf_grid(in);
}

// ---------------------------------------------------------------------------
// PGM (P5, 8-bit) field images. Finite values are linearly mapped to
// [0, 255] over their observed range (low = dark); non-finite cells render
// as 255. Zero dependencies and byte-diffable.
// ---------------------------------------------------------------------------

inline void write_pgm(std::ostream& out, const ScalarField& f) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : f.values) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  out << "P5\n" << f.width << " " << f.height << "\n255\n";
  for (double v : f.values) {
    int px = 255;
    if (std::isfinite(v)) {
      px = static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo)));
      px = std::clamp(px, 0, 255);
    }
    out.put(static_cast<char>(px));
  }
}

inline void save_pgm(const std::string& path, const ScalarField& f) {
  write_file(path, [&](std::ostream& o) { write_pgm(o, f); });
}

}  // namespace pno

#endif  // PNO_IO_HPP
