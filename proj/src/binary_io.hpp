#pragma once

#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "nam/model.hpp"

// Little-endian primitives shared by the model containers. Fixed field
// order keeps save -> load -> save byte-stable.

namespace nam::detail {

inline void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("model file truncated");
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

inline void put_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw DataError("model file truncated");
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  uint32_t n = get_u32(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw DataError("model file truncated");
  return s;
}

inline void put_vector(std::ostream& out, const Vector& v) {
  put_u32(out, static_cast<uint32_t>(v.size()));
  for (double x : v) put_f64(out, x);
}

inline Vector get_vector(std::istream& in) {
  uint32_t n = get_u32(in);
  Vector v(n);
  for (uint32_t i = 0; i < n; ++i) v[i] = get_f64(in);
  return v;
}

inline void put_matrix(std::ostream& out, const Matrix& m) {
  put_u32(out, static_cast<uint32_t>(m.rows));
  put_u32(out, static_cast<uint32_t>(m.cols));
  for (double x : m.data) put_f64(out, x);
}

inline Matrix get_matrix(std::istream& in) {
  uint32_t rows = get_u32(in);
  uint32_t cols = get_u32(in);
  Matrix m(static_cast<int>(rows), static_cast<int>(cols));
  for (double& x : m.data) x = get_f64(in);
  return m;
}

inline void put_params(std::ostream& out, const NamParams& p) {
  put_u32(out, p.variant == Variant::kDnn ? 0 : 1);
  put_u32(out, static_cast<uint32_t>(p.weights.size()));
  for (const auto& m : p.weights) put_matrix(out, m);
  put_u32(out, static_cast<uint32_t>(p.biases.size()));
  for (const auto& v : p.biases) put_vector(out, v);
  put_u32(out, static_cast<uint32_t>(p.rel_weights.size()));
  for (const auto& m : p.rel_weights) put_matrix(out, m);
  put_u32(out, static_cast<uint32_t>(p.v1.size()));
  for (const auto& v : p.v1) put_vector(out, v);
  put_u32(out, static_cast<uint32_t>(p.v2.size()));
  for (const auto& v : p.v2) put_vector(out, v);
  put_u32(out, static_cast<uint32_t>(p.c.size()));
  for (const auto& v : p.c) put_vector(out, v);
}

inline NamParams get_params(std::istream& in) {
  NamParams p;
  p.variant = get_u32(in) == 0 ? Variant::kDnn : Variant::kRmnn;
  uint32_t n = get_u32(in);
  for (uint32_t i = 0; i < n; ++i) p.weights.push_back(get_matrix(in));
  n = get_u32(in);
  for (uint32_t i = 0; i < n; ++i) p.biases.push_back(get_vector(in));
  n = get_u32(in);
  for (uint32_t i = 0; i < n; ++i) p.rel_weights.push_back(get_matrix(in));
  n = get_u32(in);
  for (uint32_t i = 0; i < n; ++i) p.v1.push_back(get_vector(in));
  n = get_u32(in);
  for (uint32_t i = 0; i < n; ++i) p.v2.push_back(get_vector(in));
  n = get_u32(in);
  for (uint32_t i = 0; i < n; ++i) p.c.push_back(get_vector(in));
  return p;
}

}  // namespace nam::detail
