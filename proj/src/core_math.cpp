#include "nam/core_math.hpp"

#include <cmath>

namespace nam {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

uint64_t Rng::uniform_int(uint64_t n) {
  if (n == 0) throw ContractError("uniform_int: n must be positive");
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

Vector relu(const Vector& v) {
  Vector out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

Vector affine(const Matrix& w, const Vector& x, const Vector& b) {
  if (w.cols != static_cast<int>(x.size()) || w.rows != static_cast<int>(b.size())) {
    throw ContractError("affine: shape mismatch, W is " + std::to_string(w.rows) + "x" +
                        std::to_string(w.cols) + ", x has " + std::to_string(x.size()) +
                        " entries, b has " + std::to_string(b.size()));
  }
  Vector out(b);
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    double acc = 0.0;
    for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    out[r] += acc;
  }
  return out;
}

Vector matvec(const Matrix& w, const Vector& x) {
  if (w.cols != static_cast<int>(x.size())) {
    throw ContractError("matvec: shape mismatch, W is " + std::to_string(w.rows) + "x" +
                        std::to_string(w.cols) + ", x has " + std::to_string(x.size()) +
                        " entries");
  }
  Vector out(w.rows, 0.0);
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    double acc = 0.0;
    for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
  return out;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw ContractError("dot: length mismatch, " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
  }
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

Matrix glorot_init(int rows, int cols, Rng& rng) {
  if (rows < 1 || cols < 1) {
    throw ContractError("glorot_init: rows and cols must be >= 1");
  }
  double s = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-s, s);
  return m;
}

Vector dropout_mask(int dim, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ContractError("dropout_mask: rate must be in [0, 1), got " + std::to_string(rate));
  }
  Vector mask(dim, 0.0);
  if (rate == 0.0) {
    for (double& v : mask) v = 1.0;
    return mask;
  }
  double keep = 1.0 / (1.0 - rate);
  for (double& v : mask) v = rng.uniform() < rate ? 0.0 : keep;
  return mask;
}

}  // namespace nam
