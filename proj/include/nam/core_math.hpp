#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Dense vector/matrix arithmetic, activations, initialization, dropout
// masks and a seeded deterministic RNG. Everything is 64-bit floating
// point; no public operation lets a NaN or Inf escape for finite inputs.

namespace nam {

using Vector = std::vector<double>;

// Thrown when a caller breaks a documented precondition (shape mismatch,
// out-of-range index, invalid rate, ...).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Thrown on bad external input (malformed file, unknown symbol, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Row-major dense matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
  double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }

  bool operator==(const Matrix& other) const = default;

  static Matrix identity(int n);
};

// Deterministic RNG with portable integer semantics (splitmix64).
// The same seed yields the same stream on every platform, which is what
// makes every seeded run of the library bit-reproducible.
// Single-owner: never share one instance across threads.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  uint64_t uniform_int(uint64_t n);

 private:
  uint64_t state_;
};

// Fisher-Yates shuffle driven by the portable Rng.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.uniform_int(i));
    std::swap(items[i - 1], items[j]);
  }
}

// max(0, v) elementwise.
Vector relu(const Vector& v);

// 1 / (1 + e^-x), computed on the branch that never exponentiates a
// large positive value, so it is stable for |x| up to ~700.
double sigmoid(double x);

// W x + b. Throws ContractError naming both shapes on a mismatch.
Vector affine(const Matrix& w, const Vector& x, const Vector& b);

// W x (no bias term).
Vector matvec(const Matrix& w, const Vector& x);

double dot(const Vector& a, const Vector& b);

// Uniform in [-s, s] with s = sqrt(6 / (rows + cols)).
Matrix glorot_init(int rows, int cols, Rng& rng);

// Inverted dropout: each entry is 0 with probability `rate`, else
// 1/(1-rate), so the mask has unit expectation and inference stays
// mask-free. Requires 0 <= rate < 1.
Vector dropout_mask(int dim, double rate, Rng& rng);

}  // namespace nam
