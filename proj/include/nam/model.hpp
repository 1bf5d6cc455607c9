#pragma once

#include <string>
#include <vector>

#include "nam/core_math.hpp"
#include "nam/kb_data.hpp"

// Parameter containers, forward scoring and exact backpropagation for the
// two model families: the plain DNN and the relation-modulated net (RMNN).
//
// Both take z(0) = [v1_head, c_rel] at the input. The DNN computes
// a(l) = W(l) z(l-1) + b(l) per layer; the RMNN has no standalone bias and
// instead injects the relation code into every layer, a(l) = W(l) z(l-1)
// + B(l) c, plus a B(L+1) c term in the final score. Either way the score
// is f = sigmoid(z(L) . v2_tail [+ B(L+1) c]).

namespace nam {

enum class Variant { kDnn, kRmnn };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct NamParams {
  Variant variant = Variant::kDnn;
  std::vector<Matrix> weights;      // W(1..L)
  std::vector<Vector> biases;       // b(1..L), DNN only
  std::vector<Matrix> rel_weights;  // B(1..L+1), RMNN only; B(L+1) has 1 row
  std::vector<Vector> v1;           // per-entity input embeddings
  std::vector<Vector> v2;           // per-entity output embeddings, width = top width
  std::vector<Vector> c;            // per-relation codes

  int depth() const { return static_cast<int>(weights.size()); }
  int relation_dim() const { return c.empty() ? 0 : static_cast<int>(c[0].size()); }
  int entity_dim() const {
    return weights.empty() ? 0 : weights[0].cols - relation_dim();
  }
  int top_width() const { return weights.empty() ? 0 : weights.back().rows; }

  // Checks every shape invariant; throws ContractError naming the layer.
  void validate() const;
};

// Per-example activations kept for exact backpropagation.
struct ForwardCache {
  int head = -1, relation = -1, tail = -1;  // -1 when fed explicit vectors
  bool train_mode = false;
  std::vector<Vector> z;      // z(0..L), post-activation (mask-adjusted in train mode)
  std::vector<Vector> a;      // a(1..L), pre-activation
  std::vector<Vector> masks;  // per hidden layer, train mode only
  Vector v2_in;               // the output-side embedding used for the score
  double s = 0.0;             // pre-sigmoid
  double f = 0.5;             // sigmoid score
};

struct SparseGrad {
  int index = -1;
  Vector grad;
};

// Mirrors NamParams, with sparse slots for the one v1/v2/c row an example
// touches. For explicit-vector calls the index is -1 and the grad is the
// derivative with respect to the supplied vector.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  std::vector<Matrix> rel_weights;
  SparseGrad v1, v2, c;
};

struct TrainMode {
  Rng* rng = nullptr;
  double dropout_rate = 0.0;
};

// Index-based forward. Train mode draws a fresh dropout mask per hidden layer.
ForwardCache forward(const NamParams& params, int head, int relation, int tail);
ForwardCache forward(const NamParams& params, int head, int relation, int tail,
                     TrainMode mode);

// Forward with explicit input/output embeddings (the relation still binds
// a code row). Used where entities are computed vectors, not table rows.
ForwardCache forward_vectors(const NamParams& params, const Vector& v1_in, int relation,
                             const Vector& v2_in);
ForwardCache forward_vectors(const NamParams& params, const Vector& v1_in, int relation,
                             const Vector& v2_in, TrainMode mode);

// Re-runs a forward pass with the dropout masks of a previous cache.
ForwardCache forward_replay(const NamParams& params, int head, int relation, int tail,
                            const std::vector<Vector>& masks);

// Gradient of l = y ln f + (1 - y) ln(1 - f) with respect to every
// parameter the example touches; dl/ds = y - f, ReLU subgradient at 0 is
// 0, and cached dropout masks are replayed exactly.
Gradients backward(const NamParams& params, const ForwardCache& cache, bool label);
void backward_into(const NamParams& params, const ForwardCache& cache, bool label,
                   Gradients& out);

// Workspace-allocating variant for hot loops.
void forward_into(const NamParams& params, int head, int relation, int tail,
                  const TrainMode* mode, ForwardCache& cache);

// Infer-mode probability f for one triple.
double score(const NamParams& params, const Triple& triple);

// FNV-1a over every tensor byte, with shape framing. Equal params hash equal.
uint64_t params_checksum(const NamParams& params);

// Number of scalar parameters that differ between two same-shaped models.
long count_differing_scalars(const NamParams& a, const NamParams& b);

// Total scalar parameter count.
long count_scalars(const NamParams& params);

}  // namespace nam
