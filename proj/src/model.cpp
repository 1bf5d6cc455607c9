#include "nam/model.hpp"

#include <cstring>

namespace nam {

std::string variant_name(Variant v) { return v == Variant::kDnn ? "dnn" : "rmnn"; }

Variant variant_from_name(const std::string& name) {
  if (name == "dnn" || name == "DNN") return Variant::kDnn;
  if (name == "rmnn" || name == "RMNN") return Variant::kRmnn;
  throw DataError("unknown model variant \"" + name + "\" (expected dnn or rmnn)");
}

void NamParams::validate() const {
  if (weights.empty()) throw ContractError("params: need at least one layer");
  if (c.empty()) throw ContractError("params: need at least one relation code");
  const int d_r = relation_dim();
  const int d_e = entity_dim();
  if (d_e < 1) {
    throw ContractError("params: layer 1 input width " + std::to_string(weights[0].cols) +
                        " must exceed relation dim " + std::to_string(d_r));
  }
  int prev = d_e + d_r;
  for (size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].cols != prev) {
      throw ContractError("params: layer " + std::to_string(l + 1) + " expects input width " +
                          std::to_string(weights[l].cols) + " but gets " +
                          std::to_string(prev));
    }
    prev = weights[l].rows;
  }
  if (variant == Variant::kDnn) {
    if (!rel_weights.empty()) throw ContractError("params: DNN must not carry B matrices");
    if (biases.size() != weights.size()) {
      throw ContractError("params: DNN needs one bias per layer");
    }
    for (size_t l = 0; l < biases.size(); ++l) {
      if (static_cast<int>(biases[l].size()) != weights[l].rows) {
        throw ContractError("params: bias " + std::to_string(l + 1) + " width " +
                            std::to_string(biases[l].size()) + " != layer width " +
                            std::to_string(weights[l].rows));
      }
    }
  } else {
    if (!biases.empty()) throw ContractError("params: RMNN carries no standalone biases");
    if (rel_weights.size() != weights.size() + 1) {
      throw ContractError("params: RMNN needs B(1..L+1), got " +
                          std::to_string(rel_weights.size()) + " for L=" +
                          std::to_string(weights.size()));
    }
    for (size_t l = 0; l < rel_weights.size(); ++l) {
      if (rel_weights[l].cols != d_r) {
        throw ContractError("params: B(" + std::to_string(l + 1) + ") has " +
                            std::to_string(rel_weights[l].cols) + " cols, relation dim is " +
                            std::to_string(d_r));
      }
      int want = l < weights.size() ? weights[l].rows : 1;
      if (rel_weights[l].rows != want) {
        throw ContractError("params: B(" + std::to_string(l + 1) + ") has " +
                            std::to_string(rel_weights[l].rows) + " rows, expected " +
                            std::to_string(want));
      }
    }
  }
  for (const auto& row : v1) {
    if (static_cast<int>(row.size()) != d_e) {
      throw ContractError("params: V1 row width " + std::to_string(row.size()) +
                          " != entity dim " + std::to_string(d_e));
    }
  }
  for (const auto& row : v2) {
    if (static_cast<int>(row.size()) != top_width()) {
      throw ContractError("params: V2 row width " + std::to_string(row.size()) +
                          " != top layer width " + std::to_string(top_width()));
    }
  }
  for (const auto& row : c) {
    if (static_cast<int>(row.size()) != d_r) {
      throw ContractError("params: relation code width " + std::to_string(row.size()) +
                          " != relation dim " + std::to_string(d_r));
    }
  }
}

namespace {

void check_relation(const NamParams& params, int relation) {
  if (relation < 0 || relation >= static_cast<int>(params.c.size())) {
    throw ContractError("forward: relation index " + std::to_string(relation) +
                        " out of range [0, " + std::to_string(params.c.size()) + ")");
  }
}

void check_entity(const NamParams& params, int index, const char* role) {
  if (index < 0 || index >= static_cast<int>(params.v1.size())) {
    throw ContractError(std::string("forward: ") + role + " index " + std::to_string(index) +
                        " out of range [0, " + std::to_string(params.v1.size()) + ")");
  }
}

// Core feedforward over explicit embeddings. Exactly one of mode /
// replay_masks may be set; both null is infer mode.
void run_forward(const NamParams& params, const Vector& v1_in, int relation,
                 const Vector& v2_in, const TrainMode* mode,
                 const std::vector<Vector>* replay_masks, ForwardCache& cache) {
  check_relation(params, relation);
  const int d_e = params.entity_dim();
  const int d_r = params.relation_dim();
  if (static_cast<int>(v1_in.size()) != d_e) {
    throw ContractError("forward: input embedding width " + std::to_string(v1_in.size()) +
                        " != entity dim " + std::to_string(d_e));
  }
  if (static_cast<int>(v2_in.size()) != params.top_width()) {
    throw ContractError("forward: output embedding width " + std::to_string(v2_in.size()) +
                        " != top layer width " + std::to_string(params.top_width()));
  }
  const Vector& code = params.c[relation];
  const int depth = params.depth();
  const bool rmnn = params.variant == Variant::kRmnn;

  cache.train_mode = mode != nullptr || replay_masks != nullptr;
  cache.z.resize(depth + 1);
  cache.a.resize(depth);
  cache.masks.clear();
  if (cache.train_mode) cache.masks.resize(depth);
  cache.v2_in = v2_in;

  Vector& z0 = cache.z[0];
  z0.resize(d_e + d_r);
  std::copy(v1_in.begin(), v1_in.end(), z0.begin());
  std::copy(code.begin(), code.end(), z0.begin() + d_e);

  for (int l = 0; l < depth; ++l) {
    const Matrix& w = params.weights[l];
    Vector& a = cache.a[l];
    a.assign(w.rows, 0.0);
    const Vector& zin = cache.z[l];
    for (int r = 0; r < w.rows; ++r) {
      const double* wr = w.row(r);
      double acc = 0.0;
      for (int col = 0; col < w.cols; ++col) acc += wr[col] * zin[col];
      a[r] = acc;
    }
    if (rmnn) {
      const Matrix& b = params.rel_weights[l];
      for (int r = 0; r < b.rows; ++r) {
        const double* br = b.row(r);
        double acc = 0.0;
        for (int col = 0; col < d_r; ++col) acc += br[col] * code[col];
        a[r] += acc;
      }
    } else {
      const Vector& b = params.biases[l];
      for (int r = 0; r < w.rows; ++r) a[r] += b[r];
    }
    Vector& z = cache.z[l + 1];
    z.resize(w.rows);
    for (int r = 0; r < w.rows; ++r) z[r] = a[r] > 0.0 ? a[r] : 0.0;
    if (mode) {
      cache.masks[l] = dropout_mask(w.rows, mode->dropout_rate, *mode->rng);
    } else if (replay_masks) {
      if (l >= static_cast<int>(replay_masks->size())) {
        throw ContractError("forward: replay masks cover " +
                            std::to_string(replay_masks->size()) + " layers, model has " +
                            std::to_string(depth));
      }
      cache.masks[l] = (*replay_masks)[l];
    }
    if (cache.train_mode) {
      const Vector& m = cache.masks[l];
      for (int r = 0; r < w.rows; ++r) z[r] *= m[r];
    }
  }

  double s = dot(cache.z[depth], v2_in);
  if (rmnn) {
    const Matrix& top = params.rel_weights[depth];
    const double* row = top.row(0);
    for (int col = 0; col < d_r; ++col) s += row[col] * code[col];
  }
  cache.s = s;
  cache.f = sigmoid(s);
}

}  // namespace

void forward_into(const NamParams& params, int head, int relation, int tail,
                  const TrainMode* mode, ForwardCache& cache) {
  check_entity(params, head, "head");
  check_entity(params, tail, "tail");
  run_forward(params, params.v1[head], relation, params.v2[tail], mode, nullptr, cache);
  cache.head = head;
  cache.relation = relation;
  cache.tail = tail;
}

ForwardCache forward(const NamParams& params, int head, int relation, int tail) {
  ForwardCache cache;
  forward_into(params, head, relation, tail, nullptr, cache);
  return cache;
}

ForwardCache forward(const NamParams& params, int head, int relation, int tail,
                     TrainMode mode) {
  ForwardCache cache;
  forward_into(params, head, relation, tail, &mode, cache);
  return cache;
}

ForwardCache forward_vectors(const NamParams& params, const Vector& v1_in, int relation,
                             const Vector& v2_in) {
  ForwardCache cache;
  run_forward(params, v1_in, relation, v2_in, nullptr, nullptr, cache);
  cache.relation = relation;
  return cache;
}

ForwardCache forward_vectors(const NamParams& params, const Vector& v1_in, int relation,
                             const Vector& v2_in, TrainMode mode) {
  ForwardCache cache;
  run_forward(params, v1_in, relation, v2_in, &mode, nullptr, cache);
  cache.relation = relation;
  return cache;
}

ForwardCache forward_replay(const NamParams& params, int head, int relation, int tail,
                            const std::vector<Vector>& masks) {
  check_entity(params, head, "head");
  check_entity(params, tail, "tail");
  ForwardCache cache;
  run_forward(params, params.v1[head], relation, params.v2[tail], nullptr, &masks, cache);
  cache.head = head;
  cache.relation = relation;
  cache.tail = tail;
  return cache;
}

void backward_into(const NamParams& params, const ForwardCache& cache, bool label,
                   Gradients& out) {
  const int depth = params.depth();
  const int d_e = params.entity_dim();
  const int d_r = params.relation_dim();
  const bool rmnn = params.variant == Variant::kRmnn;
  if (static_cast<int>(cache.z.size()) != depth + 1 ||
      static_cast<int>(cache.z[0].size()) != d_e + d_r) {
    throw ContractError("backward: cache does not match params (layer count or input width)");
  }
  if (cache.relation < 0 || cache.relation >= static_cast<int>(params.c.size())) {
    throw ContractError("backward: cache relation index out of range");
  }
  if (cache.train_mode && static_cast<int>(cache.masks.size()) != depth) {
    throw ContractError("backward: train cache is missing dropout masks");
  }
  const Vector& code = params.c[cache.relation];

  out.weights.resize(depth);
  out.biases.assign(rmnn ? 0 : depth, Vector{});
  out.rel_weights.resize(rmnn ? depth + 1 : 0);
  out.v1.index = cache.head;
  out.v2.index = cache.tail;
  out.c.index = cache.relation;
  out.c.grad.assign(d_r, 0.0);

  const double ds = (label ? 1.0 : 0.0) - cache.f;  // dl/ds

  // dl/dv2 = ds * z(L)
  out.v2.grad.resize(params.top_width());
  for (int i = 0; i < params.top_width(); ++i) out.v2.grad[i] = ds * cache.z[depth][i];

  if (rmnn) {
    Matrix& top = out.rel_weights[depth];
    top.rows = 1;
    top.cols = d_r;
    top.data.resize(d_r);
    for (int i = 0; i < d_r; ++i) top.data[i] = ds * code[i];
    const Matrix& b_top = params.rel_weights[depth];
    for (int i = 0; i < d_r; ++i) out.c.grad[i] += ds * b_top.at(0, i);
  }

  // delta = dl/da(l), walked from the top layer down.
  Vector delta(params.top_width());
  for (int i = 0; i < params.top_width(); ++i) {
    double g = ds * cache.v2_in[i];
    if (cache.train_mode) g *= cache.masks[depth - 1][i];
    delta[i] = cache.a[depth - 1][i] > 0.0 ? g : 0.0;
  }

  Vector next_delta;
  for (int l = depth - 1; l >= 0; --l) {
    const Matrix& w = params.weights[l];
    const Vector& zin = cache.z[l];

    Matrix& gw = out.weights[l];
    gw.rows = w.rows;
    gw.cols = w.cols;
    gw.data.resize(w.data.size());
    for (int r = 0; r < w.rows; ++r) {
      double* grow = gw.row(r);
      double d = delta[r];
      for (int col = 0; col < w.cols; ++col) grow[col] = d * zin[col];
    }
    if (rmnn) {
      Matrix& gb = out.rel_weights[l];
      gb.rows = w.rows;
      gb.cols = d_r;
      gb.data.resize(static_cast<size_t>(w.rows) * d_r);
      const Matrix& b = params.rel_weights[l];
      for (int r = 0; r < w.rows; ++r) {
        double* grow = gb.row(r);
        double d = delta[r];
        const double* brow = b.row(r);
        for (int col = 0; col < d_r; ++col) {
          grow[col] = d * code[col];
          out.c.grad[col] += d * brow[col];
        }
      }
    } else {
      out.biases[l] = delta;
    }

    // dl/dz(l-1) = W(l)^T delta
    next_delta.assign(w.cols, 0.0);
    for (int r = 0; r < w.rows; ++r) {
      const double* wr = w.row(r);
      double d = delta[r];
      for (int col = 0; col < w.cols; ++col) next_delta[col] += wr[col] * d;
    }
    if (l > 0) {
      for (int i = 0; i < w.cols; ++i) {
        double g = next_delta[i];
        if (cache.train_mode) g *= cache.masks[l - 1][i];
        next_delta[i] = cache.a[l - 1][i] > 0.0 ? g : 0.0;
      }
      delta = next_delta;
    }
  }

  // next_delta now holds dl/dz(0) = [dl/dv1, dl/dc-via-input].
  out.v1.grad.assign(next_delta.begin(), next_delta.begin() + d_e);
  for (int i = 0; i < d_r; ++i) out.c.grad[i] += next_delta[d_e + i];
}

Gradients backward(const NamParams& params, const ForwardCache& cache, bool label) {
  Gradients out;
  backward_into(params, cache, label, out);
  return out;
}

double score(const NamParams& params, const Triple& triple) {
  ForwardCache cache;
  forward_into(params, triple.head, triple.relation, triple.tail, nullptr, cache);
  return cache.f;
}

namespace {

void hash_bytes(uint64_t& h, const void* ptr, size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(ptr);
  for (size_t i = 0; i < n; ++i) h = (h ^ p[i]) * 0x100000001b3ULL;
}

void hash_u64(uint64_t& h, uint64_t v) { hash_bytes(h, &v, sizeof v); }

template <typename Fn>
void for_each_tensor(const NamParams& params, Fn&& fn) {
  for (const auto& m : params.weights) fn(m.data, m.rows, m.cols);
  for (const auto& v : params.biases) fn(v, static_cast<int>(v.size()), 1);
  for (const auto& m : params.rel_weights) fn(m.data, m.rows, m.cols);
  for (const auto& v : params.v1) fn(v, static_cast<int>(v.size()), 1);
  for (const auto& v : params.v2) fn(v, static_cast<int>(v.size()), 1);
  for (const auto& v : params.c) fn(v, static_cast<int>(v.size()), 1);
}

}  // namespace

uint64_t params_checksum(const NamParams& params) {
  uint64_t h = 0xcbf29ce484222325ULL;
  hash_u64(h, params.variant == Variant::kDnn ? 0 : 1);
  for_each_tensor(params, [&h](const std::vector<double>& data, int rows, int cols) {
    hash_u64(h, static_cast<uint64_t>(rows));
    hash_u64(h, static_cast<uint64_t>(cols));
    hash_bytes(h, data.data(), data.size() * sizeof(double));
  });
  return h;
}

long count_differing_scalars(const NamParams& a, const NamParams& b) {
  std::vector<const std::vector<double>*> ta, tb;
  for_each_tensor(a, [&ta](const std::vector<double>& d, int, int) { ta.push_back(&d); });
  for_each_tensor(b, [&tb](const std::vector<double>& d, int, int) { tb.push_back(&d); });
  if (ta.size() != tb.size()) throw ContractError("count_differing_scalars: shape mismatch");
  long diff = 0;
  for (size_t i = 0; i < ta.size(); ++i) {
    if (ta[i]->size() != tb[i]->size()) {
      throw ContractError("count_differing_scalars: tensor size mismatch");
    }
    for (size_t j = 0; j < ta[i]->size(); ++j) {
      if ((*ta[i])[j] != (*tb[i])[j]) ++diff;
    }
  }
  return diff;
}

long count_scalars(const NamParams& params) {
  long n = 0;
  for_each_tensor(params, [&n](const std::vector<double>& d, int, int) {
    n += static_cast<long>(d.size());
  });
  return n;
}

}  // namespace nam
