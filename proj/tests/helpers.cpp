#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <unordered_map>

namespace namtest {

nam::NamParams random_params(nam::Variant variant, int entity_dim, int relation_dim,
                             const std::vector<int>& widths, int n_entities,
                             int n_relations, nam::Rng& rng, double scale) {
  nam::NamParams p;
  p.variant = variant;
  auto rand_vec = [&rng, scale](int n) {
    nam::Vector v(n);
    for (double& x : v) x = rng.uniform(-scale, scale);
    return v;
  };
  auto rand_mat = [&rng, scale](int r, int c) {
    nam::Matrix m(r, c);
    for (double& x : m.data) x = rng.uniform(-scale, scale);
    return m;
  };
  int prev = entity_dim + relation_dim;
  for (int w : widths) {
    p.weights.push_back(rand_mat(w, prev));
    prev = w;
  }
  if (variant == nam::Variant::kDnn) {
    for (int w : widths) p.biases.push_back(rand_vec(w));
  } else {
    for (int w : widths) p.rel_weights.push_back(rand_mat(w, relation_dim));
    p.rel_weights.push_back(rand_mat(1, relation_dim));
  }
  for (int i = 0; i < n_entities; ++i) {
    p.v1.push_back(rand_vec(entity_dim));
    p.v2.push_back(rand_vec(prev));
  }
  for (int i = 0; i < n_relations; ++i) p.c.push_back(rand_vec(relation_dim));
  p.validate();
  return p;
}

nam::NamParams random_small_instance(nam::Variant variant, nam::Rng& rng, int* head,
                                     int* relation, int* tail) {
  while (true) {
    int d_e = 1 + static_cast<int>(rng.uniform_int(4));
    int d_r = 1 + static_cast<int>(rng.uniform_int(4));
    int depth = 1 + static_cast<int>(rng.uniform_int(3));
    std::vector<int> widths;
    for (int l = 0; l < depth; ++l) widths.push_back(1 + static_cast<int>(rng.uniform_int(5)));
    nam::NamParams p = random_params(variant, d_e, d_r, widths, 3, 2, rng);
    *head = static_cast<int>(rng.uniform_int(3));
    *relation = static_cast<int>(rng.uniform_int(2));
    *tail = static_cast<int>(rng.uniform_int(3));
    auto cache = nam::forward(p, *head, *relation, *tail);
    bool near_kink = false;
    for (const auto& a : cache.a) {
      for (double v : a) near_kink |= std::fabs(v) < 1e-4;
    }
    if (!near_kink) return p;
  }
}

namespace {

double example_loss(const nam::NamParams& p, int h, int r, int t, bool label) {
  double f = nam::forward(p, h, r, t).f;
  return label ? std::log(f) : std::log(1.0 - f);
}

double example_loss_masked(const nam::NamParams& p, int h, int r, int t, bool label,
                           const std::vector<nam::Vector>& masks) {
  double f = nam::forward_replay(p, h, r, t, masks).f;
  return label ? std::log(f) : std::log(1.0 - f);
}

}  // namespace

double numeric_grad(nam::NamParams& params, double* scalar, int head, int relation,
                    int tail, bool label, double step) {
  double saved = *scalar;
  *scalar = saved + step;
  double up = example_loss(params, head, relation, tail, label);
  *scalar = saved - step;
  double down = example_loss(params, head, relation, tail, label);
  *scalar = saved;
  return (up - down) / (2.0 * step);
}

double numeric_grad_masked(nam::NamParams& params, double* scalar, int head, int relation,
                           int tail, bool label, const std::vector<nam::Vector>& masks,
                           double step) {
  double saved = *scalar;
  *scalar = saved + step;
  double up = example_loss_masked(params, head, relation, tail, label, masks);
  *scalar = saved - step;
  double down = example_loss_masked(params, head, relation, tail, label, masks);
  *scalar = saved;
  return (up - down) / (2.0 * step);
}

std::vector<ParamScalar> touched_scalars(nam::NamParams& params, const nam::Gradients& grads,
                                         int head, int relation, int tail) {
  std::vector<ParamScalar> refs;
  for (size_t l = 0; l < params.weights.size(); ++l) {
    for (size_t i = 0; i < params.weights[l].data.size(); ++i) {
      refs.push_back({"W", &params.weights[l].data[i], grads.weights[l].data[i]});
    }
  }
  for (size_t l = 0; l < params.biases.size(); ++l) {
    for (size_t i = 0; i < params.biases[l].size(); ++i) {
      refs.push_back({"b", &params.biases[l][i], grads.biases[l][i]});
    }
  }
  for (size_t l = 0; l < params.rel_weights.size(); ++l) {
    for (size_t i = 0; i < params.rel_weights[l].data.size(); ++i) {
      refs.push_back({"B", &params.rel_weights[l].data[i], grads.rel_weights[l].data[i]});
    }
  }
  for (size_t i = 0; i < params.v1[head].size(); ++i) {
    refs.push_back({"v1", &params.v1[head][i], grads.v1.grad[i]});
  }
  for (size_t i = 0; i < params.v2[tail].size(); ++i) {
    refs.push_back({"v2", &params.v2[tail][i], grads.v2.grad[i]});
  }
  for (size_t i = 0; i < params.c[relation].size(); ++i) {
    refs.push_back({"c", &params.c[relation][i], grads.c.grad[i]});
  }
  return refs;
}

double grad_rel_err(double analytic, double numeric) {
  double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-3});
  return std::fabs(analytic - numeric) / denom;
}

BruteThreshold brute_force_threshold(const std::vector<nam::ScoredLabel>& items) {
  std::vector<double> scores;
  for (const auto& it : items) scores.push_back(it.score);
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());

  std::vector<double> candidates;
  candidates.push_back(scores.front() - 1.0);
  for (size_t i = 0; i + 1 < scores.size(); ++i) {
    candidates.push_back((scores[i] + scores[i + 1]) / 2.0);
  }
  candidates.push_back(scores.back() + 1.0);

  BruteThreshold best{0.0, -1.0};
  for (double t : candidates) {
    int correct = 0;
    for (const auto& it : items) {
      correct += ((it.score >= t) == it.label) ? 1 : 0;
    }
    double acc = static_cast<double>(correct) / items.size();
    if (acc > best.accuracy) best = {t, acc};
  }
  return best;
}

WinogradPlanted make_winograd_planted(int n_causes, int n_effects, int n_draws,
                                      int n_schemas, uint64_t seed) {
  WinogradPlanted out;
  nam::Rng rng(seed);

  auto cause_phrase = [](int i, int pattern) {
    nam::PatternedPhrase p;
    p.tokens = {"c" + std::to_string(i)};
    p.pattern = nam::pattern_from_index(pattern);
    return p;
  };
  auto effect_phrase = [n_effects](int cause) {
    nam::PatternedPhrase p;
    p.tokens = {"e" + std::to_string(cause % n_effects)};
    p.pattern = nam::pattern_from_index(cause % nam::kNumPatterns);
    return p;
  };

  // Aggregate draws into (cause, cause-pattern) rows with counts; the
  // effect side is fully determined by the cause base.
  std::unordered_map<int, long> counts;
  for (int d = 0; d < n_draws; ++d) {
    int i = static_cast<int>(rng.uniform_int(n_causes));
    int pc = static_cast<int>(rng.uniform_int(nam::kNumPatterns));
    counts[i * nam::kNumPatterns + pc] += 1;
  }
  for (int i = 0; i < n_causes; ++i) {
    for (int pc = 0; pc < nam::kNumPatterns; ++pc) {
      auto it = counts.find(i * nam::kNumPatterns + pc);
      if (it == counts.end()) continue;
      out.pairs.push_back({cause_phrase(i, pc), effect_phrase(i), it->second});
    }
  }

  // Candidate pairs (a, b) with different preferred effect bases and
  // patterns; the query carries a's preferred effect.
  for (int k = 0; k < n_schemas; ++k) {
    int a = static_cast<int>(rng.uniform_int(n_causes));
    int b = (a + 5) % n_causes;
    if (a % n_effects == b % n_effects || a % 4 == b % 4) {
      b = (a + 1) % n_causes;  // fallback for tiny vocabularies
    }
    nam::SchemaProblem problem;
    nam::PatternedPhrase cand_a = cause_phrase(a, static_cast<int>(rng.uniform_int(4)));
    nam::PatternedPhrase cand_b = cause_phrase(b, static_cast<int>(rng.uniform_int(4)));
    problem.query = effect_phrase(a);
    if (k % 2 == 0) {
      problem.candidate_a = cand_a;
      problem.candidate_b = cand_b;
      problem.gold = 'A';
    } else {
      problem.candidate_a = cand_b;
      problem.candidate_b = cand_a;
      problem.gold = 'B';
    }
    out.schemas.push_back(std::move(problem));
  }
  return out;
}

std::string scratch_dir(const std::string& tag) {
  std::filesystem::path dir = std::filesystem::path("scratch") / tag;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace namtest
