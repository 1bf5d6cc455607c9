#pragma once

#include <string>
#include <vector>

#include "nam/evaluator.hpp"
#include "nam/model.hpp"
#include "nam/winograd.hpp"

// Shared test fixtures and oracles. The finite-difference and brute-force
// routines here are deliberately independent of the library's own
// gradient checker and threshold sweep.

namespace namtest {

// Random small model for property tests; entries uniform in [-scale, scale].
nam::NamParams random_params(nam::Variant variant, int entity_dim, int relation_dim,
                             const std::vector<int>& widths, int n_entities,
                             int n_relations, nam::Rng& rng, double scale = 0.5);

// Random model with dimensions drawn from the given rng (widths <= 5,
// depth in {1,2,3}), regenerated until no pre-activation is near the ReLU
// kink for the returned example indices.
nam::NamParams random_small_instance(nam::Variant variant, nam::Rng& rng, int* head,
                                     int* relation, int* tail);

// Central finite difference of l = y ln f + (1-y) ln(1-f) with respect to
// one scalar, infer mode.
double numeric_grad(nam::NamParams& params, double* scalar, int head, int relation,
                    int tail, bool label, double step = 1e-6);

// Same, with fixed dropout masks replayed on every evaluation.
double numeric_grad_masked(nam::NamParams& params, double* scalar, int head, int relation,
                           int tail, bool label, const std::vector<nam::Vector>& masks,
                           double step = 1e-6);

struct ParamScalar {
  const char* cls;
  double* ptr;
  double analytic;
};

// Every scalar the example (head, relation, tail) touches, paired with
// the analytic gradient from `grads`.
std::vector<ParamScalar> touched_scalars(nam::NamParams& params, const nam::Gradients& grads,
                                         int head, int relation, int tail);

double grad_rel_err(double analytic, double numeric);

// Exhaustive threshold scan over all 2n+1 positions (below-min, all
// midpoints, above-max), ties toward the smallest candidate.
struct BruteThreshold {
  double threshold = 0.0;
  double accuracy = 0.0;
};
BruteThreshold brute_force_threshold(const std::vector<nam::ScoredLabel>& items);

// Planted cause-effect data: cause base i deterministically prefers
// effect base i % n_effects with effect pattern i % 4. Schemas pit two
// causes with different preferred effects and patterns against each
// other; gold alternates between A and B.
struct WinogradPlanted {
  std::vector<nam::CauseEffectPair> pairs;
  std::vector<nam::SchemaProblem> schemas;
};
WinogradPlanted make_winograd_planted(int n_causes, int n_effects, int n_draws,
                                      int n_schemas, uint64_t seed);

// Scratch directory under the test working directory, wiped on entry.
std::string scratch_dir(const std::string& tag);

}  // namespace namtest
