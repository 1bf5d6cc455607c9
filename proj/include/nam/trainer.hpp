#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nam/evaluator.hpp"
#include "nam/model.hpp"

// Maximum-likelihood SGD training with negative sampling, dropout,
// dev-driven learning-rate halving and a gradient-check harness.

namespace nam {

struct TrainConfig {
  int entity_dim = 100;
  int relation_dim = 50;
  int hidden_layers = 2;
  int hidden_width = 100;
  double learning_rate = 0.1;
  double embedding_learning_rate = 0.1;  // defaults to learning_rate
  double dropout_rate = 0.2;
  int max_epochs = 30;
  int negatives_per_positive = 1;
  uint64_t seed = 1;
  Variant variant = Variant::kRmnn;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;           // 1-based
  double loglik = 0.0;     // Eq-style train log likelihood after the epoch
  double dev_acc = 0.0;    // dev accuracy at a freshly tuned threshold
  double lr = 0.0;         // learning rate in effect during the epoch
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_dev_acc = 0.0;
  double best_threshold = 0.5;  // threshold tuned at the best epoch
};

// CSV: `epoch,loglik,dev_acc,lr`.
void write_report_csv(std::ostream& out, const TrainReport& report);

// Glorot-initialized layers (biases zero) over init_embeddings tables.
// Layer widths are hidden_width for every hidden layer. When a word table
// is supplied V1 rows come from phrase composition.
NamParams init_params(const TrainConfig& config, const Vocabulary& vocab,
                      const WordVectorTable* words, Rng& rng);

// Sum of ln f over positives plus ln(1 - f) over negatives, scores in
// infer mode, f clamped to [1e-12, 1 - 1e-12].
double log_likelihood(const NamParams& params, const std::vector<Triple>& positives,
                      const std::vector<Triple>& negatives);

// Ascent step for one example: network tensors move by lr * grad,
// embedding rows (V1, V2, C) by embedding_lr * grad.
void apply_gradients(NamParams& params, const Gradients& grads, double lr,
                     double embedding_lr);

// One pass of pure SGD (batch size 1, updates applied immediately):
// shuffles the positives, draws fresh negatives per positive, runs
// train-mode forward/backward on every example and applies the ascent
// update. Embedding tables (V1, V2, C) step with embedding_lr.
void train_epoch(NamParams& params, const std::vector<Triple>& positives,
                 const TripleSet& known_positives, int num_entities, double lr,
                 double embedding_lr, double dropout_rate, int negatives_per_positive,
                 Rng& epoch_rng);

// Runs up to max_epochs epochs; after each one tunes a threshold on dev
// and measures accuracy. A drop below the best-so-far halves the learning
// rate for the next epoch. Returns the best-dev parameter snapshot.
std::pair<NamParams, TrainReport> fit(const std::vector<LabeledTriple>& train,
                                      const std::vector<LabeledTriple>& dev,
                                      const Vocabulary& vocab, const TrainConfig& config,
                                      const WordVectorTable* words = nullptr);

// Test-only fault injection for the gradient checker.
enum class GradCorruption { kNone, kWeights };

struct GradCheckClass {
  std::string name;
  double worst_rel_err = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckClass> classes;
  bool all_pass = true;
  double tolerance = 0.0;
  int trials = 0;
};

// Compares backward against central finite differences on random tiny
// models of the configured variant (dropout forced to 0). Flags any
// parameter class whose worst relative error exceeds the tolerance.
GradCheckReport grad_check(Variant variant, int trials, double tolerance, uint64_t seed,
                           GradCorruption corruption = GradCorruption::kNone);

void write_grad_check_report(std::ostream& out, const GradCheckReport& report);

}  // namespace nam
