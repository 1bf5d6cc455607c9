#pragma once

#include <string>
#include <vector>

#include "nam/checkpoint.hpp"
#include "nam/trainer.hpp"

// Knowledge-transfer learning: extend a trained model to an unseen
// relation by learning only a new relation code, or (the aggressive
// variant) by updating every parameter.

namespace nam {

// An adaptation example over the new relation, entity-indexed against the
// frozen model's vocabulary.
struct AdaptSample {
  int head = 0;
  int tail = 0;
  bool label = true;
};

struct TransferSamples {
  std::vector<AdaptSample> usable;
  int dropped_oov = 0;  // samples discarded because an entity is unknown
};

// Maps raw new-relation triples onto the frozen vocabulary. Every sample
// must reference `new_relation`; OOV entities drop the sample and bump
// the counter.
TransferSamples map_transfer_samples(const Vocabulary& vocab,
                                     const std::vector<RawTriple>& raw,
                                     const std::string& new_relation);

// Number of adaptation epochs; fixed, no halving (tiny adaptation sets
// carry no dev split).
constexpr int kAdaptEpochs = 50;

struct CodeLearnResult {
  Vector code;
  uint64_t frozen_checksum_before = 0;
  uint64_t frozen_checksum_after = 0;
};

// Learns a code for the new relation by SGD ascent restricted to that
// code; every frozen tensor is checksummed before and after. The code is
// initialized uniform [-0.1, 0.1] from config.seed and stepped with the
// embedding learning rate. Negative tails follow the training rule.
CodeLearnResult learn_relation_code(const Model& frozen, const TransferSamples& samples,
                                    const TrainConfig& config);

// Returns a model whose relation vocabulary grew by one, sharing every
// other tensor with the input. Name collisions are contract violations.
Model extend_model(const Model& frozen, const std::string& new_relation_name,
                   const Vector& code);

struct FullUpdateResult {
  Model model;
  double orig_acc_before = 0.0;
  double orig_acc_after = 0.0;
};

// Aggressive transfer: extends the model, then lets SGD update every
// parameter on the adaptation samples. Reports accuracy on the supplied
// original-relation set before and after (threshold re-tuned each time).
FullUpdateResult full_update_transfer(const Model& base, const std::string& new_relation,
                                      const TransferSamples& samples,
                                      const std::vector<LabeledTriple>& original_eval,
                                      const TrainConfig& config);

struct CurvePoint {
  double fraction = 0.0;
  double new_rel_acc = 0.0;
  double orig_rel_acc = 0.0;
};

enum class TransferMode { kCodeOnly, kFullUpdate };

// Accuracy as a function of the adaptation-sample fraction, for
// Figure-6-style learning curves. new_rel_eval / original_eval are
// labeled sets; the new-relation threshold is tuned on the adaptation
// samples' scores.
std::vector<CurvePoint> transfer_curve(const Model& base, const std::string& new_relation,
                                       const TransferSamples& samples,
                                       const std::vector<AdaptSample>& new_rel_eval,
                                       const std::vector<LabeledTriple>& original_eval,
                                       const std::vector<double>& fractions,
                                       TransferMode mode, const TrainConfig& config);

// CSV: `fraction,new_rel_acc,orig_rel_acc`.
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace nam
