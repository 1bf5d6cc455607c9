#include "nam/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace nam {

TransferSamples map_transfer_samples(const Vocabulary& vocab,
                                     const std::vector<RawTriple>& raw,
                                     const std::string& new_relation) {
  TransferSamples out;
  for (const auto& r : raw) {
    if (r.relation != new_relation) {
      throw ContractError("transfer: sample relation \"" + r.relation +
                          "\" != new relation \"" + new_relation + "\"");
    }
    auto head = vocab.entity_id(r.head);
    auto tail = vocab.entity_id(r.tail);
    if (!head || !tail) {
      ++out.dropped_oov;
      continue;
    }
    out.usable.push_back({*head, *tail, r.label});
  }
  return out;
}

namespace {

Vector init_code(int dim, Rng& rng) {
  Vector code(dim);
  for (double& v : code) v = rng.uniform(-0.1, 0.1);
  return code;
}

// Shared adaptation loop over the new relation's samples. Sampled
// negatives follow the same tail-perturbation rule as training.
void run_adaptation(NamParams& params, int rel_index, const TransferSamples& samples,
                    const TrainConfig& config, bool code_only, Rng& master) {
  std::vector<AdaptSample> order(samples.usable);
  TripleSet known;
  for (const auto& s : samples.usable) {
    if (s.label) known.insert({s.head, rel_index, s.tail});
  }
  const int num_entities = static_cast<int>(params.v1.size());

  ForwardCache cache;
  Gradients grads;
  auto step = [&](const Triple& t, bool label, TrainMode& mode) {
    forward_into(params, t.head, t.relation, t.tail, &mode, cache);
    backward_into(params, cache, label, grads);
    if (code_only) {
      Vector& code = params.c[rel_index];
      for (size_t i = 0; i < code.size(); ++i) {
        code[i] += config.embedding_learning_rate * grads.c.grad[i];
      }
    } else {
      apply_gradients(params, grads, config.learning_rate,
                      config.embedding_learning_rate);
    }
  };

  for (int epoch = 0; epoch < kAdaptEpochs; ++epoch) {
    Rng epoch_rng(master.next_u64());
    shuffle(order, epoch_rng);
    TrainMode mode{&epoch_rng, config.dropout_rate};
    for (const auto& s : order) {
      Triple t{s.head, rel_index, s.tail};
      step(t, s.label, mode);
      if (s.label) {
        for (int k = 0; k < config.negatives_per_positive; ++k) {
          Triple neg = sample_negative(t, num_entities, known, epoch_rng);
          step(neg, false, mode);
        }
      }
    }
  }
}

void require_positive_samples(const TransferSamples& samples) {
  bool has_pos = false;
  for (const auto& s : samples.usable) has_pos |= s.label;
  if (!has_pos) {
    throw ContractError("transfer: no usable positive samples for the new relation");
  }
}

// Accuracy on a labeled set with a threshold tuned on that same set.
double tuned_accuracy(const NamParams& params, const std::vector<LabeledTriple>& eval) {
  auto scores = score_all(params, eval);
  std::vector<ScoredLabel> scored(eval.size());
  for (size_t i = 0; i < eval.size(); ++i) scored[i] = {scores[i], eval[i].label};
  return accuracy_at(scored, tune_threshold(scored));
}

}  // namespace

CodeLearnResult learn_relation_code(const Model& frozen, const TransferSamples& samples,
                                    const TrainConfig& config) {
  require_positive_samples(samples);
  CodeLearnResult result;
  result.frozen_checksum_before = params_checksum(frozen.params);

  Rng master(config.seed);
  NamParams working = frozen.params;
  int rel_index = static_cast<int>(working.c.size());
  working.c.push_back(init_code(working.relation_dim(), master));
  run_adaptation(working, rel_index, samples, config, /*code_only=*/true, master);

  result.code = working.c[rel_index];
  result.frozen_checksum_after = params_checksum(frozen.params);
  return result;
}

Model extend_model(const Model& frozen, const std::string& new_relation_name,
                   const Vector& code) {
  if (frozen.vocab.relation_id(new_relation_name)) {
    throw ContractError("extend_model: relation \"" + new_relation_name +
                        "\" already exists");
  }
  if (static_cast<int>(code.size()) != frozen.params.relation_dim()) {
    throw ContractError("extend_model: code width " + std::to_string(code.size()) +
                        " != relation dim " + std::to_string(frozen.params.relation_dim()));
  }
  Model extended = frozen;
  extended.vocab.add_relation(new_relation_name);
  extended.params.c.push_back(code);
  return extended;
}

FullUpdateResult full_update_transfer(const Model& base, const std::string& new_relation,
                                      const TransferSamples& samples,
                                      const std::vector<LabeledTriple>& original_eval,
                                      const TrainConfig& config) {
  require_positive_samples(samples);
  if (original_eval.empty()) {
    throw ContractError("full_update_transfer: empty original-relation eval set");
  }
  FullUpdateResult result;
  result.orig_acc_before = tuned_accuracy(base.params, original_eval);

  Rng master(config.seed);
  Vector code = init_code(base.params.relation_dim(), master);
  result.model = extend_model(base, new_relation, code);
  int rel_index = result.model.vocab.num_relations() - 1;
  run_adaptation(result.model.params, rel_index, samples, config, /*code_only=*/false,
                 master);

  result.orig_acc_after = tuned_accuracy(result.model.params, original_eval);
  return result;
}

std::vector<CurvePoint> transfer_curve(const Model& base, const std::string& new_relation,
                                       const TransferSamples& samples,
                                       const std::vector<AdaptSample>& new_rel_eval,
                                       const std::vector<LabeledTriple>& original_eval,
                                       const std::vector<double>& fractions,
                                       TransferMode mode, const TrainConfig& config) {
  require_positive_samples(samples);
  if (new_rel_eval.empty()) throw ContractError("transfer_curve: empty new-relation eval");
  std::vector<CurvePoint> curve;
  Rng curve_rng(config.seed);

  for (double fraction : fractions) {
    if (fraction <= 0.0 || fraction > 1.0) {
      throw ContractError("transfer_curve: fractions must be in (0, 1]");
    }
    size_t take = static_cast<size_t>(
        std::max<long>(1, std::lround(fraction * samples.usable.size())));
    take = std::min(take, samples.usable.size());
    TransferSamples subset;
    subset.usable.assign(samples.usable.begin(), samples.usable.begin() + take);

    Model adapted;
    double orig_acc;
    if (mode == TransferMode::kCodeOnly) {
      auto learned = learn_relation_code(base, subset, config);
      adapted = extend_model(base, new_relation, learned.code);
      orig_acc = tuned_accuracy(base.params, original_eval);
    } else {
      auto res = full_update_transfer(base, new_relation, subset, original_eval, config);
      adapted = std::move(res.model);
      orig_acc = res.orig_acc_after;
    }
    int rel_index = adapted.vocab.num_relations() - 1;

    // Threshold for the new relation: tuned on the adaptation subset,
    // padded with sampled negatives when it has no labeled ones.
    Rng tune_rng(curve_rng.next_u64());
    TripleSet known;
    for (const auto& s : subset.usable) {
      if (s.label) known.insert({s.head, rel_index, s.tail});
    }
    std::vector<ScoredLabel> tune_set;
    for (const auto& s : subset.usable) {
      Triple t{s.head, rel_index, s.tail};
      tune_set.push_back({score(adapted.params, t), s.label});
      if (s.label) {
        Triple neg = sample_negative(t, static_cast<int>(adapted.params.v1.size()), known,
                                     tune_rng);
        tune_set.push_back({score(adapted.params, neg), false});
      }
    }
    double threshold = tune_threshold(tune_set);

    int correct = 0;
    for (const auto& s : new_rel_eval) {
      Triple t{s.head, rel_index, s.tail};
      bool predicted = classify(score(adapted.params, t), threshold);
      correct += predicted == s.label ? 1 : 0;
    }
    double new_acc = static_cast<double>(correct) / new_rel_eval.size();
    curve.push_back({fraction, new_acc, orig_acc});
  }
  return curve;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "fraction,new_rel_acc,orig_rel_acc\n";
  out.precision(17);
  for (const auto& p : curve) {
    out << p.fraction << ',' << p.new_rel_acc << ',' << p.orig_rel_acc << '\n';
  }
}

}  // namespace nam
