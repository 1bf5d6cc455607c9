#include "nam/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace nam {

void TrainConfig::validate() const {
  if (entity_dim < 1 || relation_dim < 1 || hidden_width < 1) {
    throw ContractError("config: dimensions must be >= 1");
  }
  if (hidden_layers < 1) throw ContractError("config: need at least one hidden layer");
  if (learning_rate <= 0.0 || embedding_learning_rate <= 0.0) {
    throw ContractError("config: learning rates must be positive");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ContractError("config: dropout rate must be in [0, 1)");
  }
  if (max_epochs < 1) throw ContractError("config: max_epochs must be >= 1");
  if (negatives_per_positive < 1) {
    throw ContractError("config: negatives_per_positive must be >= 1");
  }
}

void write_report_csv(std::ostream& out, const TrainReport& report) {
  out << "epoch,loglik,dev_acc,lr\n";
  out.precision(17);
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << e.loglik << ',' << e.dev_acc << ',' << e.lr << '\n';
  }
}

NamParams init_params(const TrainConfig& config, const Vocabulary& vocab,
                      const WordVectorTable* words, Rng& rng) {
  config.validate();
  NamParams params;
  params.variant = config.variant;
  auto emb = init_embeddings(vocab, words, config.entity_dim, config.hidden_width,
                             config.relation_dim, rng);
  params.v1 = std::move(emb.v1);
  params.v2 = std::move(emb.v2);
  params.c = std::move(emb.c);

  int prev = config.entity_dim + config.relation_dim;
  for (int l = 0; l < config.hidden_layers; ++l) {
    params.weights.push_back(glorot_init(config.hidden_width, prev, rng));
    prev = config.hidden_width;
  }
  if (config.variant == Variant::kDnn) {
    for (int l = 0; l < config.hidden_layers; ++l) {
      params.biases.emplace_back(config.hidden_width, 0.0);
    }
  } else {
    for (int l = 0; l < config.hidden_layers; ++l) {
      params.rel_weights.push_back(glorot_init(config.hidden_width, config.relation_dim, rng));
    }
    params.rel_weights.push_back(glorot_init(1, config.relation_dim, rng));
  }
  params.validate();
  return params;
}

double log_likelihood(const NamParams& params, const std::vector<Triple>& positives,
                      const std::vector<Triple>& negatives) {
  if (positives.empty() && negatives.empty()) {
    throw ContractError("log_likelihood: no examples");
  }
  constexpr double kClamp = 1e-12;
  double total = 0.0;
  for (const auto& t : positives) {
    double f = std::clamp(score(params, t), kClamp, 1.0 - kClamp);
    total += std::log(f);
  }
  for (const auto& t : negatives) {
    double f = std::clamp(score(params, t), kClamp, 1.0 - kClamp);
    total += std::log(1.0 - f);
  }
  return total;
}

void apply_gradients(NamParams& params, const Gradients& grads, double lr,
                     double embedding_lr) {
  for (size_t l = 0; l < params.weights.size(); ++l) {
    double* w = params.weights[l].data.data();
    const double* g = grads.weights[l].data.data();
    size_t n = params.weights[l].data.size();
    for (size_t i = 0; i < n; ++i) w[i] += lr * g[i];
  }
  for (size_t l = 0; l < params.biases.size(); ++l) {
    for (size_t i = 0; i < params.biases[l].size(); ++i) {
      params.biases[l][i] += lr * grads.biases[l][i];
    }
  }
  for (size_t l = 0; l < params.rel_weights.size(); ++l) {
    double* w = params.rel_weights[l].data.data();
    const double* g = grads.rel_weights[l].data.data();
    size_t n = params.rel_weights[l].data.size();
    for (size_t i = 0; i < n; ++i) w[i] += lr * g[i];
  }
  // Index -1 marks an explicit-vector slot owned by the caller.
  if (grads.v1.index >= 0) {
    Vector& v1 = params.v1[grads.v1.index];
    for (size_t i = 0; i < v1.size(); ++i) v1[i] += embedding_lr * grads.v1.grad[i];
  }
  if (grads.v2.index >= 0) {
    Vector& v2 = params.v2[grads.v2.index];
    for (size_t i = 0; i < v2.size(); ++i) v2[i] += embedding_lr * grads.v2.grad[i];
  }
  if (grads.c.index >= 0) {
    Vector& c = params.c[grads.c.index];
    for (size_t i = 0; i < c.size(); ++i) c[i] += embedding_lr * grads.c.grad[i];
  }
}

void train_epoch(NamParams& params, const std::vector<Triple>& positives,
                 const TripleSet& known_positives, int num_entities, double lr,
                 double embedding_lr, double dropout_rate, int negatives_per_positive,
                 Rng& epoch_rng) {
  std::vector<Triple> order(positives);
  shuffle(order, epoch_rng);
  TrainMode mode{&epoch_rng, dropout_rate};
  ForwardCache cache;
  Gradients grads;
  for (const auto& pos : order) {
    forward_into(params, pos.head, pos.relation, pos.tail, &mode, cache);
    backward_into(params, cache, true, grads);
    apply_gradients(params, grads, lr, embedding_lr);
    for (int k = 0; k < negatives_per_positive; ++k) {
      Triple neg = sample_negative(pos, num_entities, known_positives, epoch_rng);
      forward_into(params, neg.head, neg.relation, neg.tail, &mode, cache);
      backward_into(params, cache, false, grads);
      apply_gradients(params, grads, lr, embedding_lr);
    }
  }
}

std::pair<NamParams, TrainReport> fit(const std::vector<LabeledTriple>& train,
                                      const std::vector<LabeledTriple>& dev,
                                      const Vocabulary& vocab, const TrainConfig& config,
                                      const WordVectorTable* words) {
  config.validate();
  if (train.empty()) throw ContractError("fit: empty training set");
  std::vector<Triple> positives;
  TripleSet known;
  for (const auto& lt : train) {
    if (lt.label) {
      positives.push_back(lt.triple);
      known.insert(lt.triple);
    }
  }
  if (positives.empty()) throw ContractError("fit: training set has no positives");
  {
    bool has_pos = false, has_neg = false;
    for (const auto& lt : dev) (lt.label ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw ContractError("fit: dev set must contain both labels");
  }

  Rng master(config.seed);
  NamParams params = init_params(config, vocab, words, master);

  double lr = config.learning_rate;
  double emb_lr = config.embedding_learning_rate;
  TrainReport report;
  NamParams best = params;
  double best_acc = -1.0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng epoch_rng(master.next_u64());
    train_epoch(params, positives, known, vocab.num_entities(), lr, emb_lr,
                config.dropout_rate, config.negatives_per_positive, epoch_rng);

    Rng eval_rng(master.next_u64());
    std::vector<Triple> eval_negatives;
    eval_negatives.reserve(positives.size());
    for (const auto& pos : positives) {
      eval_negatives.push_back(sample_negative(pos, vocab.num_entities(), known, eval_rng));
    }
    double loglik = log_likelihood(params, positives, eval_negatives);

    auto dev_scores = score_all(params, dev);
    std::vector<ScoredLabel> scored(dev.size());
    for (size_t i = 0; i < dev.size(); ++i) scored[i] = {dev_scores[i], dev[i].label};
    double threshold = tune_threshold(scored);
    double dev_acc = accuracy_at(scored, threshold);

    report.epochs.push_back({epoch, loglik, dev_acc, lr});
    if (dev_acc > best_acc) {
      best_acc = dev_acc;
      best = params;
      report.best_epoch = epoch;
      report.best_dev_acc = dev_acc;
      report.best_threshold = threshold;
    } else if (dev_acc < best_acc) {
      lr /= 2.0;
      emb_lr /= 2.0;
    }
  }
  return {std::move(best), std::move(report)};
}

namespace {

struct ParamRef {
  const char* cls;
  double* ptr;
  double analytic;
};

// Random model small enough for finite differences, regenerated until no
// pre-activation sits near the ReLU kink (central differences would
// straddle it).
NamParams random_tiny_params(Variant variant, Rng& rng, int* head, int* rel, int* tail) {
  while (true) {
    int d_e = 1 + static_cast<int>(rng.uniform_int(4));
    int d_r = 1 + static_cast<int>(rng.uniform_int(4));
    int depth = 1 + static_cast<int>(rng.uniform_int(3));
    int n_entities = 3;
    int n_relations = 2;

    NamParams p;
    p.variant = variant;
    auto rand_vec = [&rng](int n) {
      Vector v(n);
      for (double& x : v) x = rng.uniform(-0.5, 0.5);
      return v;
    };
    auto rand_mat = [&rng](int r, int c) {
      Matrix m(r, c);
      for (double& x : m.data) x = rng.uniform(-0.5, 0.5);
      return m;
    };
    int prev = d_e + d_r;
    std::vector<int> widths;
    for (int l = 0; l < depth; ++l) {
      int w = 1 + static_cast<int>(rng.uniform_int(5));
      widths.push_back(w);
      p.weights.push_back(rand_mat(w, prev));
      prev = w;
    }
    if (variant == Variant::kDnn) {
      for (int w : widths) p.biases.push_back(rand_vec(w));
    } else {
      for (int w : widths) p.rel_weights.push_back(rand_mat(w, d_r));
      p.rel_weights.push_back(rand_mat(1, d_r));
    }
    for (int i = 0; i < n_entities; ++i) {
      p.v1.push_back(rand_vec(d_e));
      p.v2.push_back(rand_vec(prev));
    }
    for (int i = 0; i < n_relations; ++i) p.c.push_back(rand_vec(d_r));

    *head = static_cast<int>(rng.uniform_int(n_entities));
    *rel = static_cast<int>(rng.uniform_int(n_relations));
    *tail = static_cast<int>(rng.uniform_int(n_entities));

    auto cache = forward(p, *head, *rel, *tail);
    bool near_kink = false;
    for (const auto& a : cache.a) {
      for (double v : a) near_kink |= std::fabs(v) < 1e-4;
    }
    if (!near_kink) return p;
  }
}

double example_loss(const NamParams& p, int h, int r, int t, bool label) {
  double f = forward(p, h, r, t).f;
  return label ? std::log(f) : std::log(1.0 - f);
}

}  // namespace

GradCheckReport grad_check(Variant variant, int trials, double tolerance, uint64_t seed,
                           GradCorruption corruption) {
  GradCheckReport report;
  report.tolerance = tolerance;
  report.trials = trials;
  std::vector<std::string> class_names = {"W", variant == Variant::kDnn ? "b" : "B",
                                          "v1", "v2", "c"};
  std::vector<double> worst(class_names.size(), 0.0);
  auto class_id = [&class_names](const char* name) {
    for (size_t i = 0; i < class_names.size(); ++i) {
      if (class_names[i] == name) return i;
    }
    throw ContractError("grad_check: unknown class");
  };

  Rng rng(seed);
  constexpr double kStep = 1e-6;
  for (int trial = 0; trial < trials; ++trial) {
    int h, r, t;
    NamParams p = random_tiny_params(variant, rng, &h, &r, &t);
    bool label = rng.uniform() < 0.5;
    auto grads = backward(p, forward(p, h, r, t), label);
    if (corruption == GradCorruption::kWeights) {
      for (auto& m : grads.weights) {
        for (double& g : m.data) g *= 1.1;
      }
    }

    std::vector<ParamRef> refs;
    for (size_t l = 0; l < p.weights.size(); ++l) {
      for (size_t i = 0; i < p.weights[l].data.size(); ++i) {
        refs.push_back({"W", &p.weights[l].data[i], grads.weights[l].data[i]});
      }
    }
    for (size_t l = 0; l < p.biases.size(); ++l) {
      for (size_t i = 0; i < p.biases[l].size(); ++i) {
        refs.push_back({"b", &p.biases[l][i], grads.biases[l][i]});
      }
    }
    for (size_t l = 0; l < p.rel_weights.size(); ++l) {
      for (size_t i = 0; i < p.rel_weights[l].data.size(); ++i) {
        refs.push_back({"B", &p.rel_weights[l].data[i], grads.rel_weights[l].data[i]});
      }
    }
    for (size_t i = 0; i < p.v1[h].size(); ++i) {
      refs.push_back({"v1", &p.v1[h][i], grads.v1.grad[i]});
    }
    for (size_t i = 0; i < p.v2[t].size(); ++i) {
      refs.push_back({"v2", &p.v2[t][i], grads.v2.grad[i]});
    }
    for (size_t i = 0; i < p.c[r].size(); ++i) {
      refs.push_back({"c", &p.c[r][i], grads.c.grad[i]});
    }

    for (auto& ref : refs) {
      double saved = *ref.ptr;
      *ref.ptr = saved + kStep;
      double up = example_loss(p, h, r, t, label);
      *ref.ptr = saved - kStep;
      double down = example_loss(p, h, r, t, label);
      *ref.ptr = saved;
      double numeric = (up - down) / (2.0 * kStep);
      double denom = std::max({std::fabs(ref.analytic), std::fabs(numeric), 1e-3});
      double rel = std::fabs(ref.analytic - numeric) / denom;
      size_t id = class_id(ref.cls);
      worst[id] = std::max(worst[id], rel);
    }
  }

  for (size_t i = 0; i < class_names.size(); ++i) {
    bool pass = worst[i] < tolerance;
    report.classes.push_back({class_names[i], worst[i], pass});
    report.all_pass = report.all_pass && pass;
  }
  return report;
}

void write_grad_check_report(std::ostream& out, const GradCheckReport& report) {
  out.precision(6);
  for (const auto& cls : report.classes) {
    out << cls.name << ": worst relative error " << cls.worst_rel_err << " -> "
        << (cls.pass ? "pass" : "FAIL") << '\n';
  }
  out << (report.all_pass ? "gradcheck passed" : "gradcheck FAILED") << " (" << report.trials
      << " trials, tolerance " << report.tolerance << ")\n";
}

}  // namespace nam
