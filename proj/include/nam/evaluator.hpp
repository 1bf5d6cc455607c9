#pragma once

#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "nam/model.hpp"

// Threshold tuning, binary classification and accuracy reporting for
// triple classification.

namespace nam {

struct ScoredLabel {
  double score = 0.0;
  bool label = false;
};

// Returns the global threshold T maximizing dev accuracy over every
// candidate: midpoints between adjacent distinct sorted scores plus a
// below-min and an above-max sentinel. Ties break toward the smallest
// candidate. Dev must contain both labels.
double tune_threshold(const std::vector<ScoredLabel>& dev);

// score >= T classifies as true.
inline bool classify(double score, double threshold) { return score >= threshold; }

double accuracy_at(const std::vector<ScoredLabel>& items, double threshold);

struct RelationStat {
  int relation = 0;
  int count = 0;
  int correct = 0;
  double accuracy = 0.0;
};

struct EvalReport {
  double threshold = 0.5;
  int total = 0;
  int correct = 0;
  double overall = 0.0;
  double pos_acc = 0.0;
  double neg_acc = 0.0;
  std::vector<RelationStat> per_relation;  // sorted by relation index
};

// Scores every test triple in infer mode and aggregates overall, per-class
// and per-relation accuracies. `threads` > 1 fans scoring out over that
// many workers; aggregation order stays deterministic.
EvalReport evaluate(const NamParams& params, const std::vector<LabeledTriple>& test,
                    double threshold, int threads = 1);

// Per-relation-threshold mode (off by default in the CLI): one tuned
// threshold per relation present in dev.
std::unordered_map<int, double> tune_thresholds_per_relation(
    const std::vector<LabeledTriple>& dev, const std::vector<double>& scores,
    double fallback);
EvalReport evaluate_per_relation(const NamParams& params,
                                 const std::vector<LabeledTriple>& test,
                                 const std::unordered_map<int, double>& thresholds,
                                 double fallback, int threads = 1);

std::vector<double> score_all(const NamParams& params,
                              const std::vector<LabeledTriple>& triples, int threads = 1);

// CSV: one `relation,count,accuracy` row per relation, preceded by a
// `T,overall,pos_acc,neg_acc` summary line.
void write_eval_csv(std::ostream& out, const EvalReport& report, const Vocabulary& vocab);

}  // namespace nam
