#include "nam/evaluator.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <ostream>
#include <thread>

namespace nam {

double tune_threshold(const std::vector<ScoredLabel>& dev) {
  if (dev.empty()) throw ContractError("tune_threshold: dev set is empty");
  bool has_pos = false, has_neg = false;
  for (const auto& d : dev) (d.label ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw ContractError("tune_threshold: dev set must contain both labels");
  }

  std::vector<ScoredLabel> sorted(dev);
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });
  const int n = static_cast<int>(sorted.size());
  int total_pos = 0;
  for (const auto& d : sorted) total_pos += d.label ? 1 : 0;

  // Walk candidates in increasing order. At the below-min sentinel every
  // item classifies true. Moving the threshold above a score group flips
  // that group to false.
  double best_t = sorted.front().score - 1.0;
  int correct = total_pos;
  int best_correct = correct;
  int i = 0;
  while (i < n) {
    double s = sorted[i].score;
    int j = i;
    while (j < n && sorted[j].score == s) {
      correct += sorted[j].label ? -1 : 1;
      ++j;
    }
    double candidate = j < n ? (s + sorted[j].score) / 2.0 : s + 1.0;
    if (correct > best_correct) {
      best_correct = correct;
      best_t = candidate;
    }
    i = j;
  }
  return best_t;
}

double accuracy_at(const std::vector<ScoredLabel>& items, double threshold) {
  if (items.empty()) throw ContractError("accuracy_at: empty set");
  int correct = 0;
  for (const auto& it : items) {
    if (classify(it.score, threshold) == it.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(items.size());
}

std::vector<double> score_all(const NamParams& params,
                              const std::vector<LabeledTriple>& triples, int threads) {
  std::vector<double> scores(triples.size());
  auto worker = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) scores[i] = score(params, triples[i].triple);
  };
  if (threads <= 1 || triples.size() < 64) {
    worker(0, triples.size());
    return scores;
  }
  std::vector<std::thread> pool;
  size_t chunk = (triples.size() + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    size_t begin = t * chunk;
    size_t end = std::min(triples.size(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(worker, begin, end);
  }
  for (auto& th : pool) th.join();
  return scores;
}

namespace {

EvalReport aggregate(const std::vector<LabeledTriple>& test,
                     const std::vector<double>& scores,
                     const std::function<double(int)>& threshold_for, double summary_t) {
  if (test.empty()) throw ContractError("evaluate: test set is empty");
  EvalReport report;
  report.threshold = summary_t;
  report.total = static_cast<int>(test.size());
  int pos_total = 0, neg_total = 0, pos_correct = 0, neg_correct = 0;
  std::map<int, RelationStat> by_relation;
  for (size_t i = 0; i < test.size(); ++i) {
    const auto& lt = test[i];
    bool predicted = classify(scores[i], threshold_for(lt.triple.relation));
    bool ok = predicted == lt.label;
    report.correct += ok ? 1 : 0;
    if (lt.label) {
      ++pos_total;
      pos_correct += ok ? 1 : 0;
    } else {
      ++neg_total;
      neg_correct += ok ? 1 : 0;
    }
    auto& stat = by_relation[lt.triple.relation];
    stat.relation = lt.triple.relation;
    stat.count += 1;
    stat.correct += ok ? 1 : 0;
  }
  report.overall = static_cast<double>(report.correct) / report.total;
  report.pos_acc = pos_total ? static_cast<double>(pos_correct) / pos_total : 0.0;
  report.neg_acc = neg_total ? static_cast<double>(neg_correct) / neg_total : 0.0;
  for (auto& [rel, stat] : by_relation) {
    stat.accuracy = static_cast<double>(stat.correct) / stat.count;
    report.per_relation.push_back(stat);
  }
  return report;
}

}  // namespace

EvalReport evaluate(const NamParams& params, const std::vector<LabeledTriple>& test,
                    double threshold, int threads) {
  auto scores = score_all(params, test, threads);
  return aggregate(test, scores, [threshold](int) { return threshold; }, threshold);
}

std::unordered_map<int, double> tune_thresholds_per_relation(
    const std::vector<LabeledTriple>& dev, const std::vector<double>& scores,
    double fallback) {
  std::unordered_map<int, std::vector<ScoredLabel>> grouped;
  for (size_t i = 0; i < dev.size(); ++i) {
    grouped[dev[i].triple.relation].push_back({scores[i], dev[i].label});
  }
  std::unordered_map<int, double> thresholds;
  for (const auto& [rel, items] : grouped) {
    bool has_pos = false, has_neg = false;
    for (const auto& it : items) (it.label ? has_pos : has_neg) = true;
    thresholds[rel] = has_pos && has_neg ? tune_threshold(items) : fallback;
  }
  return thresholds;
}

EvalReport evaluate_per_relation(const NamParams& params,
                                 const std::vector<LabeledTriple>& test,
                                 const std::unordered_map<int, double>& thresholds,
                                 double fallback, int threads) {
  auto scores = score_all(params, test, threads);
  auto lookup = [&thresholds, fallback](int rel) {
    auto it = thresholds.find(rel);
    return it == thresholds.end() ? fallback : it->second;
  };
  return aggregate(test, scores, lookup, fallback);
}

void write_eval_csv(std::ostream& out, const EvalReport& report, const Vocabulary& vocab) {
  out.precision(17);
  out << report.threshold << ',' << report.overall << ',' << report.pos_acc << ','
      << report.neg_acc << '\n';
  for (const auto& stat : report.per_relation) {
    out << vocab.relations()[stat.relation] << ',' << stat.count << ',' << stat.accuracy
        << '\n';
  }
}

}  // namespace nam
