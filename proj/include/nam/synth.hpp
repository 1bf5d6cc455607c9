#pragma once

#include <string>
#include <vector>

#include "nam/kb_data.hpp"

// Planted-rule synthetic KB generator: every relation is a random
// bipartite rule over entity clusters (the head's cluster determines the
// tail's cluster), which gives training a learnable ground truth.

namespace nam {

struct SynthSpec {
  int relations = 6;
  int entities = 200;
  int clusters = 2;
  double rule_density = 1.0;  // fraction of (relation, head-cluster) pairs with a rule
  int positives = 2000;
  double dev_fraction = 0.1;
  double test_fraction = 0.1;
  uint64_t seed = 1;
};

struct SynthData {
  Vocabulary vocab;
  std::vector<LabeledTriple> train;  // positives only
  std::vector<LabeledTriple> dev;    // balanced positives + negatives
  std::vector<LabeledTriple> test;   // balanced positives + negatives
};

SynthData generate_synth_kb(const SynthSpec& spec);

// Writes train.tsv / dev.tsv / test.tsv under out_dir.
void write_synth_kb(const SynthData& data, const std::string& out_dir);

}  // namespace nam
