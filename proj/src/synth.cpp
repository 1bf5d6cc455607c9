#include "nam/synth.hpp"

#include <cmath>
#include <filesystem>

namespace nam {

SynthData generate_synth_kb(const SynthSpec& spec) {
  if (spec.relations < 1) throw ContractError("synth: need at least one relation");
  if (spec.entities < 2) throw ContractError("synth: need at least two entities");
  if (spec.clusters < 2 || spec.clusters > spec.entities) {
    throw ContractError("synth: clusters must be in [2, entities]");
  }
  if (spec.rule_density < 0.0 || spec.rule_density > 1.0) {
    throw ContractError("synth: rule density must be in [0, 1]");
  }
  if (spec.positives < 1) throw ContractError("synth: need at least one positive");
  if (spec.dev_fraction < 0.0 || spec.test_fraction < 0.0 ||
      spec.dev_fraction + spec.test_fraction >= 1.0) {
    throw ContractError("synth: dev/test fractions must be non-negative and sum below 1");
  }

  SynthData data;
  for (int i = 0; i < spec.entities; ++i) {
    data.vocab.add_entity("e" + std::to_string(i));
  }
  for (int r = 0; r < spec.relations; ++r) {
    data.vocab.add_relation("r" + std::to_string(r));
  }

  Rng rng(spec.seed);
  auto cluster_of = [&spec](int entity) { return entity % spec.clusters; };
  auto cluster_size = [&spec](int cluster) {
    return (spec.entities - 1 - cluster) / spec.clusters + 1;
  };

  // target[r][g] = tail cluster for heads of cluster g under relation r.
  std::vector<std::vector<int>> target(spec.relations,
                                       std::vector<int>(spec.clusters, -1));
  for (int r = 0; r < spec.relations; ++r) {
    for (int g = 0; g < spec.clusters; ++g) {
      if (rng.uniform() < spec.rule_density) {
        target[r][g] = static_cast<int>(rng.uniform_int(spec.clusters));
      }
    }
  }

  TripleSet seen;
  std::vector<Triple> positives;
  long attempts = 0;
  const long max_attempts = 200L * spec.positives + 1000;
  while (static_cast<int>(positives.size()) < spec.positives && attempts < max_attempts) {
    ++attempts;
    int r = static_cast<int>(rng.uniform_int(spec.relations));
    int h = static_cast<int>(rng.uniform_int(spec.entities));
    int tc = target[r][cluster_of(h)];
    if (tc < 0) continue;
    int t = tc + spec.clusters * static_cast<int>(rng.uniform_int(cluster_size(tc)));
    Triple triple{h, r, t};
    if (!seen.insert(triple).second) continue;
    positives.push_back(triple);
  }
  if (static_cast<int>(positives.size()) < spec.positives) {
    throw DataError("synth: could not generate " + std::to_string(spec.positives) +
                    " distinct positives; lower the count or raise rule density");
  }

  shuffle(positives, rng);
  int n_dev = static_cast<int>(std::lround(spec.positives * spec.dev_fraction));
  int n_test = static_cast<int>(std::lround(spec.positives * spec.test_fraction));

  auto corrupt = [&](const Triple& pos) {
    int tc = target[pos.relation][cluster_of(pos.head)];
    int t;
    do {
      t = static_cast<int>(rng.uniform_int(spec.entities));
    } while (cluster_of(t) == tc);
    return Triple{pos.head, pos.relation, t};
  };

  auto take_split = [&](int begin, int count, bool with_negatives) {
    std::vector<LabeledTriple> out;
    out.reserve(with_negatives ? 2 * count : count);
    for (int i = begin; i < begin + count; ++i) out.push_back({positives[i], true});
    if (with_negatives) {
      for (int i = begin; i < begin + count; ++i) out.push_back({corrupt(positives[i]), false});
    }
    return out;
  };

  data.dev = take_split(0, n_dev, true);
  data.test = take_split(n_dev, n_test, true);
  data.train = take_split(n_dev + n_test, spec.positives - n_dev - n_test, false);
  return data;
}

void write_synth_kb(const SynthData& data, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_triples(out_dir + "/train.tsv", data.train, data.vocab);
  write_triples(out_dir + "/dev.tsv", data.dev, data.vocab);
  write_triples(out_dir + "/test.tsv", data.test, data.vocab);
}

}  // namespace nam
