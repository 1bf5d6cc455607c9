#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "nam/transfer.hpp"

using nam::Model;
using nam::Rng;
using nam::TrainConfig;
using nam::Variant;
using nam::Vector;

namespace {

Model base_model(Variant variant, uint64_t seed) {
  Rng rng(seed);
  Model m;
  m.params = namtest::random_params(variant, 4, 3, {5}, 8, 2, rng);
  for (int i = 0; i < 8; ++i) m.vocab.add_entity("e" + std::to_string(i));
  m.vocab.add_relation("r0");
  m.vocab.add_relation("r1");
  return m;
}

TrainConfig adapt_config(uint64_t seed) {
  TrainConfig config;
  config.relation_dim = 3;
  config.learning_rate = 0.05;
  config.embedding_learning_rate = 0.05;
  config.dropout_rate = 0.0;
  config.seed = seed;
  return config;
}

nam::TransferSamples samples_for(const std::vector<std::tuple<int, int, bool>>& raw) {
  nam::TransferSamples s;
  for (auto [h, t, label] : raw) s.usable.push_back({h, t, label});
  return s;
}

Vector expected_init_code(int dim, uint64_t seed) {
  Rng rng(seed);
  Vector v(dim);
  for (double& x : v) x = rng.uniform(-0.1, 0.1);
  return v;
}

}  // namespace

TEST_CASE("map_transfer_samples drops OOV entities and counts them") {
  Model m = base_model(Variant::kRmnn, 1);
  std::vector<nam::RawTriple> raw = {
      {"e0", "CausesDesire", "e3", true},
      {"e1", "CausesDesire", "unicorn", true},
      {"ghost", "CausesDesire", "e2", false},
  };
  auto mapped = nam::map_transfer_samples(m.vocab, raw, "CausesDesire");
  CHECK(mapped.usable.size() == 1);
  CHECK(mapped.dropped_oov == 2);
  CHECK(mapped.usable[0].head == 0);
  CHECK(mapped.usable[0].tail == 3);

  std::vector<nam::RawTriple> wrong = {{"e0", "other_rel", "e1", true}};
  CHECK_THROWS_AS(nam::map_transfer_samples(m.vocab, wrong, "CausesDesire"),
                  nam::ContractError);
}

TEST_CASE("zero-step adaptation returns the untouched initialization") {
  Model m = base_model(Variant::kRmnn, 2);
  auto config = adapt_config(11);
  config.learning_rate = 0.0;
  config.embedding_learning_rate = 0.0;  // no movement: the code stays at init
  auto samples = samples_for({{0, 1, true}, {2, 3, true}});
  auto result = nam::learn_relation_code(m, samples, config);
  CHECK(result.code == expected_init_code(3, 11));
}

TEST_CASE("frozen tensors are verifiably untouched and old scores unchanged") {
  for (Variant variant : {Variant::kDnn, Variant::kRmnn}) {
    Model m = base_model(variant, 3);
    std::vector<double> before;
    for (int h = 0; h < 8; ++h) before.push_back(nam::score(m.params, {h, 1, (h + 3) % 8}));
    uint64_t checksum = nam::params_checksum(m.params);

    auto samples = samples_for({{0, 1, true}, {2, 3, true}, {4, 5, true}, {6, 7, false}});
    auto result = nam::learn_relation_code(m, samples, adapt_config(7));
    CHECK(result.frozen_checksum_before == result.frozen_checksum_after);
    CHECK(result.frozen_checksum_before == checksum);

    Model extended = nam::extend_model(m, "new_rel", result.code);
    for (int h = 0; h < 8; ++h) {
      CHECK(nam::score(extended.params, {h, 1, (h + 3) % 8}) == before[h]);
    }
  }
}

TEST_CASE("code-only learning touches exactly relation_dim scalars") {
  Model m = base_model(Variant::kRmnn, 4);
  auto samples = samples_for({{0, 1, true}, {2, 3, true}, {5, 6, true}});
  auto config = adapt_config(13);
  auto result = nam::learn_relation_code(m, samples, config);

  Model with_init = nam::extend_model(m, "nr", expected_init_code(3, 13));
  Model with_learned = nam::extend_model(m, "nr", result.code);
  long diff = nam::count_differing_scalars(with_init.params, with_learned.params);
  CHECK(diff == m.params.relation_dim());
}

TEST_CASE("learn_relation_code requires a usable positive") {
  Model m = base_model(Variant::kRmnn, 5);
  nam::TransferSamples empty;
  CHECK_THROWS_AS(nam::learn_relation_code(m, empty, adapt_config(1)), nam::ContractError);
  auto only_negative = samples_for({{0, 1, false}});
  CHECK_THROWS_AS(nam::learn_relation_code(m, only_negative, adapt_config(1)),
                  nam::ContractError);
}

TEST_CASE("extend_model grows the relation table by one and wires the code") {
  Model m = base_model(Variant::kRmnn, 6);
  Vector code = {0.5, -0.5, 0.25};
  Model extended = nam::extend_model(m, "brand_new", code);
  CHECK(extended.vocab.num_relations() == m.vocab.num_relations() + 1);
  CHECK(extended.params.c.size() == m.params.c.size() + 1);

  // The new relation's score responds to its code; old relations do not.
  int new_rel = extended.vocab.num_relations() - 1;
  double before = nam::score(extended.params, {0, new_rel, 1});
  double old_before = nam::score(extended.params, {0, 0, 1});
  extended.params.c[new_rel][0] += 0.5;
  CHECK(nam::score(extended.params, {0, new_rel, 1}) != before);
  CHECK(nam::score(extended.params, {0, 0, 1}) == old_before);

  CHECK_THROWS_AS(nam::extend_model(m, "r0", code), nam::ContractError);
  CHECK_THROWS_AS(nam::extend_model(m, "bad_width", {1.0}), nam::ContractError);
}

TEST_CASE("full-update transfer with zero rates reports identical accuracies") {
  Model m = base_model(Variant::kDnn, 7);
  auto config = adapt_config(3);
  config.learning_rate = 0.0;
  config.embedding_learning_rate = 0.0;
  auto samples = samples_for({{0, 1, true}, {2, 3, true}});
  std::vector<nam::LabeledTriple> orig = {
      {{0, 0, 1}, true}, {{1, 0, 2}, false}, {{3, 1, 4}, true}, {{5, 1, 6}, false}};
  auto result = nam::full_update_transfer(m, "nr", samples, orig, config);
  CHECK(result.orig_acc_before == result.orig_acc_after);
  CHECK(result.model.vocab.num_relations() == 3);
}

TEST_CASE("full-update transfer actually moves original scores") {
  Model m = base_model(Variant::kDnn, 8);
  auto samples = samples_for({{0, 1, true}, {1, 2, true}, {2, 3, true}, {3, 4, true}});
  std::vector<nam::LabeledTriple> orig = {
      {{0, 0, 1}, true}, {{1, 0, 2}, false}, {{3, 1, 4}, true}, {{5, 1, 6}, false}};
  auto config = adapt_config(5);
  auto result = nam::full_update_transfer(m, "nr", samples, orig, config);
  Model at_init = nam::extend_model(m, "nr", expected_init_code(3, config.seed));
  CHECK(nam::count_differing_scalars(at_init.params, result.model.params) >
        m.params.relation_dim());
}

TEST_CASE("transfer curve covers the requested fractions and stays in range") {
  Model m = base_model(Variant::kRmnn, 9);
  auto samples = samples_for(
      {{0, 1, true}, {1, 2, true}, {2, 3, true}, {3, 4, true}, {4, 5, true}, {5, 6, true}});
  std::vector<nam::AdaptSample> eval = {{0, 1, true}, {1, 2, true}, {0, 5, false},
                                        {3, 1, false}};
  std::vector<nam::LabeledTriple> orig = {
      {{0, 0, 1}, true}, {{1, 0, 2}, false}, {{3, 1, 4}, true}, {{5, 1, 6}, false}};
  std::vector<double> fractions = {0.2, 0.5, 1.0};
  for (auto mode : {nam::TransferMode::kCodeOnly, nam::TransferMode::kFullUpdate}) {
    auto curve = nam::transfer_curve(m, "nr", samples, eval, orig, fractions, mode,
                                     adapt_config(21));
    REQUIRE(curve.size() == 3);
    for (size_t i = 0; i < curve.size(); ++i) {
      CHECK(curve[i].fraction == fractions[i]);
      CHECK(curve[i].new_rel_acc >= 0.0);
      CHECK(curve[i].new_rel_acc <= 1.0);
      CHECK(curve[i].orig_rel_acc >= 0.0);
      CHECK(curve[i].orig_rel_acc <= 1.0);
    }
  }

  std::ostringstream out;
  auto curve = nam::transfer_curve(m, "nr", samples, eval, orig, {1.0},
                                   nam::TransferMode::kCodeOnly, adapt_config(21));
  nam::write_curve_csv(out, curve);
  CHECK(out.str().rfind("fraction,new_rel_acc,orig_rel_acc\n", 0) == 0);
}

TEST_CASE("code-only curve repeats are bit-identical") {
  Model m = base_model(Variant::kRmnn, 10);
  auto samples = samples_for({{0, 1, true}, {1, 2, true}, {2, 3, true}});
  std::vector<nam::AdaptSample> eval = {{0, 1, true}, {3, 1, false}};
  std::vector<nam::LabeledTriple> orig = {{{0, 0, 1}, true}, {{1, 0, 2}, false}};
  auto once = nam::transfer_curve(m, "nr", samples, eval, orig, {0.5, 1.0},
                                  nam::TransferMode::kCodeOnly, adapt_config(33));
  auto twice = nam::transfer_curve(m, "nr", samples, eval, orig, {0.5, 1.0},
                                   nam::TransferMode::kCodeOnly, adapt_config(33));
  for (size_t i = 0; i < once.size(); ++i) {
    CHECK(once[i].new_rel_acc == twice[i].new_rel_acc);
    CHECK(once[i].orig_rel_acc == twice[i].orig_rel_acc);
  }
}
