#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nam/checkpoint.hpp"
#include "nam/evaluator.hpp"
#include "nam/synth.hpp"
#include "nam/trainer.hpp"
#include "nam/transfer.hpp"
#include "nam/winograd.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_nam, m) {
  m.doc() = "Neural association models: Pr(E2|E1) over KB triples and cause-effect events";

  py::register_exception<nam::ContractError>(m, "ContractError");
  py::register_exception<nam::DataError>(m, "DataError");

  // core math
  py::class_<nam::Rng>(m, "Rng")
      .def(py::init<uint64_t>(), py::arg("seed"))
      .def("next_u64", &nam::Rng::next_u64)
      .def("uniform", py::overload_cast<>(&nam::Rng::uniform))
      .def("uniform_range", py::overload_cast<double, double>(&nam::Rng::uniform))
      .def("uniform_int", &nam::Rng::uniform_int);

  py::class_<nam::Matrix>(m, "Matrix")
      .def(py::init<int, int>(), py::arg("rows"), py::arg("cols"))
      .def_readwrite("rows", &nam::Matrix::rows)
      .def_readwrite("cols", &nam::Matrix::cols)
      .def_readwrite("data", &nam::Matrix::data)
      .def("at", py::overload_cast<int, int>(&nam::Matrix::at, py::const_))
      .def_static("identity", &nam::Matrix::identity);

  m.def("relu", &nam::relu);
  m.def("sigmoid", &nam::sigmoid);
  m.def("affine", &nam::affine);
  m.def("dot", &nam::dot);
  m.def("glorot_init", &nam::glorot_init);
  m.def("dropout_mask", &nam::dropout_mask);

  // kb data
  py::class_<nam::Vocabulary>(m, "Vocabulary")
      .def(py::init<>())
      .def("add_entity", &nam::Vocabulary::add_entity)
      .def("add_relation", &nam::Vocabulary::add_relation)
      .def("add_word", &nam::Vocabulary::add_word)
      .def("entity_id", &nam::Vocabulary::entity_id)
      .def("relation_id", &nam::Vocabulary::relation_id)
      .def("entities", &nam::Vocabulary::entities)
      .def("relations", &nam::Vocabulary::relations)
      .def("num_entities", &nam::Vocabulary::num_entities)
      .def("num_relations", &nam::Vocabulary::num_relations);

  py::class_<nam::Triple>(m, "Triple")
      .def(py::init([](int h, int r, int t) { return nam::Triple{h, r, t}; }),
           py::arg("head"), py::arg("relation"), py::arg("tail"))
      .def_readwrite("head", &nam::Triple::head)
      .def_readwrite("relation", &nam::Triple::relation)
      .def_readwrite("tail", &nam::Triple::tail)
      .def(py::self == py::self);

  py::class_<nam::LabeledTriple>(m, "LabeledTriple")
      .def(py::init([](nam::Triple t, bool label) { return nam::LabeledTriple{t, label}; }),
           py::arg("triple"), py::arg("label"))
      .def_readwrite("triple", &nam::LabeledTriple::triple)
      .def_readwrite("label", &nam::LabeledTriple::label);

  py::class_<nam::WordVectorTable>(m, "WordVectorTable")
      .def(py::init<>())
      .def_readwrite("dimension", &nam::WordVectorTable::dimension)
      .def_readwrite("vectors", &nam::WordVectorTable::vectors);

  m.def("load_triples", &nam::load_triples, py::arg("path"), py::arg("vocab"),
        py::arg("extend_vocab"));
  m.def("write_triples", &nam::write_triples);
  m.def("load_word_vectors", &nam::load_word_vectors);
  m.def("entity_tokens", &nam::entity_tokens);
  m.def(
      "compose_phrase",
      [](const std::vector<std::string>& tokens, const nam::WordVectorTable& table) {
        nam::Bow bow = nam::compose_phrase(tokens, table);
        return py::make_tuple(bow.vec, bow.all_oov);
      },
      "Mean of the in-table token vectors; returns (vector, all_oov)");
  m.def(
      "sample_negative",
      [](const nam::Triple& pos, int num_entities,
         const std::vector<nam::Triple>& known_positives, nam::Rng& rng) {
        nam::TripleSet known(known_positives.begin(), known_positives.end());
        return nam::sample_negative(pos, num_entities, known, rng);
      },
      py::arg("positive"), py::arg("num_entities"), py::arg("known_positives"),
      py::arg("rng"));

  // model
  py::enum_<nam::Variant>(m, "Variant")
      .value("DNN", nam::Variant::kDnn)
      .value("RMNN", nam::Variant::kRmnn);

  py::class_<nam::NamParams>(m, "NamParams")
      .def(py::init<>())
      .def_readwrite("variant", &nam::NamParams::variant)
      .def_readwrite("weights", &nam::NamParams::weights)
      .def_readwrite("biases", &nam::NamParams::biases)
      .def_readwrite("rel_weights", &nam::NamParams::rel_weights)
      .def_readwrite("v1", &nam::NamParams::v1)
      .def_readwrite("v2", &nam::NamParams::v2)
      .def_readwrite("c", &nam::NamParams::c)
      .def("depth", &nam::NamParams::depth)
      .def("entity_dim", &nam::NamParams::entity_dim)
      .def("relation_dim", &nam::NamParams::relation_dim)
      .def("top_width", &nam::NamParams::top_width)
      .def("validate", &nam::NamParams::validate);

  m.def("score", &nam::score, py::arg("params"), py::arg("triple"));
  m.def("params_checksum", &nam::params_checksum);
  m.def("count_differing_scalars", &nam::count_differing_scalars);

  // trainer
  py::class_<nam::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("entity_dim", &nam::TrainConfig::entity_dim)
      .def_readwrite("relation_dim", &nam::TrainConfig::relation_dim)
      .def_readwrite("hidden_layers", &nam::TrainConfig::hidden_layers)
      .def_readwrite("hidden_width", &nam::TrainConfig::hidden_width)
      .def_readwrite("learning_rate", &nam::TrainConfig::learning_rate)
      .def_readwrite("embedding_learning_rate", &nam::TrainConfig::embedding_learning_rate)
      .def_readwrite("dropout_rate", &nam::TrainConfig::dropout_rate)
      .def_readwrite("max_epochs", &nam::TrainConfig::max_epochs)
      .def_readwrite("negatives_per_positive", &nam::TrainConfig::negatives_per_positive)
      .def_readwrite("seed", &nam::TrainConfig::seed)
      .def_readwrite("variant", &nam::TrainConfig::variant);

  py::class_<nam::EpochRecord>(m, "EpochRecord")
      .def_readonly("epoch", &nam::EpochRecord::epoch)
      .def_readonly("loglik", &nam::EpochRecord::loglik)
      .def_readonly("dev_acc", &nam::EpochRecord::dev_acc)
      .def_readonly("lr", &nam::EpochRecord::lr);

  py::class_<nam::TrainReport>(m, "TrainReport")
      .def_readonly("epochs", &nam::TrainReport::epochs)
      .def_readonly("best_epoch", &nam::TrainReport::best_epoch)
      .def_readonly("best_dev_acc", &nam::TrainReport::best_dev_acc)
      .def_readonly("best_threshold", &nam::TrainReport::best_threshold);

  m.def("log_likelihood", &nam::log_likelihood);
  m.def("fit", &nam::fit, py::arg("train"), py::arg("dev"), py::arg("vocab"),
        py::arg("config"), py::arg("words") = nullptr);
  m.def(
      "grad_check",
      [](nam::Variant variant, int trials, double tol, uint64_t seed) {
        auto report = nam::grad_check(variant, trials, tol, seed);
        std::ostringstream text;
        nam::write_grad_check_report(text, report);
        return py::make_tuple(report.all_pass, text.str());
      },
      py::arg("variant"), py::arg("trials"), py::arg("tolerance"), py::arg("seed"));

  // evaluator
  py::class_<nam::RelationStat>(m, "RelationStat")
      .def_readonly("relation", &nam::RelationStat::relation)
      .def_readonly("count", &nam::RelationStat::count)
      .def_readonly("correct", &nam::RelationStat::correct)
      .def_readonly("accuracy", &nam::RelationStat::accuracy);

  py::class_<nam::EvalReport>(m, "EvalReport")
      .def_readonly("threshold", &nam::EvalReport::threshold)
      .def_readonly("total", &nam::EvalReport::total)
      .def_readonly("correct", &nam::EvalReport::correct)
      .def_readonly("overall", &nam::EvalReport::overall)
      .def_readonly("pos_acc", &nam::EvalReport::pos_acc)
      .def_readonly("neg_acc", &nam::EvalReport::neg_acc)
      .def_readonly("per_relation", &nam::EvalReport::per_relation);

  m.def(
      "tune_threshold",
      [](const std::vector<std::pair<double, bool>>& dev) {
        std::vector<nam::ScoredLabel> scored;
        scored.reserve(dev.size());
        for (const auto& [s, l] : dev) scored.push_back({s, l});
        return nam::tune_threshold(scored);
      },
      "Best global threshold for (score, label) pairs");
  m.def("classify", &nam::classify);
  m.def("evaluate", &nam::evaluate, py::arg("params"), py::arg("test"), py::arg("threshold"),
        py::arg("threads") = 1);

  // checkpoint
  py::class_<nam::Model>(m, "Model")
      .def(py::init<>())
      .def_readwrite("vocab", &nam::Model::vocab)
      .def_readwrite("params", &nam::Model::params)
      .def_readwrite("threshold", &nam::Model::threshold);

  m.def("save_model", &nam::save_model);
  m.def("load_model", &nam::load_model);

  // transfer
  py::class_<nam::AdaptSample>(m, "AdaptSample")
      .def(py::init([](int h, int t, bool label) { return nam::AdaptSample{h, t, label}; }),
           py::arg("head"), py::arg("tail"), py::arg("label"))
      .def_readwrite("head", &nam::AdaptSample::head)
      .def_readwrite("tail", &nam::AdaptSample::tail)
      .def_readwrite("label", &nam::AdaptSample::label);

  py::class_<nam::TransferSamples>(m, "TransferSamples")
      .def(py::init<>())
      .def_readwrite("usable", &nam::TransferSamples::usable)
      .def_readwrite("dropped_oov", &nam::TransferSamples::dropped_oov);

  py::class_<nam::CodeLearnResult>(m, "CodeLearnResult")
      .def_readonly("code", &nam::CodeLearnResult::code)
      .def_readonly("frozen_checksum_before", &nam::CodeLearnResult::frozen_checksum_before)
      .def_readonly("frozen_checksum_after", &nam::CodeLearnResult::frozen_checksum_after);

  m.def("learn_relation_code", &nam::learn_relation_code);
  m.def("extend_model", &nam::extend_model);

  py::enum_<nam::TransferMode>(m, "TransferMode")
      .value("CODE_ONLY", nam::TransferMode::kCodeOnly)
      .value("FULL_UPDATE", nam::TransferMode::kFullUpdate);

  py::class_<nam::CurvePoint>(m, "CurvePoint")
      .def_readonly("fraction", &nam::CurvePoint::fraction)
      .def_readonly("new_rel_acc", &nam::CurvePoint::new_rel_acc)
      .def_readonly("orig_rel_acc", &nam::CurvePoint::orig_rel_acc);

  m.def("transfer_curve", &nam::transfer_curve);

  // winograd
  py::enum_<nam::Voice>(m, "Voice")
      .value("ACTIVE", nam::Voice::kActive)
      .value("PASSIVE", nam::Voice::kPassive);
  py::enum_<nam::Polarity>(m, "Polarity")
      .value("POSITIVE", nam::Polarity::kPositive)
      .value("NEGATIVE", nam::Polarity::kNegative);

  py::class_<nam::Pattern>(m, "Pattern")
      .def(py::init([](nam::Voice v, nam::Polarity p) { return nam::Pattern{v, p}; }),
           py::arg("voice"), py::arg("polarity"))
      .def_readwrite("voice", &nam::Pattern::voice)
      .def_readwrite("polarity", &nam::Pattern::polarity);

  m.def("pattern_index", &nam::pattern_index);
  m.def("pair_relation_index", &nam::pair_relation_index);

  py::class_<nam::PatternedPhrase>(m, "PatternedPhrase")
      .def(py::init([](std::vector<std::string> tokens, nam::Pattern pattern) {
             return nam::PatternedPhrase{std::move(tokens), pattern};
           }),
           py::arg("tokens"), py::arg("pattern"))
      .def_readwrite("tokens", &nam::PatternedPhrase::tokens)
      .def_readwrite("pattern", &nam::PatternedPhrase::pattern);

  py::class_<nam::CauseEffectPair>(m, "CauseEffectPair")
      .def(py::init([](nam::PatternedPhrase c, nam::PatternedPhrase e, long count) {
             return nam::CauseEffectPair{std::move(c), std::move(e), count};
           }),
           py::arg("cause"), py::arg("effect"), py::arg("count") = 1)
      .def_readwrite("cause", &nam::CauseEffectPair::cause)
      .def_readwrite("effect", &nam::CauseEffectPair::effect)
      .def_readwrite("count", &nam::CauseEffectPair::count);

  py::class_<nam::SchemaProblem>(m, "SchemaProblem")
      .def(py::init([](nam::PatternedPhrase a, nam::PatternedPhrase b, nam::PatternedPhrase q,
                       char gold) {
             return nam::SchemaProblem{std::move(a), std::move(b), std::move(q), gold};
           }),
           py::arg("candidate_a"), py::arg("candidate_b"), py::arg("query"), py::arg("gold"))
      .def_readwrite("candidate_a", &nam::SchemaProblem::candidate_a)
      .def_readwrite("candidate_b", &nam::SchemaProblem::candidate_b)
      .def_readwrite("query", &nam::SchemaProblem::query)
      .def_readwrite("gold", &nam::SchemaProblem::gold);

  py::enum_<nam::ScorerKind>(m, "ScorerKind")
      .value("TRANSMAT", nam::ScorerKind::kTransMat)
      .value("RELATIONVEC", nam::ScorerKind::kRelationVec);

  py::class_<nam::WinogradConfig>(m, "WinogradConfig")
      .def(py::init<>())
      .def_readwrite("kind", &nam::WinogradConfig::kind)
      .def_readwrite("transmat_trunk", &nam::WinogradConfig::transmat_trunk)
      .def_readwrite("word_dim", &nam::WinogradConfig::word_dim)
      .def_readwrite("relation_dim", &nam::WinogradConfig::relation_dim)
      .def_readwrite("hidden_layers", &nam::WinogradConfig::hidden_layers)
      .def_readwrite("hidden_width", &nam::WinogradConfig::hidden_width)
      .def_readwrite("learning_rate", &nam::WinogradConfig::learning_rate)
      .def_readwrite("embedding_learning_rate",
                     &nam::WinogradConfig::embedding_learning_rate)
      .def_readwrite("dropout_rate", &nam::WinogradConfig::dropout_rate)
      .def_readwrite("epochs", &nam::WinogradConfig::epochs)
      .def_readwrite("seed", &nam::WinogradConfig::seed);

  py::class_<nam::WinogradModel>(m, "WinogradModel")
      .def(py::init<>())
      .def_readwrite("kind", &nam::WinogradModel::kind)
      .def_readwrite("trunk", &nam::WinogradModel::trunk)
      .def_readwrite("pattern_mats", &nam::WinogradModel::pattern_mats)
      .def_readwrite("words", &nam::WinogradModel::words);

  m.def("train_winograd", &nam::train_winograd, py::arg("pairs"), py::arg("pretrained"),
        py::arg("config"));
  m.def(
      "score_pair",
      [](const nam::WinogradModel& model, const nam::PatternedPhrase& cause,
         const nam::PatternedPhrase& effect) {
        auto s = nam::score_pair(model, cause, effect);
        return py::make_tuple(s.p, s.cause_all_oov, s.effect_all_oov);
      },
      "Returns (probability, cause_all_oov, effect_all_oov)");

  py::class_<nam::Resolution>(m, "Resolution")
      .def_readonly("answer", &nam::Resolution::answer)
      .def_readonly("tie", &nam::Resolution::tie)
      .def_readonly("p_a", &nam::Resolution::p_a)
      .def_readonly("p_b", &nam::Resolution::p_b)
      .def_readonly("usable", &nam::Resolution::usable);

  m.def("resolve", &nam::resolve);
  m.def("argmax_answer", [](double pa, double pb) {
    bool tie = false;
    char answer = nam::argmax_answer(pa, pb, &tie);
    return py::make_tuple(answer, tie);
  });

  py::class_<nam::SchemaEvalReport>(m, "SchemaEvalReport")
      .def_readonly("total", &nam::SchemaEvalReport::total)
      .def_readonly("usable", &nam::SchemaEvalReport::usable)
      .def_readonly("excluded", &nam::SchemaEvalReport::excluded)
      .def_readonly("correct", &nam::SchemaEvalReport::correct)
      .def_readonly("accuracy", &nam::SchemaEvalReport::accuracy);

  m.def("evaluate_schema_set", &nam::evaluate_schema_set);
  m.def("load_pairs", &nam::load_pairs);
  m.def("write_pairs", &nam::write_pairs);
  m.def("load_schemas", &nam::load_schemas);
  m.def("write_schemas", &nam::write_schemas);
  m.def("save_winograd_model", &nam::save_winograd_model);
  m.def("load_winograd_model", &nam::load_winograd_model);

  // synth
  py::class_<nam::SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("relations", &nam::SynthSpec::relations)
      .def_readwrite("entities", &nam::SynthSpec::entities)
      .def_readwrite("clusters", &nam::SynthSpec::clusters)
      .def_readwrite("rule_density", &nam::SynthSpec::rule_density)
      .def_readwrite("positives", &nam::SynthSpec::positives)
      .def_readwrite("dev_fraction", &nam::SynthSpec::dev_fraction)
      .def_readwrite("test_fraction", &nam::SynthSpec::test_fraction)
      .def_readwrite("seed", &nam::SynthSpec::seed);

  py::class_<nam::SynthData>(m, "SynthData")
      .def_readonly("vocab", &nam::SynthData::vocab)
      .def_readonly("train", &nam::SynthData::train)
      .def_readonly("dev", &nam::SynthData::dev)
      .def_readonly("test", &nam::SynthData::test);

  m.def("generate_synth_kb", &nam::generate_synth_kb);
  m.def("write_synth_kb", &nam::write_synth_kb);
}
