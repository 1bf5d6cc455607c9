// nam: train, evaluate, transfer and resolve with neural association models.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nam/checkpoint.hpp"
#include "nam/evaluator.hpp"
#include "nam/synth.hpp"
#include "nam/trainer.hpp"
#include "nam/transfer.hpp"
#include "nam/winograd.hpp"

namespace {

struct CommonTrainFlags {
  nam::TrainConfig config;
  std::string variant = "rmnn";
  bool emb_lr_set = false;
};

// The shared hyperparameter flags; underscore aliases keep config files
// in plain `key = value` form.
void add_train_options(CLI::App* cmd, CommonTrainFlags& flags) {
  cmd->add_option("--variant", flags.variant, "Model variant: dnn or rmnn")
      ->check(CLI::IsMember({"dnn", "rmnn"}));
  cmd->add_option("--entity-dim,--entity_dim", flags.config.entity_dim);
  cmd->add_option("--relation-dim,--relation_dim", flags.config.relation_dim);
  cmd->add_option("--hidden-layers,--hidden_layers", flags.config.hidden_layers);
  cmd->add_option("--hidden-width,--hidden_width", flags.config.hidden_width);
  cmd->add_option("--learning-rate,--learning_rate", flags.config.learning_rate);
  auto* emb = cmd->add_option("--embedding-learning-rate,--embedding_learning_rate",
                              flags.config.embedding_learning_rate);
  cmd->add_option("--dropout,--dropout_rate", flags.config.dropout_rate);
  cmd->add_option("--max-epochs,--max_epochs", flags.config.max_epochs);
  cmd->add_option("--negatives,--negatives_per_positive",
                  flags.config.negatives_per_positive);
  cmd->add_option("--seed", flags.config.seed);
  cmd->parse_complete_callback([&flags, emb]() {
    flags.config.variant = nam::variant_from_name(flags.variant);
    flags.emb_lr_set = emb->count() > 0;
    if (!flags.emb_lr_set) flags.config.embedding_learning_rate = flags.config.learning_rate;
  });
}

std::ostream& open_or_stdout(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw nam::DataError("cannot write report file: " + path);
  return file;
}

int run_train(const std::string& train_path, const std::string& dev_path,
              const std::string& vectors_path, const std::string& out_path,
              const std::string& report_path, const nam::TrainConfig& config) {
  nam::Vocabulary vocab;
  auto train = nam::load_triples(train_path, vocab, true);
  auto dev = nam::load_triples(dev_path, vocab, true);
  nam::WordVectorTable words;
  const nam::WordVectorTable* words_ptr = nullptr;
  if (!vectors_path.empty()) {
    words = nam::load_word_vectors(vectors_path);
    words_ptr = &words;
  }
  auto [params, report] = nam::fit(train, dev, vocab, config, words_ptr);
  nam::Model model{vocab, std::move(params), report.best_threshold};
  if (!out_path.empty()) nam::save_model(out_path, model);
  std::ofstream file;
  nam::write_report_csv(open_or_stdout(report_path, file), report);
  std::cerr << "best epoch " << report.best_epoch << ", dev accuracy " << report.best_dev_acc
            << ", threshold " << report.best_threshold << '\n';
  return 0;
}

int run_eval(const std::string& model_path, const std::string& test_path,
             const std::string& dev_path, double threshold, bool threshold_set,
             bool per_relation, const std::string& report_path, int threads) {
  nam::Model model = nam::load_model(model_path);
  auto test = nam::load_triples(test_path, model.vocab, false);
  nam::EvalReport report;
  if (per_relation) {
    if (dev_path.empty()) {
      throw nam::DataError("--per-relation-thresholds needs --dev to tune on");
    }
    auto dev = nam::load_triples(dev_path, model.vocab, false);
    auto dev_scores = nam::score_all(model.params, dev, threads);
    double fallback = threshold_set ? threshold : model.threshold;
    auto thresholds = nam::tune_thresholds_per_relation(dev, dev_scores, fallback);
    report = nam::evaluate_per_relation(model.params, test, thresholds, fallback, threads);
  } else {
    double t = model.threshold;
    if (threshold_set) {
      t = threshold;
    } else if (!dev_path.empty()) {
      auto dev = nam::load_triples(dev_path, model.vocab, false);
      auto dev_scores = nam::score_all(model.params, dev, threads);
      std::vector<nam::ScoredLabel> scored(dev.size());
      for (size_t i = 0; i < dev.size(); ++i) scored[i] = {dev_scores[i], dev[i].label};
      t = nam::tune_threshold(scored);
    }
    report = nam::evaluate(model.params, test, t, threads);
  }
  std::ofstream file;
  nam::write_eval_csv(open_or_stdout(report_path, file), report, model.vocab);
  std::cout << "accuracy " << report.overall << " (" << report.correct << "/" << report.total
            << ")\n";
  return 0;
}

int run_transfer(const std::string& model_path, const std::string& relation,
                 const std::string& samples_path, const std::string& new_test_path,
                 const std::string& orig_test_path, const std::string& fractions_text,
                 const std::string& mode_text, const std::string& out_path,
                 const nam::TrainConfig& config) {
  nam::Model base = nam::load_model(model_path);
  auto samples = nam::map_transfer_samples(base.vocab, nam::load_raw_triples(samples_path),
                                           relation);
  if (samples.dropped_oov > 0) {
    std::cerr << "dropped " << samples.dropped_oov << " samples with unknown entities\n";
  }
  auto eval_mapped = nam::map_transfer_samples(
      base.vocab, nam::load_raw_triples(new_test_path), relation);
  if (eval_mapped.dropped_oov > 0) {
    std::cerr << "dropped " << eval_mapped.dropped_oov << " eval samples with unknown entities\n";
  }
  auto orig = nam::load_triples(orig_test_path, base.vocab, false);

  std::vector<double> fractions;
  std::stringstream ss(fractions_text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) fractions.push_back(std::stod(item));
  }
  nam::TransferMode mode = mode_text == "full-update" ? nam::TransferMode::kFullUpdate
                                                      : nam::TransferMode::kCodeOnly;
  auto curve = nam::transfer_curve(base, relation, samples, eval_mapped.usable, orig,
                                   fractions, mode, config);
  std::ofstream file;
  nam::write_curve_csv(open_or_stdout(out_path, file), curve);
  return 0;
}

int run_winograd_train(const std::string& pairs_path, const std::string& scorer,
                       const std::string& vectors_path, const std::string& out_path,
                       nam::WinogradConfig config, const std::string& trunk_variant) {
  config.kind = nam::scorer_from_name(scorer);
  config.transmat_trunk = nam::variant_from_name(trunk_variant);
  auto pairs = nam::load_pairs(pairs_path);
  nam::WordVectorTable words;
  const nam::WordVectorTable* words_ptr = nullptr;
  if (!vectors_path.empty()) {
    words = nam::load_word_vectors(vectors_path);
    words_ptr = &words;
  }
  auto model = nam::train_winograd(pairs, words_ptr, config);
  nam::save_winograd_model(out_path, model);
  std::cerr << "trained " << nam::scorer_name(model.kind) << " model on " << pairs.size()
            << " pair rows\n";
  return 0;
}

int run_winograd_resolve(const std::string& model_path, const std::string& schemas_path,
                         const std::string& report_path) {
  auto model = nam::load_winograd_model(model_path);
  auto problems = nam::load_schemas(schemas_path);
  auto report = nam::evaluate_schema_set(model, problems);
  std::ofstream file;
  nam::write_schema_report_csv(open_or_stdout(report_path, file), report);
  std::cout << "accuracy " << report.accuracy << " (" << report.correct << "/"
            << report.usable << " usable, " << report.excluded << " excluded)\n";
  return 0;
}

int run_gradcheck(const std::string& variant, int trials, double tol, uint64_t seed) {
  bool all_pass = true;
  for (const auto& name : {std::string("dnn"), std::string("rmnn")}) {
    if (variant != "both" && variant != name) continue;
    auto report = nam::grad_check(nam::variant_from_name(name), trials, tol, seed);
    std::cout << name << ":\n";
    nam::write_grad_check_report(std::cout, report);
    all_pass = all_pass && report.all_pass;
  }
  return all_pass ? 0 : 1;
}

int run_synth(const nam::SynthSpec& spec, const std::string& out_dir) {
  auto data = nam::generate_synth_kb(spec);
  nam::write_synth_kb(data, out_dir);
  std::cerr << "wrote " << data.train.size() << " train / " << data.dev.size() << " dev / "
            << data.test.size() << " test triples to " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural association models: Pr(E2|E1) over KB triples and cause-effect events"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model on labeled triples");
  CommonTrainFlags train_flags;
  std::string train_path, dev_path, vectors_path, model_out, report_out;
  train_cmd->add_option("--train", train_path, "Training triples TSV")->required();
  train_cmd->add_option("--dev", dev_path, "Development triples TSV")->required();
  train_cmd->add_option("--vectors", vectors_path, "Optional word-vector file");
  train_cmd->add_option("--out", model_out, "Model checkpoint to write");
  train_cmd->add_option("--report", report_out, "Per-epoch CSV report path");
  add_train_options(train_cmd, train_flags);
  train_cmd->set_config("--config", "", "Config file with key = value lines", true);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on labeled triples");
  std::string eval_model, eval_test, eval_dev, eval_report;
  double eval_threshold = 0.5;
  bool per_relation = false;
  int eval_threads = 1;
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--test", eval_test)->required();
  eval_cmd->add_option("--dev", eval_dev, "Tune the threshold on this set");
  auto* thr_opt = eval_cmd->add_option("--threshold", eval_threshold,
                                       "Fixed decision threshold (skips tuning)");
  eval_cmd->add_flag("--per-relation-thresholds", per_relation,
                     "Tune one threshold per relation (needs --dev)");
  eval_cmd->add_option("--report", eval_report, "CSV report path");
  eval_cmd->add_option("--threads", eval_threads, "Parallel scoring workers");

  // transfer
  auto* transfer_cmd =
      app.add_subcommand("transfer", "Adapt a trained model to an unseen relation");
  CommonTrainFlags transfer_flags;
  std::string tr_model, tr_relation, tr_samples, tr_new_test, tr_orig_test, tr_out;
  std::string tr_fractions = "0.05,0.1,0.2,0.5,1.0";
  std::string tr_mode = "code-only";
  transfer_cmd->add_option("--model", tr_model)->required();
  transfer_cmd->add_option("--relation", tr_relation, "Name of the new relation")->required();
  transfer_cmd->add_option("--samples", tr_samples, "Adaptation triples TSV")->required();
  transfer_cmd->add_option("--new-test", tr_new_test, "New-relation eval triples TSV")
      ->required();
  transfer_cmd->add_option("--orig-test", tr_orig_test, "Original-relation eval TSV")
      ->required();
  transfer_cmd->add_option("--fractions", tr_fractions, "Comma-separated sample fractions");
  transfer_cmd->add_option("--mode", tr_mode)->check(CLI::IsMember({"code-only", "full-update"}));
  transfer_cmd->add_option("--out", tr_out, "Curve CSV path");
  add_train_options(transfer_cmd, transfer_flags);

  // winograd-train
  auto* wt_cmd = app.add_subcommand("winograd-train",
                                    "Train a cause-effect scorer on mined pairs");
  nam::WinogradConfig wt_config;
  std::string wt_pairs, wt_scorer = "relationvec", wt_vectors, wt_out, wt_trunk = "dnn";
  wt_cmd->add_option("--pairs", wt_pairs, "Cause-effect pair TSV")->required();
  wt_cmd->add_option("--scorer", wt_scorer)->check(CLI::IsMember({"transmat", "relationvec"}));
  wt_cmd->add_option("--vectors", wt_vectors, "Optional word-vector file");
  wt_cmd->add_option("--out", wt_out, "Model file to write")->required();
  wt_cmd->add_option("--trunk-variant", wt_trunk, "TransMat trunk: dnn or rmnn")
      ->check(CLI::IsMember({"dnn", "rmnn"}));
  wt_cmd->add_option("--word-dim,--word_dim", wt_config.word_dim);
  wt_cmd->add_option("--relation-dim,--relation_dim", wt_config.relation_dim);
  wt_cmd->add_option("--hidden-layers,--hidden_layers", wt_config.hidden_layers);
  wt_cmd->add_option("--hidden-width,--hidden_width", wt_config.hidden_width);
  wt_cmd->add_option("--learning-rate,--learning_rate", wt_config.learning_rate);
  wt_cmd->add_option("--embedding-learning-rate,--embedding_learning_rate",
                     wt_config.embedding_learning_rate);
  wt_cmd->add_option("--dropout,--dropout_rate", wt_config.dropout_rate);
  wt_cmd->add_option("--epochs", wt_config.epochs);
  wt_cmd->add_option("--seed", wt_config.seed);
  wt_cmd->set_config("--config", "", "Config file with key = value lines", true);

  // winograd-resolve
  auto* wr_cmd = app.add_subcommand("winograd-resolve",
                                    "Resolve schema problems with a trained scorer");
  std::string wr_model, wr_schemas, wr_report;
  wr_cmd->add_option("--model", wr_model)->required();
  wr_cmd->add_option("--schemas", wr_schemas, "Schema problems TSV")->required();
  wr_cmd->add_option("--report", wr_report, "Per-problem CSV path");

  // gradcheck
  auto* gc_cmd = app.add_subcommand("gradcheck", "Check backprop against finite differences");
  std::string gc_variant = "both";
  int gc_trials = 100;
  double gc_tol = 1e-5;
  uint64_t gc_seed = 7;
  gc_cmd->add_option("--variant", gc_variant)->check(CLI::IsMember({"both", "dnn", "rmnn"}));
  gc_cmd->add_option("--trials", gc_trials);
  gc_cmd->add_option("--tol", gc_tol);
  gc_cmd->add_option("--seed", gc_seed);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a planted-rule synthetic KB");
  nam::SynthSpec spec;
  std::string synth_out;
  synth_cmd->add_option("--relations", spec.relations);
  synth_cmd->add_option("--entities", spec.entities);
  synth_cmd->add_option("--clusters", spec.clusters);
  synth_cmd->add_option("--rule-density", spec.rule_density);
  synth_cmd->add_option("--positives", spec.positives);
  synth_cmd->add_option("--dev-fraction", spec.dev_fraction);
  synth_cmd->add_option("--test-fraction", spec.test_fraction);
  synth_cmd->add_option("--seed", spec.seed);
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) {
      return run_train(train_path, dev_path, vectors_path, model_out, report_out,
                       train_flags.config);
    }
    if (*eval_cmd) {
      return run_eval(eval_model, eval_test, eval_dev, eval_threshold, thr_opt->count() > 0,
                      per_relation, eval_report, eval_threads);
    }
    if (*transfer_cmd) {
      return run_transfer(tr_model, tr_relation, tr_samples, tr_new_test, tr_orig_test,
                          tr_fractions, tr_mode, tr_out, transfer_flags.config);
    }
    if (*wt_cmd) {
      return run_winograd_train(wt_pairs, wt_scorer, wt_vectors, wt_out, wt_config, wt_trunk);
    }
    if (*wr_cmd) {
      return run_winograd_resolve(wr_model, wr_schemas, wr_report);
    }
    if (*gc_cmd) {
      return run_gradcheck(gc_variant, gc_trials, gc_tol, gc_seed);
    }
    if (*synth_cmd) {
      return run_synth(spec, synth_out);
    }
  } catch (const nam::ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nam::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
