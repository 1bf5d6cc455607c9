#pragma once

#include <string>
#include <vector>

#include "nam/trainer.hpp"

// Cause-effect Winograd-schema resolution: patterned phrase events, the
// TransMat and RelationVec scorer configurations, their negative-sampling
// schemes and argmax answer selection.

namespace nam {

enum class Voice { kActive, kPassive };
enum class Polarity { kPositive, kNegative };

// (voice, polarity): exactly four combinations.
struct Pattern {
  Voice voice = Voice::kActive;
  Polarity polarity = Polarity::kPositive;

  bool operator==(const Pattern&) const = default;
};

constexpr int kNumPatterns = 4;
constexpr int kNumPairRelations = 16;

int pattern_index(Pattern p);
Pattern pattern_from_index(int index);

// Bijective map from (cause pattern, effect pattern) to one of the 16
// cause-effect relation slots.
int pair_relation_index(Pattern cause, Pattern effect);

struct PatternedPhrase {
  std::vector<std::string> tokens;
  Pattern pattern;

  bool operator==(const PatternedPhrase&) const = default;
};

struct CauseEffectPair {
  PatternedPhrase cause;
  PatternedPhrase effect;
  long count = 1;  // occurrence weight, >= 1
};

struct SchemaProblem {
  PatternedPhrase candidate_a;
  PatternedPhrase candidate_b;
  PatternedPhrase query;  // the pronoun's predicate
  char gold = 'A';        // 'A' or 'B'
};

enum class ScorerKind { kTransMat, kRelationVec };

std::string scorer_name(ScorerKind kind);
ScorerKind scorer_from_name(const std::string& name);

// TransMat: four shared pattern matrices transform the BOW vectors of
// both events before a trunk with one generic cause-effect relation code.
// RelationVec: the 16 (cause pattern, effect pattern) combinations are
// distinct relations of an RMNN trunk over raw BOW vectors.
struct WinogradModel {
  ScorerKind kind = ScorerKind::kRelationVec;
  NamParams trunk;                   // entity tables empty; c holds 1 or 16 codes
  std::vector<Matrix> pattern_mats;  // 4 square matrices, TransMat only
  WordVectorTable words;             // trainable
};

struct WinogradConfig {
  ScorerKind kind = ScorerKind::kRelationVec;
  Variant transmat_trunk = Variant::kDnn;  // RelationVec always uses RMNN
  int word_dim = 50;
  int relation_dim = 50;
  int hidden_layers = 2;
  int hidden_width = 100;
  double learning_rate = 0.01;
  double embedding_learning_rate = 0.025;
  double dropout_rate = 0.2;
  int epochs = 30;
  uint64_t seed = 1;

  void validate() const;
};

struct PairScore {
  double p = 0.5;
  bool cause_all_oov = false;
  bool effect_all_oov = false;
};

PairScore transmat_score(const WinogradModel& model, const PatternedPhrase& cause,
                         const PatternedPhrase& effect);
PairScore relationvec_score(const WinogradModel& model, const PatternedPhrase& cause,
                            const PatternedPhrase& effect);
PairScore score_pair(const WinogradModel& model, const PatternedPhrase& cause,
                     const PatternedPhrase& effect);

// Negative for TransMat training: same effect tokens, uniformly random
// different effect pattern.
CauseEffectPair negatives_transmat(const CauseEffectPair& pair, Rng& rng);

// Negative for RelationVec training: effect replaced by a uniformly
// random different phrase from the effect vocabulary, pattern kept.
CauseEffectPair negatives_relationvec(const CauseEffectPair& pair,
                                      const std::vector<PatternedPhrase>& effect_vocab,
                                      Rng& rng);

// Distinct effect phrases (tokens + pattern ignored -> tokens only), in
// first-seen order.
std::vector<PatternedPhrase> collect_effect_vocab(const std::vector<CauseEffectPair>& pairs);

// Trains a model of the configured kind on weighted cause-effect pairs.
// Word vectors start from `pretrained` when given (dimension must match
// word_dim), else uniform random in [-0.1, 0.1]; all of trunk, pattern
// matrices, relation codes and word vectors are learned.
WinogradModel train_winograd(const std::vector<CauseEffectPair>& pairs,
                             const WordVectorTable* pretrained,
                             const WinogradConfig& config);

struct Resolution {
  char answer = 'A';
  bool tie = false;
  double p_a = 0.0;
  double p_b = 0.0;
  bool usable = true;  // false when the query or both candidates are all-OOV
};

// Pure argmax with the documented tie rule (ties answer A, flagged).
char argmax_answer(double p_a, double p_b, bool* tie);

// p_a scores (cause=candidate_a, effect=query); p_b likewise; answer is
// the argmax.
Resolution resolve(const WinogradModel& model, const SchemaProblem& problem);

struct SchemaEvalRow {
  int index = 0;
  char answer = 'A';
  char gold = 'A';
  bool correct = false;
  bool excluded = false;
  double p_a = 0.0, p_b = 0.0;
};

struct SchemaEvalReport {
  int total = 0;
  int usable = 0;
  int excluded = 0;
  int correct = 0;
  double accuracy = 0.0;  // over usable problems
  std::vector<SchemaEvalRow> rows;
};

SchemaEvalReport evaluate_schema_set(const WinogradModel& model,
                                     const std::vector<SchemaProblem>& problems);

void write_schema_report_csv(std::ostream& out, const SchemaEvalReport& report);

// Pair TSV: cause_phrase, cause_voice, cause_polarity, effect_phrase,
// effect_voice, effect_polarity, count (tab-separated).
std::vector<CauseEffectPair> load_pairs(const std::string& path);
void write_pairs(const std::string& path, const std::vector<CauseEffectPair>& pairs);

// Schema TSV: three `phrase,voice,polarity` fields plus gold (A|B).
std::vector<SchemaProblem> load_schemas(const std::string& path);
void write_schemas(const std::string& path, const std::vector<SchemaProblem>& problems);

// Winograd model checkpoint (embeds the trunk format).
void save_winograd_model(const std::string& path, const WinogradModel& model);
WinogradModel load_winograd_model(const std::string& path);

}  // namespace nam
