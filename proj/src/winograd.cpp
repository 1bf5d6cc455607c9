#include "nam/winograd.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "binary_io.hpp"

namespace nam {

int pattern_index(Pattern p) {
  return (p.voice == Voice::kPassive ? 2 : 0) + (p.polarity == Polarity::kNegative ? 1 : 0);
}

Pattern pattern_from_index(int index) {
  if (index < 0 || index >= kNumPatterns) {
    throw ContractError("pattern_from_index: index " + std::to_string(index) +
                        " out of [0, 4)");
  }
  Pattern p;
  p.voice = index >= 2 ? Voice::kPassive : Voice::kActive;
  p.polarity = index % 2 == 1 ? Polarity::kNegative : Polarity::kPositive;
  return p;
}

int pair_relation_index(Pattern cause, Pattern effect) {
  return kNumPatterns * pattern_index(cause) + pattern_index(effect);
}

std::string scorer_name(ScorerKind kind) {
  return kind == ScorerKind::kTransMat ? "transmat" : "relationvec";
}

ScorerKind scorer_from_name(const std::string& name) {
  if (name == "transmat") return ScorerKind::kTransMat;
  if (name == "relationvec") return ScorerKind::kRelationVec;
  throw DataError("unknown scorer \"" + name + "\" (expected transmat or relationvec)");
}

void WinogradConfig::validate() const {
  if (word_dim < 1 || relation_dim < 1 || hidden_width < 1) {
    throw ContractError("winograd config: dimensions must be >= 1");
  }
  if (hidden_layers < 1) throw ContractError("winograd config: need >= 1 hidden layer");
  if (learning_rate <= 0.0 || embedding_learning_rate <= 0.0) {
    throw ContractError("winograd config: learning rates must be positive");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ContractError("winograd config: dropout rate must be in [0, 1)");
  }
  if (epochs < 1) throw ContractError("winograd config: epochs must be >= 1");
}

namespace {

struct SideEmbedding {
  Bow bow;
  Vector embedded;  // transformed (TransMat) or the BOW itself
  int matrix = -1;  // pattern matrix used, TransMat only
};

SideEmbedding embed_side(const WinogradModel& model, const PatternedPhrase& phrase) {
  SideEmbedding side;
  side.bow = compose_phrase(phrase.tokens, model.words);
  if (model.kind == ScorerKind::kTransMat) {
    side.matrix = pattern_index(phrase.pattern);
    side.embedded = matvec(model.pattern_mats[side.matrix], side.bow.vec);
  } else {
    side.embedded = side.bow.vec;
  }
  return side;
}

int trunk_relation(const WinogradModel& model, const PatternedPhrase& cause,
                   const PatternedPhrase& effect) {
  if (model.kind == ScorerKind::kTransMat) return 0;
  return pair_relation_index(cause.pattern, effect.pattern);
}

void check_model(const WinogradModel& model) {
  const int want_codes = model.kind == ScorerKind::kTransMat ? 1 : kNumPairRelations;
  if (static_cast<int>(model.trunk.c.size()) != want_codes) {
    throw ContractError("winograd model: " + scorer_name(model.kind) + " needs " +
                        std::to_string(want_codes) + " relation codes, got " +
                        std::to_string(model.trunk.c.size()));
  }
  if (model.kind == ScorerKind::kTransMat &&
      static_cast<int>(model.pattern_mats.size()) != kNumPatterns) {
    throw ContractError("winograd model: TransMat needs 4 pattern matrices, got " +
                        std::to_string(model.pattern_mats.size()));
  }
}

PairScore score_impl(const WinogradModel& model, const PatternedPhrase& cause,
                     const PatternedPhrase& effect) {
  check_model(model);
  SideEmbedding c = embed_side(model, cause);
  SideEmbedding e = embed_side(model, effect);
  auto cache = forward_vectors(model.trunk, c.embedded,
                               trunk_relation(model, cause, effect), e.embedded);
  return {cache.f, c.bow.all_oov, e.bow.all_oov};
}

}  // namespace

PairScore transmat_score(const WinogradModel& model, const PatternedPhrase& cause,
                         const PatternedPhrase& effect) {
  if (model.kind != ScorerKind::kTransMat) {
    throw ContractError("transmat_score: model is not a TransMat configuration");
  }
  return score_impl(model, cause, effect);
}

PairScore relationvec_score(const WinogradModel& model, const PatternedPhrase& cause,
                            const PatternedPhrase& effect) {
  if (model.kind != ScorerKind::kRelationVec) {
    throw ContractError("relationvec_score: model is not a RelationVec configuration");
  }
  return score_impl(model, cause, effect);
}

PairScore score_pair(const WinogradModel& model, const PatternedPhrase& cause,
                     const PatternedPhrase& effect) {
  return score_impl(model, cause, effect);
}

CauseEffectPair negatives_transmat(const CauseEffectPair& pair, Rng& rng) {
  CauseEffectPair neg = pair;
  int original = pattern_index(pair.effect.pattern);
  int offset = 1 + static_cast<int>(rng.uniform_int(kNumPatterns - 1));
  neg.effect.pattern = pattern_from_index((original + offset) % kNumPatterns);
  return neg;
}

CauseEffectPair negatives_relationvec(const CauseEffectPair& pair,
                                      const std::vector<PatternedPhrase>& effect_vocab,
                                      Rng& rng) {
  if (effect_vocab.size() < 2) {
    throw ContractError("negatives_relationvec: effect vocabulary needs >= 2 phrases");
  }
  CauseEffectPair neg = pair;
  while (true) {
    const auto& candidate = effect_vocab[rng.uniform_int(effect_vocab.size())];
    if (candidate.tokens != pair.effect.tokens) {
      neg.effect.tokens = candidate.tokens;
      return neg;
    }
  }
}

std::vector<PatternedPhrase> collect_effect_vocab(
    const std::vector<CauseEffectPair>& pairs) {
  std::vector<PatternedPhrase> vocab;
  std::unordered_set<std::string> seen;
  for (const auto& pair : pairs) {
    std::string key;
    for (const auto& tok : pair.effect.tokens) {
      key += tok;
      key += ' ';
    }
    if (seen.insert(key).second) vocab.push_back(pair.effect);
  }
  return vocab;
}

namespace {

// Spreads the BOW gradient back over the in-table tokens; the mean
// composition gives each occurrence grad / k.
void update_words(WordVectorTable& words, const std::vector<std::string>& tokens,
                  const Vector& g_bow, double lr) {
  int hits = 0;
  for (const auto& t : tokens) hits += words.vectors.count(t) ? 1 : 0;
  if (hits == 0) return;
  double scale = lr / hits;
  for (const auto& t : tokens) {
    auto it = words.vectors.find(t);
    if (it == words.vectors.end()) continue;
    Vector& vec = it->second;
    for (size_t i = 0; i < vec.size(); ++i) vec[i] += scale * g_bow[i];
  }
}

// One SGD step on a (cause, effect, label) example: updates the trunk,
// the pattern matrix of each side (TransMat) and the word vectors behind
// each in-table token.
void train_example(WinogradModel& model, const PatternedPhrase& cause,
                   const PatternedPhrase& effect, bool label, const WinogradConfig& config,
                   Rng& rng, Gradients& grads) {
  SideEmbedding c = embed_side(model, cause);
  SideEmbedding e = embed_side(model, effect);
  int rel = trunk_relation(model, cause, effect);
  TrainMode mode{&rng, config.dropout_rate};
  auto cache = forward_vectors(model.trunk, c.embedded, rel, e.embedded, mode);
  backward_into(model.trunk, cache, label, grads);
  apply_gradients(model.trunk, grads, config.learning_rate, config.embedding_learning_rate);

  const Vector& g_ec = grads.v1.grad;
  const Vector& g_ee = grads.v2.grad;
  Vector g_bow_c, g_bow_e;
  if (model.kind == ScorerKind::kTransMat) {
    Matrix& mc = model.pattern_mats[c.matrix];
    Matrix& me = model.pattern_mats[e.matrix];
    // BOW gradients come from the matrices before this step's update;
    // when both sides share one matrix the outer products just add.
    g_bow_c.assign(mc.cols, 0.0);
    for (int r = 0; r < mc.rows; ++r) {
      const double* row = mc.row(r);
      for (int col = 0; col < mc.cols; ++col) g_bow_c[col] += row[col] * g_ec[r];
    }
    g_bow_e.assign(me.cols, 0.0);
    for (int r = 0; r < me.rows; ++r) {
      const double* row = me.row(r);
      for (int col = 0; col < me.cols; ++col) g_bow_e[col] += row[col] * g_ee[r];
    }
    for (int r = 0; r < mc.rows; ++r) {
      double* row = mc.row(r);
      double g = config.learning_rate * g_ec[r];
      for (int col = 0; col < mc.cols; ++col) row[col] += g * c.bow.vec[col];
    }
    for (int r = 0; r < me.rows; ++r) {
      double* row = me.row(r);
      double g = config.learning_rate * g_ee[r];
      for (int col = 0; col < me.cols; ++col) row[col] += g * e.bow.vec[col];
    }
  } else {
    g_bow_c = g_ec;
    g_bow_e = g_ee;
  }
  update_words(model.words, cause.tokens, g_bow_c, config.embedding_learning_rate);
  update_words(model.words, effect.tokens, g_bow_e, config.embedding_learning_rate);
}

}  // namespace

WinogradModel train_winograd(const std::vector<CauseEffectPair>& pairs,
                             const WordVectorTable* pretrained,
                             const WinogradConfig& config) {
  config.validate();
  if (pairs.empty()) throw ContractError("train_winograd: no training pairs");

  WinogradModel model;
  model.kind = config.kind;
  Rng master(config.seed);

  model.words.dimension = config.word_dim;
  if (pretrained) {
    if (pretrained->dimension != config.word_dim) {
      throw ContractError("train_winograd: word-table dimension " +
                          std::to_string(pretrained->dimension) + " != configured word dim " +
                          std::to_string(config.word_dim));
    }
    model.words = *pretrained;
  } else {
    std::vector<std::string> order;
    std::unordered_set<std::string> seen;
    for (const auto& p : pairs) {
      for (const auto& t : p.cause.tokens) {
        if (seen.insert(t).second) order.push_back(t);
      }
      for (const auto& t : p.effect.tokens) {
        if (seen.insert(t).second) order.push_back(t);
      }
    }
    for (const auto& w : order) {
      Vector v(config.word_dim);
      for (double& x : v) x = master.uniform(-0.1, 0.1);
      model.words.vectors[w] = std::move(v);
    }
  }

  NamParams& trunk = model.trunk;
  trunk.variant = config.kind == ScorerKind::kRelationVec ? Variant::kRmnn
                                                          : config.transmat_trunk;
  const int n_codes = config.kind == ScorerKind::kTransMat ? 1 : kNumPairRelations;
  for (int i = 0; i < n_codes; ++i) {
    Vector code(config.relation_dim);
    for (double& x : code) x = master.uniform(-0.1, 0.1);
    trunk.c.push_back(std::move(code));
  }
  // The top layer is word_dim wide so that any BOW vector can stand on
  // the output side of the score.
  std::vector<int> widths(config.hidden_layers - 1, config.hidden_width);
  widths.push_back(config.word_dim);
  int prev = config.word_dim + config.relation_dim;
  for (int w : widths) {
    trunk.weights.push_back(glorot_init(w, prev, master));
    prev = w;
  }
  if (trunk.variant == Variant::kDnn) {
    for (int w : widths) trunk.biases.emplace_back(w, 0.0);
  } else {
    for (int w : widths) {
      trunk.rel_weights.push_back(glorot_init(w, config.relation_dim, master));
    }
    trunk.rel_weights.push_back(glorot_init(1, config.relation_dim, master));
  }
  if (config.kind == ScorerKind::kTransMat) {
    for (int i = 0; i < kNumPatterns; ++i) {
      model.pattern_mats.push_back(glorot_init(config.word_dim, config.word_dim, master));
    }
  }
  trunk.validate();
  check_model(model);

  auto effect_vocab = collect_effect_vocab(pairs);
  if (config.kind == ScorerKind::kRelationVec && effect_vocab.size() < 2) {
    throw ContractError("train_winograd: RelationVec negatives need >= 2 effect phrases");
  }

  // Pair counts weight each positive's sampling probability.
  std::vector<long> cumulative;
  cumulative.reserve(pairs.size());
  long total = 0;
  for (const auto& p : pairs) {
    total += p.count;
    cumulative.push_back(total);
  }

  Gradients grads;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(master.next_u64());
    for (size_t step = 0; step < pairs.size(); ++step) {
      long pick = static_cast<long>(rng.uniform_int(static_cast<uint64_t>(total)));
      size_t idx = static_cast<size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
      const CauseEffectPair& pos = pairs[idx];
      train_example(model, pos.cause, pos.effect, true, config, rng, grads);
      CauseEffectPair neg = config.kind == ScorerKind::kTransMat
                                ? negatives_transmat(pos, rng)
                                : negatives_relationvec(pos, effect_vocab, rng);
      train_example(model, neg.cause, neg.effect, false, config, rng, grads);
    }
  }
  return model;
}

char argmax_answer(double p_a, double p_b, bool* tie) {
  bool is_tie = p_a == p_b;
  if (tie) *tie = is_tie;
  return p_a >= p_b ? 'A' : 'B';
}

Resolution resolve(const WinogradModel& model, const SchemaProblem& problem) {
  PairScore a = score_impl(model, problem.candidate_a, problem.query);
  PairScore b = score_impl(model, problem.candidate_b, problem.query);
  Resolution res;
  res.p_a = a.p;
  res.p_b = b.p;
  res.answer = argmax_answer(a.p, b.p, &res.tie);
  res.usable = !(a.effect_all_oov || (a.cause_all_oov && b.cause_all_oov));
  return res;
}

SchemaEvalReport evaluate_schema_set(const WinogradModel& model,
                                     const std::vector<SchemaProblem>& problems) {
  SchemaEvalReport report;
  report.total = static_cast<int>(problems.size());
  for (size_t i = 0; i < problems.size(); ++i) {
    Resolution res = resolve(model, problems[i]);
    SchemaEvalRow row;
    row.index = static_cast<int>(i);
    row.answer = res.answer;
    row.gold = problems[i].gold;
    row.excluded = !res.usable;
    row.correct = res.usable && res.answer == problems[i].gold;
    row.p_a = res.p_a;
    row.p_b = res.p_b;
    report.rows.push_back(row);
    if (row.excluded) {
      ++report.excluded;
    } else {
      ++report.usable;
      report.correct += row.correct ? 1 : 0;
    }
  }
  if (report.usable == 0) {
    throw ContractError("evaluate_schema_set: no usable problems (all-OOV phrases)");
  }
  report.accuracy = static_cast<double>(report.correct) / report.usable;
  return report;
}

void write_schema_report_csv(std::ostream& out, const SchemaEvalReport& report) {
  out << "problem,answer,gold,correct,excluded,p_a,p_b\n";
  out.precision(17);
  for (const auto& row : report.rows) {
    out << row.index << ',' << row.answer << ',' << row.gold << ',' << (row.correct ? 1 : 0)
        << ',' << (row.excluded ? 1 : 0) << ',' << row.p_a << ',' << row.p_b << '\n';
  }
}

namespace {

std::vector<std::string> split_tokens(const std::string& phrase) {
  std::vector<std::string> tokens;
  std::istringstream ss(phrase);
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Voice parse_voice(const std::string& s, const std::string& where) {
  if (s == "active") return Voice::kActive;
  if (s == "passive") return Voice::kPassive;
  throw DataError(where + ": voice must be active or passive, got \"" + s + "\"");
}

Polarity parse_polarity(const std::string& s, const std::string& where) {
  if (s == "positive") return Polarity::kPositive;
  if (s == "negative") return Polarity::kNegative;
  throw DataError(where + ": polarity must be positive or negative, got \"" + s + "\"");
}

std::string voice_name(Voice v) { return v == Voice::kActive ? "active" : "passive"; }
std::string polarity_name(Polarity p) {
  return p == Polarity::kPositive ? "positive" : "negative";
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(s.substr(start));
      break;
    }
    fields.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

PatternedPhrase parse_patterned(const std::string& field, const std::string& where) {
  auto parts = split_on(field, ',');
  if (parts.size() != 3) {
    throw DataError(where + ": expected phrase,voice,polarity, got \"" + field + "\"");
  }
  PatternedPhrase p;
  p.tokens = split_tokens(parts[0]);
  if (p.tokens.empty()) throw DataError(where + ": empty phrase");
  p.pattern.voice = parse_voice(parts[1], where);
  p.pattern.polarity = parse_polarity(parts[2], where);
  return p;
}

}  // namespace

std::vector<CauseEffectPair> load_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pair file: " + path);
  std::vector<CauseEffectPair> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_on(line, '\t');
    std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != 7) {
      throw DataError(where + ": expected 7 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    CauseEffectPair pair;
    pair.cause.tokens = split_tokens(fields[0]);
    pair.cause.pattern.voice = parse_voice(fields[1], where);
    pair.cause.pattern.polarity = parse_polarity(fields[2], where);
    pair.effect.tokens = split_tokens(fields[3]);
    pair.effect.pattern.voice = parse_voice(fields[4], where);
    pair.effect.pattern.polarity = parse_polarity(fields[5], where);
    if (pair.cause.tokens.empty() || pair.effect.tokens.empty()) {
      throw DataError(where + ": empty phrase");
    }
    try {
      pair.count = std::stol(fields[6]);
    } catch (const std::exception&) {
      throw DataError(where + ": count must be an integer, got \"" + fields[6] + "\"");
    }
    if (pair.count < 1) throw DataError(where + ": count must be >= 1");
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void write_pairs(const std::string& path, const std::vector<CauseEffectPair>& pairs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write pair file: " + path);
  for (const auto& p : pairs) {
    out << join_tokens(p.cause.tokens) << '\t' << voice_name(p.cause.pattern.voice) << '\t'
        << polarity_name(p.cause.pattern.polarity) << '\t' << join_tokens(p.effect.tokens)
        << '\t' << voice_name(p.effect.pattern.voice) << '\t'
        << polarity_name(p.effect.pattern.polarity) << '\t' << p.count << '\n';
  }
}

std::vector<SchemaProblem> load_schemas(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file: " + path);
  std::vector<SchemaProblem> problems;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_on(line, '\t');
    std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != 4) {
      throw DataError(where + ": expected 4 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    SchemaProblem problem;
    problem.candidate_a = parse_patterned(fields[0], where);
    problem.candidate_b = parse_patterned(fields[1], where);
    problem.query = parse_patterned(fields[2], where);
    if (fields[3] != "A" && fields[3] != "B") {
      throw DataError(where + ": gold must be A or B, got \"" + fields[3] + "\"");
    }
    problem.gold = fields[3][0];
    if (problem.candidate_a == problem.candidate_b) {
      throw DataError(where + ": candidates must differ");
    }
    problems.push_back(std::move(problem));
  }
  return problems;
}

void write_schemas(const std::string& path, const std::vector<SchemaProblem>& problems) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write schema file: " + path);
  auto field = [](const PatternedPhrase& p) {
    return join_tokens(p.tokens) + "," + voice_name(p.pattern.voice) + "," +
           polarity_name(p.pattern.polarity);
  };
  for (const auto& pr : problems) {
    out << field(pr.candidate_a) << '\t' << field(pr.candidate_b) << '\t' << field(pr.query)
        << '\t' << pr.gold << '\n';
  }
}

namespace {
constexpr char kWinMagic[8] = {'N', 'A', 'M', 'W', 'I', 'N', '1', '\n'};
}

void save_winograd_model(const std::string& path, const WinogradModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  out.write(kWinMagic, sizeof kWinMagic);
  detail::put_u32(out, model.kind == ScorerKind::kTransMat ? 0 : 1);
  detail::put_params(out, model.trunk);
  detail::put_u32(out, static_cast<uint32_t>(model.pattern_mats.size()));
  for (const auto& m : model.pattern_mats) detail::put_matrix(out, m);

  std::vector<std::string> words;
  words.reserve(model.words.vectors.size());
  for (const auto& [word, vec] : model.words.vectors) words.push_back(word);
  std::sort(words.begin(), words.end());
  detail::put_u32(out, static_cast<uint32_t>(model.words.dimension));
  detail::put_u32(out, static_cast<uint32_t>(words.size()));
  for (const auto& w : words) {
    detail::put_string(out, w);
    detail::put_vector(out, model.words.vectors.at(w));
  }
  if (!out) throw DataError("failed writing model file: " + path);
}

WinogradModel load_winograd_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kWinMagic, sizeof magic) != 0) {
    throw DataError("not a winograd model file: " + path);
  }
  WinogradModel model;
  model.kind = detail::get_u32(in) == 0 ? ScorerKind::kTransMat : ScorerKind::kRelationVec;
  model.trunk = detail::get_params(in);
  uint32_t n = detail::get_u32(in);
  for (uint32_t i = 0; i < n; ++i) model.pattern_mats.push_back(detail::get_matrix(in));
  model.words.dimension = static_cast<int>(detail::get_u32(in));
  n = detail::get_u32(in);
  for (uint32_t i = 0; i < n; ++i) {
    std::string word = detail::get_string(in);
    model.words.vectors[word] = detail::get_vector(in);
  }
  model.trunk.validate();
  check_model(model);
  return model;
}

}  // namespace nam
