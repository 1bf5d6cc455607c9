#include "nam/kb_data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace nam {

int Vocabulary::add(std::vector<std::string>& list,
                    std::unordered_map<std::string, int>& index, const std::string& name) {
  auto it = index.find(name);
  if (it != index.end()) return it->second;
  int id = static_cast<int>(list.size());
  list.push_back(name);
  index.emplace(name, id);
  return id;
}

int Vocabulary::add_entity(const std::string& name) {
  return add(entities_, entity_index_, name);
}
int Vocabulary::add_relation(const std::string& name) {
  return add(relations_, relation_index_, name);
}
int Vocabulary::add_word(const std::string& name) { return add(words_, word_index_, name); }

std::optional<int> Vocabulary::entity_id(const std::string& name) const {
  auto it = entity_index_.find(name);
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}
std::optional<int> Vocabulary::relation_id(const std::string& name) const {
  auto it = relation_index_.find(name);
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}
std::optional<int> Vocabulary::word_id(const std::string& name) const {
  auto it = word_index_.find(name);
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

struct TripleLine {
  std::string head, relation, tail;
  bool label;
};

// Shared grammar for both the indexed and the raw loader.
std::vector<TripleLine> parse_triple_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open triple file: " + path);
  std::vector<TripleLine> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() < 3 || fields.size() > 4) {
      throw DataError("malformed triple at " + path + ":" + std::to_string(line_no) +
                      ": expected 3 or 4 tab-separated fields, got \"" + line + "\"");
    }
    for (int i = 0; i < 3; ++i) {
      if (fields[i].empty()) {
        throw DataError("malformed triple at " + path + ":" + std::to_string(line_no) +
                        ": empty field in \"" + line + "\"");
      }
    }
    bool label = true;
    if (fields.size() == 4) {
      if (fields[3] == "1") {
        label = true;
      } else if (fields[3] == "0") {
        label = false;
      } else {
        throw DataError("malformed triple at " + path + ":" + std::to_string(line_no) +
                        ": label must be 0 or 1, got \"" + fields[3] + "\"");
      }
    }
    out.push_back({fields[0], fields[1], fields[2], label});
  }
  return out;
}

}  // namespace

std::vector<LabeledTriple> load_triples(const std::string& path, Vocabulary& vocab,
                                        bool extend_vocab) {
  auto lines = parse_triple_file(path);
  std::vector<LabeledTriple> out;
  out.reserve(lines.size());
  auto lookup_entity = [&](const std::string& name) -> int {
    if (extend_vocab) return vocab.add_entity(name);
    auto id = vocab.entity_id(name);
    if (!id) throw DataError("unknown entity \"" + name + "\" in " + path);
    return *id;
  };
  auto lookup_relation = [&](const std::string& name) -> int {
    if (extend_vocab) return vocab.add_relation(name);
    auto id = vocab.relation_id(name);
    if (!id) throw DataError("unknown relation \"" + name + "\" in " + path);
    return *id;
  };
  for (const auto& l : lines) {
    Triple t{lookup_entity(l.head), lookup_relation(l.relation), lookup_entity(l.tail)};
    out.push_back({t, l.label});
  }
  return out;
}

std::vector<RawTriple> load_raw_triples(const std::string& path) {
  auto lines = parse_triple_file(path);
  std::vector<RawTriple> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back({l.head, l.relation, l.tail, l.label});
  return out;
}

void write_triples(const std::string& path, const std::vector<LabeledTriple>& triples,
                   const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write triple file: " + path);
  for (const auto& lt : triples) {
    out << vocab.entities()[lt.triple.head] << '\t' << vocab.relations()[lt.triple.relation]
        << '\t' << vocab.entities()[lt.triple.tail] << '\t' << (lt.label ? 1 : 0) << '\n';
  }
}

Dataset make_dataset(const std::vector<LabeledTriple>& triples, Split split) {
  Dataset d;
  d.split = split;
  TripleSet pos;
  for (const auto& lt : triples) {
    if (lt.label) {
      d.positives.push_back(lt.triple);
      pos.insert(lt.triple);
    } else {
      d.negatives.push_back(lt.triple);
    }
  }
  for (const auto& t : d.negatives) {
    if (pos.count(t)) {
      throw DataError("dataset has a triple in both D+ and D-");
    }
  }
  return d;
}

std::vector<LabeledTriple> dataset_to_labeled(const Dataset& dataset) {
  std::vector<LabeledTriple> out;
  out.reserve(dataset.positives.size() + dataset.negatives.size());
  for (const auto& t : dataset.positives) out.push_back({t, true});
  for (const auto& t : dataset.negatives) out.push_back({t, false});
  return out;
}

WordVectorTable load_word_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word-vector file: " + path);
  WordVectorTable table;
  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::istringstream ss(line);
    if (first) {
      first = false;
      // Optional `count dim` header: exactly two integer fields.
      long a, b;
      std::string rest;
      std::istringstream probe(line);
      if (probe >> a >> b && !(probe >> rest) && a > 0 && b > 0) {
        table.dimension = static_cast<int>(b);
        continue;
      }
    }
    std::string word;
    if (!(ss >> word)) continue;
    Vector vec;
    double v;
    while (ss >> v) vec.push_back(v);
    if (vec.empty()) {
      throw DataError("malformed word-vector line at " + path + ":" + std::to_string(line_no));
    }
    if (table.dimension == 0) table.dimension = static_cast<int>(vec.size());
    if (static_cast<int>(vec.size()) != table.dimension) {
      throw DataError("word-vector dimension mismatch at " + path + ":" +
                      std::to_string(line_no) + ": expected " +
                      std::to_string(table.dimension) + ", got " + std::to_string(vec.size()));
    }
    table.vectors[word] = std::move(vec);
  }
  return table;
}

void write_word_vectors(const std::string& path, const WordVectorTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write word-vector file: " + path);
  out << table.vectors.size() << ' ' << table.dimension << '\n';
  out.precision(17);
  for (const auto& [word, vec] : table.vectors) {
    out << word;
    for (double v : vec) out << ' ' << v;
    out << '\n';
  }
}

Bow compose_phrase(const std::vector<std::string>& tokens, const WordVectorTable& table) {
  Bow bow;
  bow.vec.assign(table.dimension, 0.0);
  int hits = 0;
  for (const auto& tok : tokens) {
    if (const Vector* v = table.find(tok)) {
      for (size_t i = 0; i < v->size(); ++i) bow.vec[i] += (*v)[i];
      ++hits;
    }
  }
  if (hits == 0) {
    bow.all_oov = true;
    return bow;
  }
  for (double& v : bow.vec) v /= hits;
  return bow;
}

std::vector<std::string> entity_tokens(const std::string& name) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : name) {
    if (ch == '_' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

Triple sample_negative(const Triple& positive, int num_entities,
                       const TripleSet& known_positives, Rng& rng) {
  if (num_entities < 2) {
    throw ContractError("sample_negative: need at least 2 entities, got " +
                        std::to_string(num_entities));
  }
  Triple candidate = positive;
  int32_t last_different = -1;
  for (int rejections = 0; rejections < 100; ++rejections) {
    candidate.tail = static_cast<int32_t>(rng.uniform_int(num_entities));
    if (candidate.tail == positive.tail) continue;
    last_different = candidate.tail;
    if (!known_positives.count(candidate)) return candidate;
  }
  // Give up on the known-positive filter; never return the input itself.
  while (last_different < 0) {
    int32_t draw = static_cast<int32_t>(rng.uniform_int(num_entities));
    if (draw != positive.tail) last_different = draw;
  }
  candidate.tail = last_different;
  return candidate;
}

EmbeddingInit init_embeddings(const Vocabulary& vocab, const WordVectorTable* words,
                              int entity_dim, int v2_dim, int relation_dim, Rng& rng) {
  if (entity_dim < 1 || v2_dim < 1 || relation_dim < 1) {
    throw ContractError("init_embeddings: all dimensions must be >= 1");
  }
  if (words && words->dimension != entity_dim) {
    throw ContractError("init_embeddings: word-table dimension " +
                        std::to_string(words->dimension) + " != entity dimension " +
                        std::to_string(entity_dim));
  }
  auto random_vec = [&rng](int dim) {
    Vector v(dim);
    for (double& x : v) x = rng.uniform(-0.1, 0.1);
    return v;
  };

  EmbeddingInit init;
  init.v1.reserve(vocab.num_entities());
  init.v2.reserve(vocab.num_entities());
  const bool bow_v2 = words && words->dimension == v2_dim;
  for (const auto& name : vocab.entities()) {
    if (words) {
      auto tokens = entity_tokens(name);
      init.v1.push_back(compose_phrase(tokens, *words).vec);
      init.v2.push_back(bow_v2 ? compose_phrase(tokens, *words).vec : random_vec(v2_dim));
    } else {
      init.v1.push_back(random_vec(entity_dim));
      init.v2.push_back(random_vec(v2_dim));
    }
  }
  init.c.reserve(vocab.num_relations());
  for (int i = 0; i < vocab.num_relations(); ++i) init.c.push_back(random_vec(relation_dim));
  return init;
}

}  // namespace nam
