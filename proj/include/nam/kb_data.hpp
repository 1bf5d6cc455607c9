#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nam/core_math.hpp"

// Vocabularies, triple datasets, word-vector loading, phrase composition
// and negative-sample generation.

namespace nam {

// Ordered, duplicate-free symbol tables for entities, relations and words.
// Index lookup is the inverse of position lookup.
class Vocabulary {
 public:
  int add_entity(const std::string& name);
  int add_relation(const std::string& name);
  int add_word(const std::string& name);

  std::optional<int> entity_id(const std::string& name) const;
  std::optional<int> relation_id(const std::string& name) const;
  std::optional<int> word_id(const std::string& name) const;

  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::vector<std::string>& words() const { return words_; }

  int num_entities() const { return static_cast<int>(entities_.size()); }
  int num_relations() const { return static_cast<int>(relations_.size()); }

  bool operator==(const Vocabulary& other) const {
    return entities_ == other.entities_ && relations_ == other.relations_ &&
           words_ == other.words_;
  }

 private:
  static int add(std::vector<std::string>& list,
                 std::unordered_map<std::string, int>& index, const std::string& name);

  std::vector<std::string> entities_, relations_, words_;
  std::unordered_map<std::string, int> entity_index_, relation_index_, word_index_;
};

// A KB fact (e_i, r_k, e_j) as indices into a Vocabulary.
struct Triple {
  int32_t head = 0;
  int32_t relation = 0;
  int32_t tail = 0;

  bool operator==(const Triple&) const = default;
};

struct TripleHash {
  size_t operator()(const Triple& t) const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (uint64_t v : {static_cast<uint64_t>(t.head), static_cast<uint64_t>(t.relation),
                       static_cast<uint64_t>(t.tail)}) {
      h = (h ^ v) * 0x100000001b3ULL;
    }
    return static_cast<size_t>(h);
  }
};

using TripleSet = std::unordered_set<Triple, TripleHash>;

struct LabeledTriple {
  Triple triple;
  bool label = true;

  bool operator==(const LabeledTriple&) const = default;
};

enum class Split { kTrain, kDev, kTest };

// Positive and negative triples of one split; the two sets are disjoint.
struct Dataset {
  std::vector<Triple> positives;
  std::vector<Triple> negatives;
  Split split = Split::kTrain;

  bool operator==(const Dataset&) const = default;
};

// A triple as raw symbols, before any vocabulary lookup.
struct RawTriple {
  std::string head, relation, tail;
  bool label = true;
};

// Reads the triple TSV grammar: `head<TAB>relation<TAB>tail[<TAB>label]`,
// label in {0,1}; `#`-prefixed lines are comments; 3-field lines parse as
// positives. With extend_vocab the vocabulary grows in first-seen order;
// otherwise an unknown symbol is a DataError naming it.
std::vector<LabeledTriple> load_triples(const std::string& path, Vocabulary& vocab,
                                        bool extend_vocab);

std::vector<RawTriple> load_raw_triples(const std::string& path);

void write_triples(const std::string& path, const std::vector<LabeledTriple>& triples,
                   const Vocabulary& vocab);

// Groups labeled triples into a Dataset, enforcing D+ and D- disjoint.
Dataset make_dataset(const std::vector<LabeledTriple>& triples, Split split);
std::vector<LabeledTriple> dataset_to_labeled(const Dataset& dataset);

// Fixed-dimension word -> vector table.
struct WordVectorTable {
  int dimension = 0;
  std::unordered_map<std::string, Vector> vectors;

  const Vector* find(const std::string& word) const {
    auto it = vectors.find(word);
    return it == vectors.end() ? nullptr : &it->second;
  }
};

// Text format: optional `count dim` header line, then
// `word v1 v2 ... vdim` space-separated.
WordVectorTable load_word_vectors(const std::string& path);
void write_word_vectors(const std::string& path, const WordVectorTable& table);

struct Bow {
  Vector vec;
  bool all_oov = false;
};

// Arithmetic mean of the vectors of in-table tokens; all tokens OOV
// yields the zero vector with the flag set. OOV is data, not a fault.
Bow compose_phrase(const std::vector<std::string>& tokens, const WordVectorTable& table);

// Entity name -> tokens: split on underscore and whitespace, lowercased.
std::vector<std::string> entity_tokens(const std::string& name);

// Perturbs the tail of a positive triple: draws e_l uniformly from the
// entity set, rejecting e_l == e_j and known positives, up to 100
// rejections; after that the last draw different from e_j is returned.
// The head and relation are always preserved.
Triple sample_negative(const Triple& positive, int num_entities,
                       const TripleSet& known_positives, Rng& rng);

// Per-entity input/output embeddings plus per-relation codes.
struct EmbeddingInit {
  std::vector<Vector> v1;  // num_entities x entity_dim
  std::vector<Vector> v2;  // num_entities x v2_dim
  std::vector<Vector> c;   // num_relations x relation_dim
};

// V1 (and V2 when v2_dim matches the table dimension) come from
// compose_phrase over the entity's tokens when a word table is given;
// everything else is uniform random in [-0.1, 0.1].
EmbeddingInit init_embeddings(const Vocabulary& vocab, const WordVectorTable* words,
                              int entity_dim, int v2_dim, int relation_dim, Rng& rng);

}  // namespace nam
