/*
 * Copyright 2026 The OntoPlace Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Dense representations of mentions, concepts and edges: text layouts fed to
// encoders, similarity functions, the bi-encoder training loss and exhaustive
// nearest-neighbour search over an in-memory store.

#ifndef ONTOPLACE_EMBEDDING_H_
#define ONTOPLACE_EMBEDDING_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ontoplace/lexical_index.h"
#include "ontoplace/mention.h"
#include "ontoplace/ontology.h"

namespace ontoplace {

using EmbeddingVector = std::vector<double>;

// Special tokens of the encoder input layouts.
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kMentionStart = "[M_s]";
inline constexpr std::string_view kMentionEnd = "[M_e]";
inline constexpr std::string_view kParentTag = "[P-TAG]";
inline constexpr std::string_view kChildTag = "[C-TAG]";
inline constexpr std::string_view kNullToken = "[NULL]";

// Budgets are counted in whitespace-separated units, markers included.
struct SerializationOptions {
  std::size_t max_context_units = 32;
  std::size_t max_concept_units = 128;
  bool with_context = true;
};

// "[CLS] ctxt_l [M_s] mention [M_e] ctxt_r [SEP]". Contexts lose whole units
// from their far ends until the sequence fits; the mention is never cut.
std::string SerializeMention(const ContextualMention& m,
                             std::size_t max_context_units, bool with_context);

// "[CLS] parent [P-TAG] child-or-[NULL] [C-TAG] [SEP]", capped at
// `max_concept_units` by trimming the longer side from its end.
std::string SerializeEdge(const Ontology& o, const Edge& e,
                          std::size_t max_concept_units = 128);

double Dot(std::span<const double> u, std::span<const double> v);
double Cosine(std::span<const double> u, std::span<const double> v);

struct TripletLossConfig {
  double margin = 0.2;
};

// Sum over negatives of max(0, margin - s(m, gold) + s(m, negative)) with
// s the dot product.
double TripletLoss(std::span<const double> mention,
                   std::span<const double> gold,
                   std::span<const EmbeddingVector> negatives,
                   const TripletLossConfig& config = {});

// Thread-safe text -> vector map with a fixed dimension.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim = 0) : dim_(dim) {}
  EmbeddingStore(const EmbeddingStore& other);
  EmbeddingStore& operator=(const EmbeddingStore& other);

  // 0 until the first vector fixes it.
  std::size_t dim() const;
  std::size_t size() const;

  // Throws InvalidArgumentError on a dimension mismatch or non-finite value.
  void Put(const std::string& key, EmbeddingVector vector);
  std::optional<EmbeddingVector> Find(std::string_view key) const;
  bool Contains(std::string_view key) const;
  // Throws NotFoundError.
  EmbeddingVector Get(std::string_view key) const;

  // Header `dim=<d>`, then `key<TAB>v1,...,vd` sorted by key.
  void Save(std::ostream& out) const;
  static EmbeddingStore Load(std::istream& in);
  void SaveFile(const std::string& path) const;
  static EmbeddingStore LoadFile(const std::string& path);

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  mutable std::shared_mutex mutex_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, EmbeddingVector, StringHash, std::equal_to<>>
      entries_;
};

struct RankedEdge {
  Edge edge;
  double score = 0.0;
};

// Cosine ranking of concepts against the mention vector; ties by id.
std::vector<RankedConcept> SearchConceptsByEmbedding(
    const EmbeddingStore& store, std::string_view mention_key,
    std::span<const std::pair<ConceptId, std::string>> concept_keys,
    std::size_t top_n);

// Dot-product ranking of edges; ties follow EdgeLess.
std::vector<RankedEdge> SearchEdgesByEmbedding(
    const EmbeddingStore& store, std::string_view mention_key,
    std::span<const std::pair<Edge, std::string>> edge_keys,
    std::size_t top_n);

}  // namespace ontoplace

#endif  // ONTOPLACE_EMBEDDING_H_
