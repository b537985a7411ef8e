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

// Candidate edge generation: seed search, edge formation from seed concepts,
// one-hop enrichment of seed edges, scoring and the top-k cut.

#ifndef ONTOPLACE_CANDIDATES_H_
#define ONTOPLACE_CANDIDATES_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ontoplace/embedding.h"
#include "ontoplace/embedding_provider.h"
#include "ontoplace/lexical_index.h"
#include "ontoplace/mention.h"
#include "ontoplace/ontology.h"

namespace ontoplace {

enum class EdgeOrigin { kSeedConceptFormed, kSeedEdge, kEnriched, kLeafEnriched };

std::string_view ToString(EdgeOrigin origin);
EdgeOrigin EdgeOriginFromString(std::string_view name);

struct ScoredEdge {
  Edge edge;
  double score = 0.0;
  // Score before any leaf-rule boost; equals `score` when not boosted.
  double base_score = 0.0;
  EdgeOrigin origin = EdgeOrigin::kSeedEdge;
};

// Ranking order of every slate: score desc, base score desc, then EdgeLess
// (parent asc, child asc, NULL child last).
bool ScoredEdgeBefore(const ScoredEdge& a, const ScoredEdge& b);
void SortSlate(std::vector<ScoredEdge>* edges);

struct CandidateSlate {
  ContextualMention mention;
  std::size_t k = 0;
  std::vector<ScoredEdge> edges;
  // Ontology version the slate was computed against (service use).
  std::uint64_t ontology_version = 0;

  std::vector<Edge> edge_list() const;
};

// {"mention":{..},"k":..,"version":..,"edges":[[parent, child, score, origin],..]}
nlohmann::json SlateToJson(const CandidateSlate& slate);
CandidateSlate SlateFromJson(const nlohmann::json& j);

// {Pi->a} ∪ {a->Cj} ∪ {Pi->Cj} ∪ {a->NULL} over direct parents Pi and
// direct children Cj of `a`.
EdgeSet FormEdges(const Ontology& o, std::string_view a);

// For every seed P->C: {P, parents(P)} x {C, children(C)}; a NULL child
// expands on the parent side only. Each non-leaf seed also contributes
// P->NULL and P'->NULL for every parent P' of P.
EdgeSet EnrichEdges(const Ontology& o, const std::vector<Edge>& seeds);

enum class ScorerKind { kFixedCosineMean, kDotProduct, kLexicalIdfMean };

class EdgeScorer {
 public:
  virtual ~EdgeScorer() = default;
  virtual ScorerKind kind() const = 0;
  // Throws InvalidArgumentError for a leaf edge under a concept-mean kind;
  // those go through the leaf rule.
  virtual double Score(const ContextualMention& m, const Edge& e) const = 0;
};

// Scorers that rank edges by the mean of mention/parent and mention/child
// concept similarities, and can rank seed concepts on their own.
class ConceptMeanScorer : public EdgeScorer {
 public:
  virtual double ConceptSimilarity(const ContextualMention& m,
                                   std::string_view concept_id) const = 0;
  virtual std::vector<RankedConcept> SearchConcepts(
      const ContextualMention& m, std::size_t top_n) const = 0;

  // (sim(m, P) + sim(m, C)) / 2 for C != NULL.
  double Score(const ContextualMention& m, const Edge& e) const override;
  // Leaf edges have no child similarity; the NULL side contributes 0.
  double LeafBaseScore(const ContextualMention& m, const Edge& e) const;
};

// Cosine over fixed concept/mention embeddings; the mention is embedded
// without context.
class FixedEmbeddingScorer : public ConceptMeanScorer {
 public:
  FixedEmbeddingScorer(const Ontology& o, CachingEmbedder& embedder);

  ScorerKind kind() const override { return ScorerKind::kFixedCosineMean; }
  double ConceptSimilarity(const ContextualMention& m,
                           std::string_view concept_id) const override;
  std::vector<RankedConcept> SearchConcepts(const ContextualMention& m,
                                            std::size_t top_n) const override;

 private:
  const Ontology& ontology_;
  CachingEmbedder& embedder_;
  std::vector<std::pair<ConceptId, std::string>> concept_keys_;
};

// Idf overlap over the inverted index; mention only.
class LexicalScorer : public ConceptMeanScorer {
 public:
  explicit LexicalScorer(const LexicalIndex& index) : index_(index) {}

  ScorerKind kind() const override { return ScorerKind::kLexicalIdfMean; }
  double ConceptSimilarity(const ContextualMention& m,
                           std::string_view concept_id) const override;
  std::vector<RankedConcept> SearchConcepts(const ContextualMention& m,
                                            std::size_t top_n) const override;

 private:
  const LexicalIndex& index_;
};

// Restricts the edge space scanned for seed edges, e.g. to a pre-filtered
// neighbourhood on very large ontologies. Empty function = full space.
using EdgePrefilter =
    std::function<std::vector<Edge>(const Ontology&, const ContextualMention&)>;

// Dot product between the serialized mention and serialized edge encodings.
class BiEncoderScorer : public EdgeScorer {
 public:
  BiEncoderScorer(const Ontology& o, CachingEmbedder& mention_encoder,
                  CachingEmbedder& edge_encoder,
                  SerializationOptions options = {},
                  EdgePrefilter prefilter = {});

  ScorerKind kind() const override { return ScorerKind::kDotProduct; }
  double Score(const ContextualMention& m, const Edge& e) const override;
  std::vector<RankedEdge> SearchEdges(const ContextualMention& m,
                                      std::size_t top_n) const;

  std::string MentionKey(const ContextualMention& m) const;
  std::string EdgeKey(const Edge& e) const;

 private:
  const Ontology& ontology_;
  CachingEmbedder& mention_encoder_;
  CachingEmbedder& edge_encoder_;
  SerializationOptions options_;
  EdgePrefilter prefilter_;
};

// Applies one EdgeScorer to each edge.
double ScoreEdge(const EdgeScorer& scorer, const ContextualMention& m,
                 const Edge& e);

// When `top_seed_concept` is a leaf, every leaf edge is lifted to
// max(score) + epsilon so it ranks ahead of all non-leaf edges, and the
// result comes back sorted; the base score keeps boosted edges in their
// prior relative order. Otherwise the input is returned untouched. Set
// membership never changes.
std::vector<ScoredEdge> ApplyLeafRule(const Ontology& o,
                                      std::string_view top_seed_concept,
                                      std::vector<ScoredEdge> scored,
                                      double epsilon = 1e-6);

enum class SearchMethod { kLexical, kFixedEmbedding, kEdgeBiEncoder };

std::string_view ToString(SearchMethod method);
SearchMethod SearchMethodFromString(std::string_view name);

struct CandidateOptions {
  // Upper bound on seed concepts consumed by edge formation.
  std::size_t max_seed_concepts = 50;
  double leaf_epsilon = 1e-6;
};

class CandidateGenerator {
 public:
  // Concept-mean scorers drive the lexical and fixed-embedding methods;
  // BiEncoderScorer drives the edge bi-encoder.
  CandidateGenerator(const Ontology& o, const EdgeScorer& scorer,
                     CandidateOptions options = {});

  SearchMethod method() const { return method_; }

  // `k` must be even and >= 2; k/2 seed edges are enriched and cut to k.
  CandidateSlate Generate(const ContextualMention& m, std::size_t k) const;

  // Per-mention generation on a bounded worker pool; output is index
  // aligned with `mentions` regardless of `parallelism`.
  std::vector<CandidateSlate> GenerateAll(
      const std::vector<ContextualMention>& mentions, std::size_t k,
      std::size_t parallelism = 1) const;

 private:
  CandidateSlate GenerateFromConcepts(const ContextualMention& m,
                                      std::size_t k) const;
  CandidateSlate GenerateFromEdges(const ContextualMention& m,
                                   std::size_t k) const;
  std::vector<ScoredEdge> ScoreConceptMean(const ContextualMention& m,
                                           const EdgeSet& edges,
                                           const EdgeSet& seeds,
                                           EdgeOrigin seed_origin) const;

  const Ontology& ontology_;
  const EdgeScorer& scorer_;
  CandidateOptions options_;
  SearchMethod method_;
};

}  // namespace ontoplace

#endif  // ONTOPLACE_CANDIDATES_H_
