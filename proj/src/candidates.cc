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

#include "ontoplace/candidates.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "ontoplace/error.h"
#include "ontoplace/records.h"

namespace ontoplace {
namespace {

const std::string kNull(kNullConcept);

void InsertIfProper(EdgeSet* out, const ConceptId& parent,
                    const ConceptId& child) {
  // Cycles can make both ends coincide.
  if (parent != child) out->insert(Edge{parent, child});
}

void CheckK(std::size_t k) {
  if (k < 2 || k % 2 != 0) {
    throw InvalidArgumentError("k must be even and >= 2, got " +
                               std::to_string(k));
  }
}

}  // namespace

std::string_view ToString(EdgeOrigin origin) {
  switch (origin) {
    case EdgeOrigin::kSeedConceptFormed:
      return "seed-concept-formed";
    case EdgeOrigin::kSeedEdge:
      return "seed-edge";
    case EdgeOrigin::kEnriched:
      return "enriched";
    case EdgeOrigin::kLeafEnriched:
      return "leaf-enriched";
  }
  return "unknown";
}

EdgeOrigin EdgeOriginFromString(std::string_view name) {
  for (auto origin : {EdgeOrigin::kSeedConceptFormed, EdgeOrigin::kSeedEdge,
                      EdgeOrigin::kEnriched, EdgeOrigin::kLeafEnriched}) {
    if (ToString(origin) == name) return origin;
  }
  throw InvalidArgumentError("unknown edge origin '" + std::string(name) + "'");
}

std::string_view ToString(SearchMethod method) {
  switch (method) {
    case SearchMethod::kLexical:
      return "lexical";
    case SearchMethod::kFixedEmbedding:
      return "fixed";
    case SearchMethod::kEdgeBiEncoder:
      return "biencoder";
  }
  return "unknown";
}

SearchMethod SearchMethodFromString(std::string_view name) {
  if (name == "lexical") return SearchMethod::kLexical;
  if (name == "fixed" || name == "fixed-embedding") {
    return SearchMethod::kFixedEmbedding;
  }
  if (name == "biencoder" || name == "edge-biencoder") {
    return SearchMethod::kEdgeBiEncoder;
  }
  throw InvalidArgumentError("unknown search method '" + std::string(name) +
                             "'");
}

bool ScoredEdgeBefore(const ScoredEdge& a, const ScoredEdge& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.base_score != b.base_score) return a.base_score > b.base_score;
  return EdgeLess(a.edge, b.edge);
}

void SortSlate(std::vector<ScoredEdge>* edges) {
  std::sort(edges->begin(), edges->end(), ScoredEdgeBefore);
}

std::vector<Edge> CandidateSlate::edge_list() const {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back(e.edge);
  return out;
}

nlohmann::json SlateToJson(const CandidateSlate& slate) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : slate.edges) {
    rows.push_back(nlohmann::json::array(
        {e.edge.parent, e.edge.child, e.score, std::string(ToString(e.origin))}));
  }
  return nlohmann::json{{"mention", MentionToJson(slate.mention)},
                        {"k", slate.k},
                        {"version", slate.ontology_version},
                        {"edges", std::move(rows)}};
}

CandidateSlate SlateFromJson(const nlohmann::json& j) {
  CandidateSlate slate;
  slate.mention = MentionFromJson(j.at("mention"));
  slate.k = j.value("k", std::size_t{0});
  slate.ontology_version = j.value("version", std::uint64_t{0});
  for (const auto& row : j.at("edges")) {
    if (!row.is_array() || row.size() < 3) {
      throw InvalidArgumentError("slate row must be [parent, child, score, origin]");
    }
    ScoredEdge e;
    e.edge = EdgeFromJson(nlohmann::json::array({row[0], row[1]}));
    e.score = row[2].get<double>();
    e.base_score = e.score;
    e.origin = row.size() > 3 ? EdgeOriginFromString(row[3].get<std::string>())
                              : EdgeOrigin::kSeedEdge;
    slate.edges.push_back(std::move(e));
  }
  return slate;
}

EdgeSet FormEdges(const Ontology& o, std::string_view a) {
  const ConceptId seed(a);
  const auto& parents = o.parents(seed);
  const auto& children = o.children(seed);
  EdgeSet out;
  for (const auto& p : parents) InsertIfProper(&out, p, seed);
  for (const auto& c : children) InsertIfProper(&out, seed, c);
  for (const auto& p : parents) {
    for (const auto& c : children) InsertIfProper(&out, p, c);
  }
  out.insert(Edge{seed, kNull});
  return out;
}

EdgeSet EnrichEdges(const Ontology& o, const std::vector<Edge>& seeds) {
  EdgeSet out;
  for (const auto& seed : seeds) {
    if (seed.parent == kNullConcept || !o.contains(seed.parent)) {
      throw NotFoundError("dangling seed parent '" + seed.parent + "'");
    }
    if (!seed.is_leaf() && !o.contains(seed.child)) {
      throw NotFoundError("dangling seed child '" + seed.child + "'");
    }
    std::vector<ConceptId> uppers{seed.parent};
    for (const auto& g : o.parents(seed.parent)) uppers.push_back(g);

    std::vector<ConceptId> lowers{seed.child};
    if (!seed.is_leaf()) {
      for (const auto& d : o.children(seed.child)) lowers.push_back(d);
    }
    for (const auto& p : uppers) {
      for (const auto& c : lowers) InsertIfProper(&out, p, c);
      if (!seed.is_leaf()) out.insert(Edge{p, kNull});
    }
  }
  return out;
}

double ConceptMeanScorer::Score(const ContextualMention& m,
                                const Edge& e) const {
  if (e.is_leaf()) {
    throw InvalidArgumentError(
        "concept-mean edge score is undefined for leaf edge " + ToString(e));
  }
  return (ConceptSimilarity(m, e.parent) + ConceptSimilarity(m, e.child)) / 2.0;
}

double ConceptMeanScorer::LeafBaseScore(const ContextualMention& m,
                                        const Edge& e) const {
  return ConceptSimilarity(m, e.parent) / 2.0;
}

FixedEmbeddingScorer::FixedEmbeddingScorer(const Ontology& o,
                                           CachingEmbedder& embedder)
    : ontology_(o), embedder_(embedder) {
  std::vector<std::string> texts;
  concept_keys_.reserve(o.num_concepts());
  for (const auto& [id, c] : o.concepts()) {
    concept_keys_.emplace_back(id, Verbalize(c));
    texts.push_back(concept_keys_.back().second);
  }
  if (!texts.empty()) embedder_.EmbedTexts(texts);
}

double FixedEmbeddingScorer::ConceptSimilarity(
    const ContextualMention& m, std::string_view concept_id) const {
  const auto mention = embedder_.EmbedText(m.mention);
  const auto target = embedder_.EmbedText(ontology_.text_of(concept_id));
  return Cosine(mention, target);
}

std::vector<RankedConcept> FixedEmbeddingScorer::SearchConcepts(
    const ContextualMention& m, std::size_t top_n) const {
  if (concept_keys_.empty()) return {};
  embedder_.EmbedText(m.mention);
  return SearchConceptsByEmbedding(embedder_.store(), m.mention, concept_keys_,
                                   top_n);
}

double LexicalScorer::ConceptSimilarity(const ContextualMention& m,
                                        std::string_view concept_id) const {
  return index_.Similarity(m.mention, concept_id);
}

std::vector<RankedConcept> LexicalScorer::SearchConcepts(
    const ContextualMention& m, std::size_t top_n) const {
  return index_.Search(m.mention, top_n);
}

BiEncoderScorer::BiEncoderScorer(const Ontology& o,
                                 CachingEmbedder& mention_encoder,
                                 CachingEmbedder& edge_encoder,
                                 SerializationOptions options,
                                 EdgePrefilter prefilter)
    : ontology_(o),
      mention_encoder_(mention_encoder),
      edge_encoder_(edge_encoder),
      options_(options),
      prefilter_(std::move(prefilter)) {}

std::string BiEncoderScorer::MentionKey(const ContextualMention& m) const {
  return SerializeMention(m, options_.max_context_units, options_.with_context);
}

std::string BiEncoderScorer::EdgeKey(const Edge& e) const {
  return SerializeEdge(ontology_, e, options_.max_concept_units);
}

double BiEncoderScorer::Score(const ContextualMention& m, const Edge& e) const {
  return Dot(mention_encoder_.EmbedText(MentionKey(m)),
             edge_encoder_.EmbedText(EdgeKey(e)));
}

std::vector<RankedEdge> BiEncoderScorer::SearchEdges(const ContextualMention& m,
                                                     std::size_t top_n) const {
  const std::vector<Edge> space =
      prefilter_ ? prefilter_(ontology_, m) : ontology_.EnumerateEdgeSpace();
  if (space.empty()) return {};
  std::vector<std::pair<Edge, std::string>> keyed;
  std::vector<std::string> texts;
  keyed.reserve(space.size());
  texts.reserve(space.size());
  for (const auto& e : space) {
    keyed.emplace_back(e, EdgeKey(e));
    texts.push_back(keyed.back().second);
  }
  edge_encoder_.EmbedTexts(texts);
  const auto mention = mention_encoder_.EmbedText(MentionKey(m));

  // Mention and edge towers may use separate stores.
  std::vector<RankedEdge> ranked;
  ranked.reserve(keyed.size());
  for (const auto& [edge, key] : keyed) {
    ranked.push_back({edge, Dot(mention, edge_encoder_.store().Get(key))});
  }
  const std::size_t n = std::min(top_n, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + n, ranked.end(),
                    [](const RankedEdge& a, const RankedEdge& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return EdgeLess(a.edge, b.edge);
                    });
  ranked.resize(n);
  return ranked;
}

double ScoreEdge(const EdgeScorer& scorer, const ContextualMention& m,
                 const Edge& e) {
  return scorer.Score(m, e);
}

std::vector<ScoredEdge> ApplyLeafRule(const Ontology& o,
                                      std::string_view top_seed_concept,
                                      std::vector<ScoredEdge> scored,
                                      double epsilon) {
  if (scored.empty() || !o.is_leaf(top_seed_concept)) return scored;
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& e : scored) top = std::max(top, e.score);
  double boosted = top + epsilon;
  if (!(boosted > top)) {
    boosted = std::nextafter(top, std::numeric_limits<double>::infinity());
  }
  for (auto& e : scored) {
    if (e.edge.is_leaf()) e.score = boosted;
  }
  SortSlate(&scored);
  return scored;
}

CandidateGenerator::CandidateGenerator(const Ontology& o,
                                       const EdgeScorer& scorer,
                                       CandidateOptions options)
    : ontology_(o), scorer_(scorer), options_(options) {
  switch (scorer.kind()) {
    case ScorerKind::kLexicalIdfMean:
      method_ = SearchMethod::kLexical;
      break;
    case ScorerKind::kFixedCosineMean:
      method_ = SearchMethod::kFixedEmbedding;
      break;
    case ScorerKind::kDotProduct:
      method_ = SearchMethod::kEdgeBiEncoder;
      break;
  }
  if (method_ == SearchMethod::kEdgeBiEncoder) {
    if (dynamic_cast<const BiEncoderScorer*>(&scorer) == nullptr) {
      throw InvalidArgumentError("dot-product generation needs a BiEncoderScorer");
    }
  } else if (dynamic_cast<const ConceptMeanScorer*>(&scorer) == nullptr) {
    throw InvalidArgumentError("concept-mean generation needs a ConceptMeanScorer");
  }
  if (options_.max_seed_concepts == 0) {
    throw InvalidArgumentError("max_seed_concepts must be positive");
  }
}

std::vector<ScoredEdge> CandidateGenerator::ScoreConceptMean(
    const ContextualMention& m, const EdgeSet& edges, const EdgeSet& seeds,
    EdgeOrigin seed_origin) const {
  const auto& scorer = static_cast<const ConceptMeanScorer&>(scorer_);
  std::vector<ScoredEdge> scored;
  scored.reserve(edges.size());
  for (const auto& e : edges) {
    ScoredEdge s;
    s.edge = e;
    s.score = e.is_leaf() ? scorer.LeafBaseScore(m, e) : scorer.Score(m, e);
    s.base_score = s.score;
    if (seeds.empty() || seeds.count(e) > 0) {
      s.origin = seed_origin;
    } else {
      s.origin = e.is_leaf() ? EdgeOrigin::kLeafEnriched : EdgeOrigin::kEnriched;
    }
    scored.push_back(std::move(s));
  }
  return scored;
}

CandidateSlate CandidateGenerator::GenerateFromConcepts(
    const ContextualMention& m, std::size_t k) const {
  const auto& scorer = static_cast<const ConceptMeanScorer&>(scorer_);
  const std::size_t half = k / 2;
  CandidateSlate slate{m, k, {}, 0};

  const auto ranked = scorer.SearchConcepts(m, options_.max_seed_concepts);
  if (ranked.empty()) return slate;
  const ConceptId& top_seed = ranked.front().id;

  EdgeSet formed;
  for (const auto& seed : ranked) {
    formed.merge(FormEdges(ontology_, seed.id));
    if (formed.size() >= half) break;
  }

  auto formed_scored =
      ScoreConceptMean(m, formed, {}, EdgeOrigin::kSeedConceptFormed);
  formed_scored = ApplyLeafRule(ontology_, top_seed, std::move(formed_scored),
                                options_.leaf_epsilon);
  SortSlate(&formed_scored);
  if (formed_scored.size() > half) formed_scored.resize(half);

  std::vector<Edge> seed_edges;
  EdgeSet seed_set;
  for (const auto& s : formed_scored) {
    seed_edges.push_back(s.edge);
    seed_set.insert(s.edge);
  }

  const EdgeSet enriched = EnrichEdges(ontology_, seed_edges);
  auto scored = ScoreConceptMean(m, enriched, seed_set, EdgeOrigin::kSeedEdge);
  scored = ApplyLeafRule(ontology_, top_seed, std::move(scored),
                         options_.leaf_epsilon);
  SortSlate(&scored);
  if (scored.size() > k) scored.resize(k);
  slate.edges = std::move(scored);
  return slate;
}

CandidateSlate CandidateGenerator::GenerateFromEdges(const ContextualMention& m,
                                                     std::size_t k) const {
  const auto& scorer = static_cast<const BiEncoderScorer&>(scorer_);
  CandidateSlate slate{m, k, {}, 0};
  const auto seeds = scorer.SearchEdges(m, k / 2);
  if (seeds.empty()) return slate;

  std::vector<Edge> seed_edges;
  EdgeSet seed_set;
  for (const auto& s : seeds) {
    seed_edges.push_back(s.edge);
    seed_set.insert(s.edge);
  }
  const EdgeSet enriched = EnrichEdges(ontology_, seed_edges);
  std::vector<ScoredEdge> scored;
  scored.reserve(enriched.size());
  for (const auto& e : enriched) {
    ScoredEdge s;
    s.edge = e;
    s.score = scorer.Score(m, e);
    s.base_score = s.score;
    if (seed_set.count(e) > 0) {
      s.origin = EdgeOrigin::kSeedEdge;
    } else {
      s.origin = e.is_leaf() ? EdgeOrigin::kLeafEnriched : EdgeOrigin::kEnriched;
    }
    scored.push_back(std::move(s));
  }
  SortSlate(&scored);
  if (scored.size() > k) scored.resize(k);
  slate.edges = std::move(scored);
  return slate;
}

CandidateSlate CandidateGenerator::Generate(const ContextualMention& m,
                                            std::size_t k) const {
  CheckK(k);
  if (ontology_.num_concepts() == 0) return CandidateSlate{m, k, {}, 0};
  return method_ == SearchMethod::kEdgeBiEncoder ? GenerateFromEdges(m, k)
                                                 : GenerateFromConcepts(m, k);
}

std::vector<CandidateSlate> CandidateGenerator::GenerateAll(
    const std::vector<ContextualMention>& mentions, std::size_t k,
    std::size_t parallelism) const {
  CheckK(k);
  std::vector<CandidateSlate> out(mentions.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < mentions.size(); i = next++) {
      try {
        out[i] = Generate(mentions[i], k);
      } catch (...) {
        std::scoped_lock lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const std::size_t threads =
      std::max<std::size_t>(1, std::min(parallelism, mentions.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace ontoplace
