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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "ontoplace/error.h"
#include "ontoplace/pipeline.h"
#include "test_util.h"

namespace ontoplace {
namespace {

using testing::PairSet;
using testing::ToPairs;

Ontology Build(const std::vector<std::pair<std::string, std::string>>& labeled,
               const std::vector<std::pair<ConceptId, ConceptId>>& pairs) {
  std::vector<Concept> concepts;
  for (const auto& [id, label] : labeled) {
    concepts.push_back({id, label, false, std::nullopt, std::nullopt});
  }
  return Ontology::FromParts(concepts, pairs);
}

Ontology Ids(const std::vector<std::string>& ids,
             const std::vector<std::pair<ConceptId, ConceptId>>& pairs) {
  std::vector<std::pair<std::string, std::string>> labeled;
  for (const auto& id : ids) labeled.emplace_back(id, id);
  return Build(labeled, pairs);
}

TEST(FormEdges, ParentsAndChild) {
  const Ontology o = Ids({"p1", "p2", "a", "c1"},
                         {{"p1", "a"}, {"p2", "a"}, {"a", "c1"}});
  EXPECT_EQ(ToPairs(FormEdges(o, "a")),
            (PairSet{{"p1", "a"},
                     {"p2", "a"},
                     {"a", "c1"},
                     {"p1", "c1"},
                     {"p2", "c1"},
                     {"a", "NULL"}}));
}

TEST(FormEdges, IsolatedConcept) {
  const Ontology o = Ids({"a"}, {});
  EXPECT_EQ(ToPairs(FormEdges(o, "a")), (PairSet{{"a", "NULL"}}));
  EXPECT_THROW(FormEdges(o, "zz"), NotFoundError);
}

TEST(FormEdges, NoParentLeafOverGeneration) {
  // The seed's parent never gets its own leaf edge from formation.
  const Ontology o = Ids({"neoplasm", "carcinoma", "subtype"},
                         {{"neoplasm", "carcinoma"}, {"carcinoma", "subtype"}});
  const PairSet formed = ToPairs(FormEdges(o, "carcinoma"));
  EXPECT_EQ(formed.count({"neoplasm", "NULL"}), 0u);
  EXPECT_EQ(formed.count({"neoplasm", "subtype"}), 1u);
}

TEST(FormEdges, MatchesOracleOnRandomGraphs) {
  std::mt19937_64 rng(101);
  for (int g = 0; g < 120; ++g) {
    const auto graph = testing::MakeRandomGraph(rng, 200, g % 6 == 0);
    for (std::size_t i = 0; i < graph.ids.size(); i += 3) {
      ASSERT_EQ(ToPairs(FormEdges(graph.ontology, graph.ids[i])),
                testing::OracleFormEdges(graph.subsumptions, graph.ids[i]))
          << "graph " << g << " seed " << graph.ids[i];
    }
  }
}

TEST(EnrichEdges, NonLeafSeed) {
  const Ontology o = Ids({"g", "p", "c", "d"}, {{"g", "p"}, {"p", "c"}, {"c", "d"}});
  EXPECT_EQ(ToPairs(EnrichEdges(o, {{"p", "c"}})),
            (PairSet{{"p", "c"},
                     {"g", "c"},
                     {"p", "d"},
                     {"g", "d"},
                     {"p", "NULL"},
                     {"g", "NULL"}}));
}

TEST(EnrichEdges, LeafSeedExpandsParentSideOnly) {
  const Ontology o = Ids({"g", "p"}, {{"g", "p"}});
  EXPECT_EQ(ToPairs(EnrichEdges(o, {{"p", "NULL"}})),
            (PairSet{{"p", "NULL"}, {"g", "NULL"}}));
}

TEST(EnrichEdges, SharedExpansionsDeduplicated) {
  const Ontology o = Ids({"g", "p", "c", "d"}, {{"g", "p"}, {"p", "c"}, {"c", "d"}});
  const EdgeSet once = EnrichEdges(o, {{"p", "c"}});
  const EdgeSet twice = EnrichEdges(o, {{"p", "c"}, {"g", "c"}, {"p", "c"}});
  EXPECT_EQ(ToPairs(twice).size(), twice.size());
  for (const auto& e : once) EXPECT_EQ(twice.count(e), 1u);
  EXPECT_THROW(EnrichEdges(o, {{"zz", "NULL"}}), NotFoundError);
  EXPECT_THROW(EnrichEdges(o, {{"p", "zz"}}), NotFoundError);
}

TEST(EnrichEdges, MatchesOracleOnRandomGraphs) {
  std::mt19937_64 rng(202);
  for (int g = 0; g < 120; ++g) {
    const auto graph = testing::MakeRandomGraph(rng, 200, g % 6 == 0);
    auto space = graph.ontology.EnumerateEdgeSpace();
    std::shuffle(space.begin(), space.end(), rng);
    const std::size_t n =
        std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(25, space.size()))(rng);
    std::vector<Edge> seeds(space.begin(), space.begin() + n);
    std::vector<testing::Pair> seed_pairs;
    for (const auto& e : seeds) seed_pairs.emplace_back(e.parent, e.child);
    ASSERT_EQ(ToPairs(EnrichEdges(graph.ontology, seeds)),
              testing::OracleEnrichEdges(graph.subsumptions, seed_pairs))
        << "graph " << g;
  }
}

ScoredEdge Scored(const std::string& p, const std::string& c, double s) {
  return {{p, c}, s, s, EdgeOrigin::kSeedEdge};
}

TEST(LeafRule, LeafTopSeedLiftsLeafEdges) {
  const Ontology o = Ids({"x", "y", "a"}, {{"x", "y"}});
  const auto out = ApplyLeafRule(
      o, "a", {Scored("x", "y", 0.9), Scored("a", "NULL", 0.2)}, 1e-6);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].edge, (Edge{"a", "NULL"}));
  EXPECT_DOUBLE_EQ(out[0].score, 0.9 + 1e-6);
  EXPECT_DOUBLE_EQ(out[0].base_score, 0.2);
  EXPECT_EQ(out[1].edge, (Edge{"x", "y"}));
}

TEST(LeafRule, NonLeafTopSeedUnchanged) {
  const Ontology o = Ids({"x", "y", "a"}, {{"x", "y"}});
  const std::vector<ScoredEdge> in = {Scored("a", "NULL", 0.2),
                                      Scored("x", "y", 0.9)};
  const auto out = ApplyLeafRule(o, "x", in, 1e-6);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].edge, in[0].edge);
  EXPECT_EQ(out[0].score, in[0].score);
  EXPECT_EQ(out[1].edge, in[1].edge);
}

TEST(LeafRule, AllLeafEdgesKeepRelativeOrder) {
  const Ontology o = Ids({"a", "b", "c"}, {});
  const auto out = ApplyLeafRule(
      o, "a",
      {Scored("c", "NULL", 0.1), Scored("a", "NULL", 0.7), Scored("b", "NULL", 0.4)},
      1e-6);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].edge.parent, "a");
  EXPECT_EQ(out[1].edge.parent, "b");
  EXPECT_EQ(out[2].edge.parent, "c");
}

// Similarities from a fixed table.
class TableScorer : public ConceptMeanScorer {
 public:
  explicit TableScorer(std::map<std::string, double> sims) : sims_(std::move(sims)) {}
  ScorerKind kind() const override { return ScorerKind::kFixedCosineMean; }
  double ConceptSimilarity(const ContextualMention&,
                           std::string_view id) const override {
    auto it = sims_.find(std::string(id));
    return it == sims_.end() ? 0.0 : it->second;
  }
  std::vector<RankedConcept> SearchConcepts(const ContextualMention&,
                                            std::size_t top_n) const override {
    std::vector<RankedConcept> out;
    for (const auto& [id, s] : sims_) out.push_back({id, s});
    std::sort(out.begin(), out.end(), RankedConceptBefore);
    if (out.size() > top_n) out.resize(top_n);
    return out;
  }

 private:
  std::map<std::string, double> sims_;
};

TEST(ScoreEdge, ConceptMeanAndLeafRouting) {
  const TableScorer scorer({{"p", 0.8}, {"c", 0.6}});
  const ContextualMention m{"1", "x", "", "", std::nullopt};
  EXPECT_DOUBLE_EQ(ScoreEdge(scorer, m, {"p", "c"}), 0.7);
  EXPECT_DOUBLE_EQ(ScoreEdge(scorer, m, {"q", "r"}), 0.0);
  EXPECT_THROW(ScoreEdge(scorer, m, {"p", "NULL"}), InvalidArgumentError);
  EXPECT_DOUBLE_EQ(scorer.LeafBaseScore(m, {"p", "NULL"}), 0.4);
}

TEST(ScoreEdge, BiEncoderLeafEdgeIsDotAgainstNullSerialization) {
  const Ontology o = Ids({"a", "b"}, {{"a", "b"}});
  HashingEmbeddingProvider provider(32);
  EmbeddingStore mention_store;
  EmbeddingStore edge_store;
  CachingEmbedder mentions(provider, mention_store);
  CachingEmbedder edges(provider, edge_store);
  const BiEncoderScorer scorer(o, mentions, edges);
  const ContextualMention m{"1", "a", "left", "right", std::nullopt};
  const Edge leaf{"a", "NULL"};
  EXPECT_EQ(scorer.EdgeKey(leaf), "[CLS] a [P-TAG] [NULL] [C-TAG] [SEP]");
  const double expected = Dot(provider.EmbedOne(scorer.MentionKey(m)),
                              provider.EmbedOne(scorer.EdgeKey(leaf)));
  EXPECT_DOUBLE_EQ(ScoreEdge(scorer, m, leaf), expected);
}

// Ten concepts; traced below for "chronic kidney failure" at k=4.
Ontology TracedToy() {
  return Build({{"r", "disorder"},
                {"a", "kidney disorder"},
                {"b", "chronic kidney disorder"},
                {"c", "acute kidney disorder"},
                {"d", "chronic kidney disorder stage one"},
                {"e", "heart disorder"},
                {"f", "chronic heart disorder"},
                {"g", "liver disorder"},
                {"h", "fatty liver"},
                {"i", "lung disorder"}},
               {{"r", "a"},
                {"r", "e"},
                {"r", "g"},
                {"r", "i"},
                {"a", "b"},
                {"a", "c"},
                {"b", "d"},
                {"e", "f"},
                {"g", "h"}});
}

TEST(Generate, HandTracedLexicalK4) {
  // df: kidney 4, chronic 3 of |D| = 10. sim(b) = sim(d) = ln(10/3) +
  // ln(10/4); sim(a) = sim(c) = ln 2.5; sim(f) = ln(10/3); sim(r) = 0.
  // Seeds: b (top, non-leaf) forms {a->b, b->d, a->d, b->NULL}; the best
  // two are b->d, then a->b (ties a->d on score, wins on child id).
  // Enrichment adds r->b, r->d, a->NULL, r->NULL; the fourth slot is a
  // three-way tie at sim(b)/2 won by b->NULL on parent id.
  const Ontology o = TracedToy();
  const auto index = LexicalIndex::Build(o, Tokenizer::Whitespace());
  const LexicalScorer scorer(index);
  const CandidateGenerator generator(o, scorer);
  const ContextualMention m{"m", "chronic kidney failure", "", "", std::nullopt};
  const CandidateSlate slate = generator.Generate(m, 4);

  const double sb = std::log(10.0 / 3.0) + std::log(2.5);
  const double sa = std::log(2.5);
  ASSERT_EQ(slate.edges.size(), 4u);
  EXPECT_EQ(slate.edges[0].edge, (Edge{"b", "d"}));
  EXPECT_NEAR(slate.edges[0].score, sb, 1e-12);
  EXPECT_EQ(slate.edges[0].origin, EdgeOrigin::kSeedEdge);
  EXPECT_EQ(slate.edges[1].edge, (Edge{"a", "b"}));
  EXPECT_NEAR(slate.edges[1].score, (sa + sb) / 2, 1e-12);
  EXPECT_EQ(slate.edges[1].origin, EdgeOrigin::kSeedEdge);
  EXPECT_EQ(slate.edges[2].edge, (Edge{"a", "d"}));
  EXPECT_NEAR(slate.edges[2].score, (sa + sb) / 2, 1e-12);
  EXPECT_EQ(slate.edges[2].origin, EdgeOrigin::kEnriched);
  EXPECT_EQ(slate.edges[3].edge, (Edge{"b", "NULL"}));
  EXPECT_NEAR(slate.edges[3].score, sb / 2, 1e-12);
  EXPECT_EQ(slate.edges[3].origin, EdgeOrigin::kLeafEnriched);
}

TEST(Generate, LeafTopSeedPutsLeafEdgesFirst) {
  const Ontology o = TracedToy();
  const auto index = LexicalIndex::Build(o, Tokenizer::Whitespace());
  const LexicalScorer scorer(index);
  const CandidateGenerator generator(o, scorer);
  const ContextualMention m{"m", "fatty liver", "", "", std::nullopt};
  const CandidateSlate slate = generator.Generate(m, 10);
  ASSERT_FALSE(slate.edges.empty());
  // h is a leaf; every leaf edge outranks every non-leaf edge.
  bool seen_non_leaf = false;
  for (const auto& s : slate.edges) {
    if (!s.edge.is_leaf()) seen_non_leaf = true;
    EXPECT_FALSE(seen_non_leaf && s.edge.is_leaf()) << ToString(s.edge);
  }
  EXPECT_EQ(slate.edges.front().edge, (Edge{"h", "NULL"}));
}

TEST(Generate, ZeroOverlapGivesEmptySlate) {
  const Ontology o = TracedToy();
  const auto index = LexicalIndex::Build(o, Tokenizer::Whitespace());
  const LexicalScorer scorer(index);
  const CandidateGenerator generator(o, scorer);
  const ContextualMention m{"m", "unrelated words", "", "", std::nullopt};
  EXPECT_TRUE(generator.Generate(m, 10).edges.empty());
}

TEST(Generate, KMustBeEvenAndAtLeastTwo) {
  const Ontology o = TracedToy();
  const auto index = LexicalIndex::Build(o, Tokenizer::Whitespace());
  const LexicalScorer scorer(index);
  const CandidateGenerator generator(o, scorer);
  const ContextualMention m{"m", "kidney", "", "", std::nullopt};
  EXPECT_THROW(generator.Generate(m, 3), InvalidArgumentError);
  EXPECT_THROW(generator.Generate(m, 0), InvalidArgumentError);
  EXPECT_LE(generator.Generate(m, 2).edges.size(), 2u);
}

TEST(Generate, SlatesAreDuplicateFreeAndBounded) {
  auto pipeline = testing::ToyPipeline();
  for (auto method : {SearchMethod::kLexical, SearchMethod::kFixedEmbedding,
                      SearchMethod::kEdgeBiEncoder}) {
    for (const auto& m : testing::ToyMentions()) {
      for (std::size_t k : {2u, 10u, 50u}) {
        const auto slate = pipeline->Generate(m, k, method);
        EXPECT_LE(slate.edges.size(), k);
        EXPECT_EQ(ToPairs(slate.edge_list()).size(), slate.edges.size());
        for (std::size_t i = 1; i < slate.edges.size(); ++i) {
          EXPECT_FALSE(ScoredEdgeBefore(slate.edges[i], slate.edges[i - 1]));
        }
      }
    }
  }
}

TEST(Generate, ToySlatesMatchIndependentOracle) {
  auto pipeline = testing::ToyPipeline();
  const auto mentions = testing::ToyMentions();
  const std::vector<std::pair<SearchMethod, std::string>> methods = {
      {SearchMethod::kLexical, "lexical"}, {SearchMethod::kFixedEmbedding, "fixed"}};
  for (const auto& [method, name] : methods) {
    for (std::size_t k : {10u, 50u}) {
      const auto slates =
          pipeline->Generator(method).GenerateAll(mentions, k, 1);
      const std::string golden = testing::ToyDir() + "/golden_slates_" + name +
                                 "_k" + std::to_string(k) + ".jsonl";
      EXPECT_EQ(testing::DiffAgainstGolden(slates, golden, 1e-12), "") << golden;
    }
  }
}

TEST(Generate, ParallelismDoesNotChangeOutput) {
  auto pipeline = testing::ToyPipeline();
  const auto mentions = testing::ToyMentions();
  for (auto method : {SearchMethod::kLexical, SearchMethod::kFixedEmbedding,
                      SearchMethod::kEdgeBiEncoder}) {
    const auto& g = pipeline->Generator(method);
    const auto serial = g.GenerateAll(mentions, 10, 1);
    const auto parallel = g.GenerateAll(mentions, 10, 4);
    ASSERT_EQ(serial.size(), parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      EXPECT_EQ(SlateToJson(serial[i]).dump(), SlateToJson(parallel[i]).dump());
    }
  }
}

TEST(Generate, RecallMonotoneInK) {
  auto pipeline = testing::ToyPipeline();
  for (auto method : {SearchMethod::kLexical, SearchMethod::kFixedEmbedding,
                      SearchMethod::kEdgeBiEncoder}) {
    for (const auto& m : testing::ToyMentions()) {
      const auto small = pipeline->Generate(m, 10, method).edge_list();
      const auto large = pipeline->Generate(m, 50, method).edge_list();
      const PairSet large_set = ToPairs(large);
      for (const auto& gold : *m.gold_edges) {
        const bool hit_small =
            std::find(small.begin(), small.end(), gold) != small.end();
        if (hit_small) {
          EXPECT_EQ(large_set.count({gold.parent, gold.child}), 1u)
              << m.id << " " << ToString(gold);
        }
      }
    }
  }
}

TEST(SlateJson, RoundTrip) {
  auto pipeline = testing::ToyPipeline();
  const auto m = testing::ToyMentions().front();
  CandidateSlate slate = pipeline->Generate(m, 10, SearchMethod::kLexical);
  slate.ontology_version = 7;
  const auto j = SlateToJson(slate);
  const CandidateSlate back = SlateFromJson(j);
  EXPECT_EQ(SlateToJson(back).dump(), j.dump());
  EXPECT_EQ(back.ontology_version, 7u);
  EXPECT_EQ(back.edges.size(), slate.edges.size());
}

TEST(Pipeline, MissingProviderIsRejected) {
  auto o = std::make_shared<const Ontology>(TracedToy());
  PlacementPipeline pipeline(o, std::make_shared<PipelineResources>());
  EXPECT_THROW(pipeline.Generator(SearchMethod::kFixedEmbedding),
               InvalidArgumentError);
  EXPECT_THROW(pipeline.Generator(SearchMethod::kEdgeBiEncoder),
               InvalidArgumentError);
  EXPECT_NO_THROW(pipeline.Generator(SearchMethod::kLexical));
}

}  // namespace
}  // namespace ontoplace
