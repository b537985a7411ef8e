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

#include "ontoplace/ontology.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "ontoplace/error.h"
#include "test_util.h"

namespace ontoplace {
namespace {

using testing::Pair;
using testing::PairSet;
using testing::ToPairs;

Concept Atom(const std::string& id, const std::string& label = "") {
  return {id, label.empty() ? id : label, false, std::nullopt, std::nullopt};
}

Ontology Build(const std::vector<std::string>& ids,
               const std::vector<std::pair<ConceptId, ConceptId>>& pairs) {
  std::vector<Concept> concepts;
  for (const auto& id : ids) concepts.push_back(Atom(id));
  return Ontology::FromParts(concepts, pairs);
}

TEST(OntologyLoad, ThreeConceptChain) {
  std::istringstream concepts(
      "{\"id\":\"a\",\"label\":\"A\",\"complex\":false}\n"
      "{\"id\":\"b\",\"label\":\"B\",\"complex\":false}\n"
      "\n"
      "{\"id\":\"c\",\"label\":\"C\",\"complex\":false}\n");
  std::istringstream pairs("a\tb\nb\tc\n");
  LoadReport report;
  const Ontology o = Ontology::Load(concepts, pairs, &report);
  EXPECT_EQ(o.num_concepts(), 3u);
  EXPECT_EQ(o.num_subsumptions(), 2u);
  EXPECT_EQ(report.concepts, 3u);
  EXPECT_EQ(report.subsumptions, 2u);
  EXPECT_TRUE(report.warnings.empty());
}

TEST(OntologyLoad, DanglingIdNamesTheId) {
  std::istringstream concepts("{\"id\":\"a\",\"label\":\"A\",\"complex\":false}\n");
  std::istringstream pairs("a\tx\n");
  try {
    Ontology::Load(concepts, pairs);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos) << e.what();
  }
}

TEST(OntologyLoad, MalformedLinesReportLineNumbers) {
  {
    std::istringstream concepts(
        "{\"id\":\"a\",\"label\":\"A\",\"complex\":false}\n{not json\n");
    std::istringstream pairs("");
    try {
      Ontology::Load(concepts, pairs);
      FAIL();
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2u);
    }
  }
  {
    std::istringstream concepts(
        "{\"id\":\"a\",\"label\":\"A\",\"complex\":false}\n"
        "{\"id\":\"a\",\"label\":\"again\",\"complex\":false}\n");
    std::istringstream pairs("");
    EXPECT_THROW(Ontology::Load(concepts, pairs), ParseError);
  }
  {
    std::istringstream concepts(
        "{\"id\":\"a\",\"label\":\"A\",\"complex\":false}\n"
        "{\"id\":\"b\",\"label\":\"B\",\"complex\":false}\n");
    std::istringstream pairs("a\tb\na b\n");
    try {
      Ontology::Load(concepts, pairs);
      FAIL();
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2u);
    }
  }
}

TEST(OntologyLoad, NullIdIsReserved) {
  std::istringstream concepts("{\"id\":\"NULL\",\"label\":\"x\",\"complex\":false}\n");
  std::istringstream pairs("");
  EXPECT_THROW(Ontology::Load(concepts, pairs), ParseError);
}

TEST(OntologyLoad, ComplexChildWarnsButLoads) {
  LoadReport report;
  const Ontology o = Ontology::LoadDirectory(testing::ToyDir(), &report);
  EXPECT_EQ(report.concepts, 31u);
  EXPECT_EQ(report.complex_concepts, 1u);
  EXPECT_EQ(report.subsumptions, 34u);
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_NE(report.warnings[0].find("X01"), std::string::npos);
  EXPECT_EQ(o.EnumerateEdgeSpace().size(), 74u);
}

TEST(OntologyQuery, ParentsAndChildren) {
  const Ontology o = Build({"a", "b", "c"}, {{"a", "b"}, {"c", "b"}});
  EXPECT_TRUE(o.parents("a").empty());
  EXPECT_EQ(o.parents("b"), (std::set<ConceptId>{"a", "c"}));
  EXPECT_THROW(o.parents("zz"), NotFoundError);
  EXPECT_THROW(o.children("zz"), NotFoundError);
  EXPECT_THROW(o.is_leaf("zz"), NotFoundError);

  const Ontology fan = Build({"a", "b", "c"}, {{"a", "b"}, {"a", "c"}});
  EXPECT_EQ(fan.children("a"), (std::set<ConceptId>{"b", "c"}));
  EXPECT_TRUE(fan.children("b").empty());
  EXPECT_TRUE(fan.is_leaf("b"));
  EXPECT_FALSE(fan.is_leaf("a"));
}

TEST(OntologyQuery, TenChildren) {
  std::vector<std::string> ids = {"root"};
  std::vector<std::pair<ConceptId, ConceptId>> pairs;
  for (int i = 0; i < 10; ++i) {
    ids.push_back("k" + std::to_string(i));
    pairs.emplace_back("root", ids.back());
  }
  const Ontology o = Build(ids, pairs);
  EXPECT_EQ(o.children("root").size(), 10u);
}

TEST(OntologyQuery, SingleParentMention) {
  const Ontology o =
      Build({"psoriasis with arthropathy", "psoriatic arthritis"},
            {{"psoriasis with arthropathy", "psoriatic arthritis"}});
  EXPECT_EQ(o.parents("psoriatic arthritis").size(), 1u);
}

TEST(OntologyQuery, ParentChildSymmetryOnRandomGraphs) {
  std::mt19937_64 rng(7);
  for (int g = 0; g < 50; ++g) {
    const auto graph = testing::MakeRandomGraph(rng, 60, g % 5 == 0);
    for (const auto& p : graph.ids) {
      for (const auto& c : graph.ontology.children(p)) {
        EXPECT_EQ(graph.ontology.parents(c).count(p), 1u);
      }
      for (const auto& q : graph.ontology.parents(p)) {
        EXPECT_EQ(graph.ontology.children(q).count(p), 1u);
      }
    }
  }
}

TEST(EdgeSpace, Chain) {
  const Ontology o = Build({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  EXPECT_EQ(ToPairs(o.EnumerateEdgeSpace()),
            (PairSet{{"a", "b"}, {"b", "c"}, {"a", "c"}, {"c", "NULL"}}));
}

TEST(EdgeSpace, SingleConcept) {
  const Ontology o = Build({"a"}, {});
  EXPECT_EQ(ToPairs(o.EnumerateEdgeSpace()), (PairSet{{"a", "NULL"}}));
}

TEST(EdgeSpace, Diamond) {
  // a -> b, a -> c, b -> d, c -> d: a->d reached twice, listed once.
  const Ontology o =
      Build({"a", "b", "c", "d"}, {{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}});
  const auto edges = o.EnumerateEdgeSpace();
  EXPECT_EQ(edges.size(), 6u);
  EXPECT_EQ(ToPairs(edges), (PairSet{{"a", "b"},
                                     {"a", "c"},
                                     {"b", "d"},
                                     {"c", "d"},
                                     {"a", "d"},
                                     {"d", "NULL"}}));
}

TEST(EdgeSpace, MatchesBruteForceOracle) {
  std::mt19937_64 rng(11);
  for (int g = 0; g < 120; ++g) {
    const auto graph = testing::MakeRandomGraph(rng, 200, g % 4 == 0);
    const auto edges = graph.ontology.EnumerateEdgeSpace();
    const PairSet got = ToPairs(edges);
    EXPECT_EQ(got.size(), edges.size()) << "duplicates in graph " << g;
    EXPECT_EQ(got, testing::OracleEdgeSpace(graph.ids, graph.subsumptions))
        << "graph " << g;
  }
}

TEST(Verbalize, AtomicLabel) {
  EXPECT_EQ(Verbalize(Atom("x", "Cognitive disorder")), "Cognitive disorder");
}

TEST(Verbalize, NestedExistential) {
  Concept c = Atom("x", "unused");
  c.complex = true;
  c.expression = ConceptExpression::Some(
      "RoleGroup",
      ConceptExpression::Some("DueTo", ConceptExpression::Atom("Disease")));
  EXPECT_EQ(Verbalize(c), "RoleGroup some (DueTo some Disease)");
}

TEST(Verbalize, ConjunctionAndStoredText) {
  Concept c = Atom("x", "unused");
  c.complex = true;
  c.expression = ConceptExpression::And(
      {ConceptExpression::Atom("A"), ConceptExpression::Atom("B")});
  EXPECT_EQ(Verbalize(c), "A and B");
  c.verbalization = "stored text";
  EXPECT_EQ(Verbalize(c), "stored text");

  Concept bare = Atom("y", "label");
  bare.complex = true;
  EXPECT_THROW(Verbalize(bare), InvalidArgumentError);
}

TEST(Verbalize, ToyComplexConcept) {
  const Ontology o = Ontology::LoadDirectory(testing::ToyDir());
  EXPECT_EQ(o.text_of("X01"),
            "disorder of kidney and due to some diabetes mellitus");
  EXPECT_EQ(o.text_of("NULL"), "NULL");
}

TEST(InsertPlacement, OnNonLeafEdge) {
  const Ontology o = Build({"a", "b"}, {{"a", "b"}});
  const Ontology next = o.InsertPlacement(Atom("m"), {{"a", "b"}});
  EXPECT_EQ(next.parents("m"), (std::set<ConceptId>{"a"}));
  EXPECT_EQ(next.children("m"), (std::set<ConceptId>{"b"}));
  // Non-destructive: the bypassed direct pair stays.
  EXPECT_EQ(next.parents("b"), (std::set<ConceptId>{"a", "m"}));
  EXPECT_EQ(o.num_concepts(), 2u);
}

TEST(InsertPlacement, OnLeafEdge) {
  const Ontology o = Build({"a", "b"}, {{"a", "b"}});
  const Ontology next = o.InsertPlacement(Atom("m"), {{"a", "NULL"}});
  EXPECT_TRUE(next.is_leaf("m"));
  EXPECT_EQ(next.parents("m"), (std::set<ConceptId>{"a"}));
}

TEST(InsertPlacement, BetweenTwoConcepts) {
  const std::string upper = "Psoriasis with arthropathy";
  const std::string lower =
      "Psoriatic arthritis with distal interphalangeal joint involvement";
  const Ontology o = Build({upper, lower}, {{upper, lower}});
  const Ontology next =
      o.InsertPlacement(Atom("Psoriatic arthritis"), {{upper, lower}});
  EXPECT_EQ(next.parents("Psoriatic arthritis").count(upper), 1u);
  EXPECT_EQ(next.children("Psoriatic arthritis").count(lower), 1u);
}

TEST(InsertPlacement, Errors) {
  const Ontology o = Build({"a", "b"}, {{"a", "b"}});
  EXPECT_THROW(o.InsertPlacement(Atom("a"), {{"a", "NULL"}}),
               InvalidArgumentError);
  EXPECT_THROW(o.InsertPlacement(Atom("m"), {{"zz", "NULL"}}), NotFoundError);
  EXPECT_THROW(o.InsertPlacement(Atom("m"), {{"a", "zz"}}), NotFoundError);
}

TEST(InsertPlacement, MonotoneOnRandomGraphs) {
  std::mt19937_64 rng(23);
  for (int g = 0; g < 40; ++g) {
    const auto graph = testing::MakeRandomGraph(rng, 80);
    const auto space = graph.ontology.EnumerateEdgeSpace();
    std::vector<Edge> placement;
    for (std::size_t i = 0; i < space.size() && placement.size() < 3; i += 7) {
      placement.push_back(space[i]);
    }
    const Ontology next = graph.ontology.InsertPlacement(Atom("new"), placement);
    for (const auto& [p, c] : graph.subsumptions) {
      EXPECT_EQ(next.children(p).count(c), 1u);
    }
    const PairSet after = ToPairs(next.EnumerateEdgeSpace());
    for (const auto& e : placement) {
      EXPECT_EQ(after.count({e.parent, "new"}), 1u);
      if (!e.is_leaf()) {
        EXPECT_EQ(after.count({"new", e.child}), 1u);
        EXPECT_EQ(after.count({e.parent, e.child}), 1u);
      }
    }
  }
}

TEST(Export, RoundTripsByteIdentically) {
  const Ontology o = Ontology::LoadDirectory(testing::ToyDir());
  const std::string dir = testing::MakeTempDir("ontology-export");
  o.ExportDirectory(dir);
  const Ontology again = Ontology::LoadDirectory(dir);
  const std::string dir2 = testing::MakeTempDir("ontology-export");
  again.ExportDirectory(dir2);
  EXPECT_EQ(testing::ReadText(dir + "/concepts.jsonl"),
            testing::ReadText(dir2 + "/concepts.jsonl"));
  EXPECT_EQ(testing::ReadText(dir + "/subsumptions.tsv"),
            testing::ReadText(dir2 + "/subsumptions.tsv"));
  EXPECT_EQ(again.concepts(), o.concepts());
  EXPECT_EQ(ToPairs(again.EnumerateEdgeSpace()), ToPairs(o.EnumerateEdgeSpace()));
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST(Export, SortedById) {
  const Ontology o = Build({"b", "a", "c"}, {{"b", "a"}, {"a", "c"}});
  std::ostringstream pairs;
  o.ExportSubsumptions(pairs);
  EXPECT_EQ(pairs.str(), "a\tc\nb\ta\n");
}

}  // namespace
}  // namespace ontoplace
