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

#include "ontoplace/lexical_index.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ontoplace/error.h"

namespace ontoplace {
namespace {

Concept Labeled(const std::string& id, const std::string& label) {
  return {id, label, false, std::nullopt, std::nullopt};
}

std::set<std::string> WordSet(const std::string& text) {
  std::set<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) {
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    out.insert(w);
  }
  return out;
}

// From-scratch evaluation: document frequencies recounted over the raw
// labels for every query.
double ScratchSimilarity(const std::vector<Concept>& corpus,
                         const std::string& mention, const std::string& id) {
  const auto m = WordSet(mention);
  std::set<std::string> c;
  for (const auto& k : corpus) {
    if (k.id == id) c = WordSet(k.label);
  }
  double total = 0.0;
  for (const auto& t : c) {
    if (m.count(t) == 0) continue;
    double df = 0;
    for (const auto& k : corpus) df += WordSet(k.label).count(t);
    total += std::log(static_cast<double>(corpus.size()) / df);
  }
  return total;
}

TEST(Tokenizer, WhitespaceLowercasesAndRoundTrips) {
  const Tokenizer t = Tokenizer::Whitespace();
  const auto tokens = t.Tokenize("  Chronic   Kidney\tDisease ");
  EXPECT_EQ(tokens, (std::vector<std::string>{"chronic", "kidney", "disease"}));
  EXPECT_EQ(t.Detokenize(tokens), "chronic kidney disease");
  EXPECT_EQ(t.Tokenize("Chronic Kidney Disease"), tokens);
}

TEST(Tokenizer, GreedyLongestMatch) {
  const std::string b(kWordBoundary);
  const Tokenizer t = Tokenizer::GreedyLongestMatch(
      {b + "hyper", b + "hypo", "thyroid", "thy", "ism", b + "renal"});
  const auto tokens = t.Tokenize("Hyperthyroidism renal");
  EXPECT_EQ(tokens, (std::vector<std::string>{b + "hyper", "thyroid", "ism",
                                              b + "renal"}));
  EXPECT_EQ(t.Detokenize(tokens), "hyperthyroidism renal");
  // Unknown characters fall back to single units, deterministically.
  EXPECT_EQ(t.Tokenize("xyz"), t.Tokenize("xyz"));
  EXPECT_EQ(t.Tokenize("xyz").size(), 3u);
}

TEST(LexicalIndex, SingleConceptPostings) {
  const std::vector<Concept> corpus = {Labeled("c", "heart disease")};
  const auto index = LexicalIndex::Build(corpus, Tokenizer::Whitespace());
  EXPECT_EQ(index.corpus_size(), 1u);
  EXPECT_EQ(index.postings("heart"), (std::vector<ConceptId>{"c"}));
  EXPECT_EQ(index.postings("disease"), (std::vector<ConceptId>{"c"}));
  EXPECT_TRUE(index.postings("lung").empty());
}

TEST(LexicalIndex, SharedTokenPostings) {
  const std::vector<Concept> corpus = {Labeled("a", "heart disease"),
                                       Labeled("b", "lung disease")};
  const auto index = LexicalIndex::Build(corpus, Tokenizer::Whitespace());
  EXPECT_EQ(index.postings("disease").size(), 2u);
}

TEST(LexicalIndex, EmptyCorpusRejected) {
  EXPECT_THROW(LexicalIndex::Build(std::vector<Concept>{}, Tokenizer::Whitespace()),
               InvalidArgumentError);
}

TEST(IdfSimilarity, WorkedValues) {
  const std::vector<Concept> corpus = {Labeled("a", "heart disease"),
                                       Labeled("b", "lung disease")};
  const auto index = LexicalIndex::Build(corpus, Tokenizer::Whitespace());
  // Shared by both: ln(2/2) = 0.
  EXPECT_DOUBLE_EQ(index.Similarity("disease", "a"), 0.0);
  // Unique to a: ln 2.
  EXPECT_NEAR(index.Similarity("heart", "a"), 0.6931, 1e-4);
  EXPECT_DOUBLE_EQ(index.Similarity("heart", "a"), std::log(2.0));
  EXPECT_DOUBLE_EQ(index.Similarity("kidney", "a"), 0.0);
  // Set semantics: a repeated mention token counts once.
  EXPECT_DOUBLE_EQ(index.Similarity("heart heart", "a"), std::log(2.0));
  EXPECT_THROW(index.Similarity("heart", "zz"), NotFoundError);
}

TEST(IdfSimilarity, ExplicitLogBase) {
  const std::vector<Concept> corpus = {Labeled("a", "heart disease"),
                                       Labeled("b", "lung disease")};
  const auto index = LexicalIndex::Build(corpus, Tokenizer::Whitespace(), 2.0);
  EXPECT_DOUBLE_EQ(index.Similarity("heart", "a"), 1.0);
}

TEST(IdfSimilarity, MatchesScratchFormulaOnLargeCorpora) {
  std::mt19937_64 rng(3);
  std::vector<std::string> vocab;
  for (int i = 0; i < 300; ++i) vocab.push_back("w" + std::to_string(i));
  // Zipf-ish draws so some tokens are common and some unique.
  std::vector<double> weights;
  for (int i = 0; i < 300; ++i) weights.push_back(1.0 / (i + 1));
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::uniform_int_distribution<int> len(1, 6);

  for (int trial = 0; trial < 2; ++trial) {
    std::vector<Concept> corpus;
    for (int i = 0; i < 1000; ++i) {
      std::string label;
      for (int j = len(rng); j > 0; --j) label += vocab[pick(rng)] + " ";
      corpus.push_back(Labeled("c" + std::to_string(i), label));
    }
    const auto index = LexicalIndex::Build(corpus, Tokenizer::Whitespace());
    for (int q = 0; q < 20; ++q) {
      std::string mention;
      for (int j = len(rng); j > 0; --j) mention += vocab[pick(rng)] + " ";
      for (int i = 0; i < 1000; i += 37) {
        const std::string id = "c" + std::to_string(i);
        EXPECT_NEAR(index.Similarity(mention, id),
                    ScratchSimilarity(corpus, mention, id), 1e-12);
      }
    }
  }
}

TEST(LexicalSearch, ExactLabelRanksFirst) {
  const std::vector<Concept> corpus = {
      Labeled("a", "heart disease"), Labeled("b", "lung disease"),
      Labeled("c", "chronic heart failure"), Labeled("d", "disease")};
  const auto index = LexicalIndex::Build(corpus, Tokenizer::Whitespace());
  const auto ranked = index.Search("chronic heart failure", 10);
  ASSERT_FALSE(ranked.empty());
  EXPECT_EQ(ranked.front().id, "c");
}

TEST(LexicalSearch, ZeroIdfTokenGivesEmptyResult) {
  const std::vector<Concept> corpus = {Labeled("a", "the heart"),
                                       Labeled("b", "the lung")};
  const auto index = LexicalIndex::Build(corpus, Tokenizer::Whitespace());
  EXPECT_TRUE(index.Search("the", 5).empty());
  EXPECT_TRUE(index.Search("unrelated words", 5).empty());
}

TEST(LexicalSearch, MatchesExhaustiveRanking) {
  const std::vector<Concept> corpus = {
      Labeled("e", "kidney disease"), Labeled("a", "chronic kidney disease"),
      Labeled("c", "kidney failure"), Labeled("b", "chronic lung disease"),
      Labeled("d", "acute kidney failure")};
  const auto index = LexicalIndex::Build(corpus, Tokenizer::Whitespace());
  for (const std::string mention :
       {"chronic kidney failure", "kidney", "acute disease", "lung"}) {
    std::vector<RankedConcept> expected;
    for (const auto& c : corpus) {
      const double s = ScratchSimilarity(corpus, mention, c.id);
      if (s > 0) expected.push_back({c.id, s});
    }
    std::sort(expected.begin(), expected.end(), RankedConceptBefore);
    const auto got = index.Search(mention, 5);
    ASSERT_EQ(got.size(), expected.size()) << mention;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].id, expected[i].id) << mention;
      EXPECT_NEAR(got[i].score, expected[i].score, 1e-12);
    }
    const auto top2 = index.Search(mention, 2);
    EXPECT_LE(top2.size(), 2u);
  }
}

TEST(LexicalSearch, TiesBreakById) {
  const std::vector<Concept> corpus = {Labeled("z", "heart x"),
                                       Labeled("a", "heart y"),
                                       Labeled("m", "lung")};
  const auto index = LexicalIndex::Build(corpus, Tokenizer::Whitespace());
  const auto ranked = index.Search("heart", 5);
  ASSERT_EQ(ranked.size(), 2u);
  EXPECT_EQ(ranked[0].id, "a");
  EXPECT_EQ(ranked[1].id, "z");
}

TEST(LexicalIndex, InvertedIndexInvariants) {
  const std::vector<Concept> corpus = {
      Labeled("a", "chronic kidney disease"), Labeled("b", "kidney kidney"),
      Labeled("c", "Heart")};
  const auto index = LexicalIndex::Build(corpus, Tokenizer::Whitespace());
  std::set<ConceptId> reachable;
  for (const auto& [token, ids] : index.all_postings()) {
    for (const auto& id : ids) {
      reachable.insert(id);
      const auto& ts = index.token_set(id);
      EXPECT_TRUE(std::find(ts.begin(), ts.end(), token) != ts.end());
    }
  }
  EXPECT_EQ(reachable.size(), corpus.size());
  for (const auto& c : corpus) {
    for (const auto& t : index.token_set(c.id)) {
      const auto& p = index.postings(t);
      EXPECT_TRUE(std::find(p.begin(), p.end(), c.id) != p.end());
    }
  }
}

TEST(LexicalIndex, SaveLoadRoundTrip) {
  const std::vector<Concept> corpus = {Labeled("a", "chronic kidney disease"),
                                       Labeled("b", "heart disease")};
  const auto index = LexicalIndex::Build(corpus, Tokenizer::Whitespace());
  std::stringstream buffer;
  index.Save(buffer);
  const auto loaded = LexicalIndex::Load(buffer);
  EXPECT_EQ(loaded.corpus_size(), 2u);
  EXPECT_EQ(loaded.all_postings(), index.all_postings());
  EXPECT_DOUBLE_EQ(loaded.Similarity("chronic heart", "a"),
                   index.Similarity("chronic heart", "a"));
}

}  // namespace
}  // namespace ontoplace
