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

// Sub-token inverted index over concept verbalizations with
// inverse-document-frequency overlap scoring.

#ifndef ONTOPLACE_LEXICAL_INDEX_H_
#define ONTOPLACE_LEXICAL_INDEX_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ontoplace/ontology.h"

namespace ontoplace {

// Word-boundary marker used by SentencePiece-style vocabularies.
inline constexpr std::string_view kWordBoundary = "\xE2\x96\x81";  // U+2581

class Tokenizer {
 public:
  enum class Mode { kGreedyLongestMatch, kWhitespace };

  // Lowercased whitespace split.
  static Tokenizer Whitespace();
  // Greedy longest match over `vocabulary`. Units may carry a leading
  // U+2581 marker, which then only matches at the start of a word.
  static Tokenizer GreedyLongestMatch(std::vector<std::string> vocabulary);
  // One unit per line.
  static Tokenizer FromVocabularyFile(const std::string& path);

  Mode mode() const { return mode_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

  std::vector<std::string> Tokenize(std::string_view text) const;
  // Inverse of Tokenize for whitespace mode (modulo case and spacing).
  std::string Detokenize(std::span<const std::string> tokens) const;

 private:
  void TokenizeWord(std::string_view word, std::vector<std::string>* out) const;

  Mode mode_ = Mode::kWhitespace;
  std::vector<std::string> vocabulary_;
  std::unordered_set<std::string> units_;
  std::size_t longest_unit_ = 0;
};

std::string AsciiLower(std::string_view text);

struct RankedConcept {
  ConceptId id;
  double score = 0.0;

  bool operator==(const RankedConcept&) const = default;
};

// Orders by score descending, then id ascending.
bool RankedConceptBefore(const RankedConcept& a, const RankedConcept& b);

class LexicalIndex {
 public:
  // Natural log unless configured otherwise.
  static LexicalIndex Build(std::span<const Concept> concepts,
                            Tokenizer tokenizer, double log_base = 0.0);
  static LexicalIndex Build(const Ontology& ontology, Tokenizer tokenizer,
                            double log_base = 0.0);

  std::size_t corpus_size() const { return token_sets_.size(); }
  const Tokenizer& tokenizer() const { return tokenizer_; }
  double log_base() const { return log_base_; }

  // Concepts containing `token`; empty when the token is not indexed.
  const std::vector<ConceptId>& postings(const std::string& token) const;
  const std::map<std::string, std::vector<ConceptId>>& all_postings() const {
    return postings_;
  }
  // Sorted, duplicate-free token set of an indexed concept.
  const std::vector<std::string>& token_set(std::string_view id) const;

  // Weight of a token: log(|D| / |I[t]|); 0 for unknown tokens.
  double Idf(const std::string& token) const;

  // Sum of token weights over T(concept) ∩ T(mention), set semantics.
  double Similarity(std::string_view mention_text, std::string_view id) const;

  // Concepts with positive similarity, best first, at most `top_n`.
  std::vector<RankedConcept> Search(std::string_view mention_text,
                                    std::size_t top_n) const;

  void Save(std::ostream& out) const;
  static LexicalIndex Load(std::istream& in);
  void SaveFile(const std::string& path) const;
  static LexicalIndex LoadFile(const std::string& path);

 private:
  LexicalIndex(Tokenizer tokenizer, double log_base)
      : tokenizer_(std::move(tokenizer)), log_base_(log_base) {}
  void Add(const ConceptId& id, std::vector<std::string> tokens);
  std::vector<std::string> MentionTokens(std::string_view text) const;
  double Log(double x) const;

  Tokenizer tokenizer_;
  double log_base_ = 0.0;  // 0 selects the natural log.
  std::map<std::string, std::vector<ConceptId>> postings_;
  std::map<ConceptId, std::vector<std::string>, std::less<>> token_sets_;
};

}  // namespace ontoplace

#endif  // ONTOPLACE_LEXICAL_INDEX_H_
