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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "ontoplace/error.h"

namespace ontoplace {
namespace {

constexpr std::string_view kIndexMagic = "ontoplace-lexical-index 1";

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::vector<std::string_view> SplitWhitespace(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !IsSpace(text[j])) ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

// Byte length of the UTF-8 sequence starting with `lead`.
std::size_t Utf8Length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

std::vector<std::string> SortedUnique(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

std::string ReadLine(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(0, std::string("truncated index: missing ") + what);
  }
  return line;
}

std::size_t ParseCount(const std::string& line, std::string_view key) {
  const std::string prefix = std::string(key) + "\t";
  if (line.rfind(prefix, 0) != 0) {
    throw ParseError(0, "index: expected '" + std::string(key) + "' header");
  }
  return std::stoull(line.substr(prefix.size()));
}

}  // namespace

std::string AsciiLower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Tokenizer Tokenizer::Whitespace() { return Tokenizer(); }

Tokenizer Tokenizer::GreedyLongestMatch(std::vector<std::string> vocabulary) {
  Tokenizer t;
  t.mode_ = Mode::kGreedyLongestMatch;
  for (auto& unit : vocabulary) {
    if (unit.empty()) continue;
    unit = AsciiLower(unit);
    if (t.units_.insert(unit).second) {
      t.longest_unit_ = std::max(t.longest_unit_, unit.size());
      t.vocabulary_.push_back(unit);
    }
  }
  if (t.vocabulary_.empty()) {
    throw InvalidArgumentError("empty tokenizer vocabulary");
  }
  return t;
}

Tokenizer Tokenizer::FromVocabularyFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open vocabulary " + path);
  std::vector<std::string> units;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // SentencePiece .vocab files carry a score column.
    if (auto tab = line.find('\t'); tab != std::string::npos) {
      line.resize(tab);
    }
    if (!line.empty()) units.push_back(line);
  }
  return GreedyLongestMatch(std::move(units));
}

void Tokenizer::TokenizeWord(std::string_view word,
                             std::vector<std::string>* out) const {
  std::size_t pos = 0;
  while (pos < word.size()) {
    std::size_t best = 0;
    std::string best_unit;
    const std::size_t max_len = std::min(longest_unit_, word.size() - pos);
    for (std::size_t len = max_len; len > 0 && best == 0; --len) {
      const std::string piece(word.substr(pos, len));
      if (pos == 0) {
        std::string marked = std::string(kWordBoundary) + piece;
        if (units_.count(marked) > 0) {
          best = len;
          best_unit = std::move(marked);
          break;
        }
      }
      if (units_.count(piece) > 0) {
        best = len;
        best_unit = piece;
      }
    }
    if (best == 0) {
      // Out-of-vocabulary character becomes its own unit.
      best = std::min(Utf8Length(static_cast<unsigned char>(word[pos])),
                      word.size() - pos);
      best_unit = std::string(word.substr(pos, best));
    }
    out->push_back(std::move(best_unit));
    pos += best;
  }
}

std::vector<std::string> Tokenizer::Tokenize(std::string_view text) const {
  const std::string lowered = AsciiLower(text);
  std::vector<std::string> tokens;
  for (std::string_view word : SplitWhitespace(lowered)) {
    if (mode_ == Mode::kWhitespace) {
      tokens.emplace_back(word);
    } else {
      TokenizeWord(word, &tokens);
    }
  }
  return tokens;
}

std::string Tokenizer::Detokenize(std::span<const std::string> tokens) const {
  std::string out;
  if (mode_ == Mode::kWhitespace) {
    for (const auto& t : tokens) {
      if (!out.empty()) out += ' ';
      out += t;
    }
    return out;
  }
  for (const auto& t : tokens) {
    if (t.rfind(kWordBoundary, 0) == 0) {
      if (!out.empty()) out += ' ';
      out += t.substr(kWordBoundary.size());
    } else {
      out += t;
    }
  }
  return out;
}

bool RankedConceptBefore(const RankedConcept& a, const RankedConcept& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

LexicalIndex LexicalIndex::Build(std::span<const Concept> concepts,
                                 Tokenizer tokenizer, double log_base) {
  if (concepts.empty()) {
    throw InvalidArgumentError("cannot index an empty concept list");
  }
  LexicalIndex index(std::move(tokenizer), log_base);
  for (const auto& c : concepts) {
    if (index.token_sets_.count(c.id) > 0) {
      throw InvalidArgumentError("duplicate concept id '" + c.id + "'");
    }
    index.Add(c.id, index.tokenizer_.Tokenize(Verbalize(c)));
  }
  return index;
}

LexicalIndex LexicalIndex::Build(const Ontology& ontology, Tokenizer tokenizer,
                                 double log_base) {
  std::vector<Concept> concepts;
  concepts.reserve(ontology.num_concepts());
  for (const auto& [id, c] : ontology.concepts()) concepts.push_back(c);
  return Build(concepts, std::move(tokenizer), log_base);
}

void LexicalIndex::Add(const ConceptId& id, std::vector<std::string> tokens) {
  tokens = SortedUnique(std::move(tokens));
  for (const auto& t : tokens) postings_[t].push_back(id);
  token_sets_.emplace(id, std::move(tokens));
}

const std::vector<ConceptId>& LexicalIndex::postings(
    const std::string& token) const {
  static const std::vector<ConceptId> kEmpty;
  auto it = postings_.find(token);
  return it == postings_.end() ? kEmpty : it->second;
}

const std::vector<std::string>& LexicalIndex::token_set(
    std::string_view id) const {
  auto it = token_sets_.find(id);
  if (it == token_sets_.end()) {
    throw NotFoundError("concept '" + std::string(id) + "' is not indexed");
  }
  return it->second;
}

double LexicalIndex::Log(double x) const {
  return log_base_ > 0.0 ? std::log(x) / std::log(log_base_) : std::log(x);
}

double LexicalIndex::Idf(const std::string& token) const {
  auto it = postings_.find(token);
  if (it == postings_.end()) return 0.0;
  return Log(static_cast<double>(corpus_size()) /
             static_cast<double>(it->second.size()));
}

std::vector<std::string> LexicalIndex::MentionTokens(
    std::string_view text) const {
  return SortedUnique(tokenizer_.Tokenize(text));
}

double LexicalIndex::Similarity(std::string_view mention_text,
                                std::string_view id) const {
  const auto& concept_tokens = token_set(id);
  const auto mention_tokens = MentionTokens(mention_text);
  std::vector<std::string> shared;
  std::set_intersection(concept_tokens.begin(), concept_tokens.end(),
                        mention_tokens.begin(), mention_tokens.end(),
                        std::back_inserter(shared));
  double score = 0.0;
  for (const auto& t : shared) score += Idf(t);
  return score;
}

std::vector<RankedConcept> LexicalIndex::Search(std::string_view mention_text,
                                                std::size_t top_n) const {
  if (top_n == 0) throw InvalidArgumentError("top_n must be positive");
  std::unordered_map<std::string_view, double> scores;
  for (const auto& t : MentionTokens(mention_text)) {
    auto it = postings_.find(t);
    if (it == postings_.end()) continue;
    const double idf = Idf(t);
    for (const auto& id : it->second) scores[id] += idf;
  }
  std::vector<RankedConcept> ranked;
  for (const auto& [id, score] : scores) {
    if (score > 0.0) ranked.push_back({std::string(id), score});
  }
  std::sort(ranked.begin(), ranked.end(), RankedConceptBefore);
  if (ranked.size() > top_n) ranked.resize(top_n);
  return ranked;
}

void LexicalIndex::Save(std::ostream& out) const {
  out << kIndexMagic << '\n';
  out << "mode\t"
      << (tokenizer_.mode() == Tokenizer::Mode::kWhitespace ? "whitespace"
                                                            : "greedy")
      << '\n';
  std::ostringstream base;
  base.precision(17);
  base << log_base_;
  out << "log_base\t" << base.str() << '\n';
  out << "vocab\t" << tokenizer_.vocabulary().size() << '\n';
  for (const auto& unit : tokenizer_.vocabulary()) out << unit << '\n';
  out << "concepts\t" << token_sets_.size() << '\n';
  for (const auto& [id, tokens] : token_sets_) {
    out << id;
    for (const auto& t : tokens) out << '\t' << t;
    out << '\n';
  }
}

LexicalIndex LexicalIndex::Load(std::istream& in) {
  if (ReadLine(in, "header") != kIndexMagic) {
    throw ParseError(1, "not an ontoplace lexical index");
  }
  const std::string mode = ReadLine(in, "mode");
  const std::string base_line = ReadLine(in, "log_base");
  if (base_line.rfind("log_base\t", 0) != 0) {
    throw ParseError(3, "index: expected 'log_base' header");
  }
  const double log_base = std::stod(base_line.substr(9));
  const std::size_t vocab_size = ParseCount(ReadLine(in, "vocab"), "vocab");
  std::vector<std::string> vocab;
  vocab.reserve(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    vocab.push_back(ReadLine(in, "vocabulary unit"));
  }
  Tokenizer tokenizer = mode == "mode\twhitespace"
                            ? Tokenizer::Whitespace()
                            : Tokenizer::GreedyLongestMatch(std::move(vocab));
  LexicalIndex index(std::move(tokenizer), log_base);
  const std::size_t n = ParseCount(ReadLine(in, "concepts"), "concepts");
  for (std::size_t i = 0; i < n; ++i) {
    std::istringstream row(ReadLine(in, "concept row"));
    std::string id;
    std::getline(row, id, '\t');
    std::vector<std::string> tokens;
    std::string t;
    while (std::getline(row, t, '\t')) tokens.push_back(t);
    index.Add(id, std::move(tokens));
  }
  return index;
}

void LexicalIndex::SaveFile(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgumentError("cannot write " + path);
  Save(out);
}

LexicalIndex LexicalIndex::LoadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open index " + path);
  return Load(in);
}

}  // namespace ontoplace
