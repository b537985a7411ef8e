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

#include "ontoplace/embedding.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>

#include "ontoplace/error.h"

namespace ontoplace {
namespace {

std::vector<std::string> Words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  auto space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !space(text[j])) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

void Append(std::string* out, std::string_view piece) {
  if (piece.empty()) return;
  if (!out->empty()) *out += ' ';
  *out += piece;
}

void AppendAll(std::string* out, std::span<const std::string> words) {
  for (const auto& w : words) Append(out, w);
}

void CheckSameDim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw InvalidArgumentError("dimension mismatch: " +
                               std::to_string(u.size()) + " vs " +
                               std::to_string(v.size()));
  }
}

}  // namespace

std::string SerializeMention(const ContextualMention& m,
                             std::size_t max_context_units,
                             bool with_context) {
  const auto mention = Words(m.mention);
  std::vector<std::string> left;
  std::vector<std::string> right;
  if (with_context) {
    left = Words(m.context_left);
    right = Words(m.context_right);
  }
  constexpr std::size_t kMarkers = 4;
  const std::size_t fixed = kMarkers + mention.size();
  const std::size_t avail =
      max_context_units > fixed ? max_context_units - fixed : 0;

  // Split the spare budget evenly; a short side donates its remainder.
  std::size_t take_left = std::min(left.size(), avail / 2);
  std::size_t take_right = std::min(right.size(), avail - take_left);
  take_left = std::min(left.size(), avail - take_right);

  std::string out(kClsToken);
  AppendAll(&out, std::span(left).last(take_left));
  Append(&out, kMentionStart);
  AppendAll(&out, mention);
  Append(&out, kMentionEnd);
  AppendAll(&out, std::span(right).first(take_right));
  Append(&out, kSepToken);
  return out;
}

std::string SerializeEdge(const Ontology& o, const Edge& e,
                          std::size_t max_concept_units) {
  auto parent = Words(o.text_of(e.parent));
  auto child = e.is_leaf() ? std::vector<std::string>{std::string(kNullToken)}
                           : Words(o.text_of(e.child));
  constexpr std::size_t kMarkers = 4;
  const std::size_t avail =
      max_concept_units > kMarkers ? max_concept_units - kMarkers : 0;
  while (parent.size() + child.size() > avail) {
    if (child.size() > parent.size()) {
      child.pop_back();
    } else {
      parent.pop_back();
    }
  }
  std::string out(kClsToken);
  AppendAll(&out, parent);
  Append(&out, kParentTag);
  AppendAll(&out, child);
  Append(&out, kChildTag);
  Append(&out, kSepToken);
  return out;
}

double Dot(std::span<const double> u, std::span<const double> v) {
  CheckSameDim(u, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += u[i] * v[i];
  return sum;
}

double Cosine(std::span<const double> u, std::span<const double> v) {
  CheckSameDim(u, v);
  const double nu = std::sqrt(Dot(u, u));
  const double nv = std::sqrt(Dot(v, v));
  if (nu == 0.0 || nv == 0.0) {
    throw InvalidArgumentError("cosine of a zero-norm vector");
  }
  // Rounding can push |cos| a hair past 1.
  return std::clamp(Dot(u, v) / (nu * nv), -1.0, 1.0);
}

double TripletLoss(std::span<const double> mention,
                   std::span<const double> gold,
                   std::span<const EmbeddingVector> negatives,
                   const TripletLossConfig& config) {
  if (!std::isfinite(config.margin) || config.margin < 0.0) {
    throw InvalidArgumentError("triplet margin must be finite and >= 0");
  }
  const double gold_score = Dot(mention, gold);
  double loss = 0.0;
  for (const auto& negative : negatives) {
    loss += std::max(0.0, config.margin - gold_score + Dot(mention, negative));
  }
  return loss;
}

EmbeddingStore::EmbeddingStore(const EmbeddingStore& other) {
  std::shared_lock lock(other.mutex_);
  dim_ = other.dim_;
  entries_ = other.entries_;
}

EmbeddingStore& EmbeddingStore::operator=(const EmbeddingStore& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_);
  std::shared_lock other_lock(other.mutex_);
  dim_ = other.dim_;
  entries_ = other.entries_;
  return *this;
}

std::size_t EmbeddingStore::dim() const {
  std::shared_lock lock(mutex_);
  return dim_;
}

std::size_t EmbeddingStore::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void EmbeddingStore::Put(const std::string& key, EmbeddingVector vector) {
  if (vector.empty()) throw InvalidArgumentError("empty embedding for key");
  for (double x : vector) {
    if (!std::isfinite(x)) {
      throw InvalidArgumentError("non-finite embedding value");
    }
  }
  std::scoped_lock lock(mutex_);
  if (dim_ == 0) dim_ = vector.size();
  if (vector.size() != dim_) {
    throw InvalidArgumentError("embedding dimension " +
                               std::to_string(vector.size()) +
                               " does not match store dimension " +
                               std::to_string(dim_));
  }
  entries_.insert_or_assign(key, std::move(vector));
}

std::optional<EmbeddingVector> EmbeddingStore::Find(
    std::string_view key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool EmbeddingStore::Contains(std::string_view key) const {
  std::shared_lock lock(mutex_);
  return entries_.find(key) != entries_.end();
}

EmbeddingVector EmbeddingStore::Get(std::string_view key) const {
  auto v = Find(key);
  if (!v) throw NotFoundError("no embedding for '" + std::string(key) + "'");
  return *std::move(v);
}

void EmbeddingStore::Save(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  std::vector<const std::pair<const std::string, EmbeddingVector>*> rows;
  rows.reserve(entries_.size());
  for (const auto& row : entries_) rows.push_back(&row);
  std::sort(rows.begin(), rows.end(),
            [](auto* a, auto* b) { return a->first < b->first; });
  out << "dim=" << dim_ << '\n';
  char buf[64];
  for (const auto* row : rows) {
    out << row->first << '\t';
    for (std::size_t i = 0; i < row->second.size(); ++i) {
      if (i > 0) out << ',';
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), row->second[i]);
      out.write(buf, end - buf);
    }
    out << '\n';
  }
}

EmbeddingStore EmbeddingStore::Load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("dim=", 0) != 0) {
    throw ParseError(1, "embedding store must start with 'dim=<d>'");
  }
  const std::size_t dim = std::stoull(line.substr(4));
  EmbeddingStore store(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "missing TAB");
    EmbeddingVector v;
    std::string_view values(line);
    values.remove_prefix(tab + 1);
    while (!values.empty()) {
      const auto comma = values.find(',');
      const std::string_view cell = values.substr(0, comma);
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError(line_no, "bad number '" + std::string(cell) + "'");
      }
      v.push_back(x);
      if (comma == std::string_view::npos) break;
      values.remove_prefix(comma + 1);
    }
    if (v.size() != dim) {
      throw ParseError(line_no, "expected " + std::to_string(dim) +
                                    " values, got " + std::to_string(v.size()));
    }
    store.Put(line.substr(0, tab), std::move(v));
  }
  return store;
}

void EmbeddingStore::SaveFile(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgumentError("cannot write " + path);
  Save(out);
}

EmbeddingStore EmbeddingStore::LoadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open embedding store " + path);
  return Load(in);
}

std::vector<RankedConcept> SearchConceptsByEmbedding(
    const EmbeddingStore& store, std::string_view mention_key,
    std::span<const std::pair<ConceptId, std::string>> concept_keys,
    std::size_t top_n) {
  if (top_n == 0) throw InvalidArgumentError("top_n must be positive");
  const EmbeddingVector mention = store.Get(mention_key);
  std::vector<RankedConcept> ranked;
  ranked.reserve(concept_keys.size());
  for (const auto& [id, key] : concept_keys) {
    ranked.push_back({id, Cosine(mention, store.Get(key))});
  }
  const std::size_t n = std::min(top_n, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + n, ranked.end(),
                    RankedConceptBefore);
  ranked.resize(n);
  return ranked;
}

std::vector<RankedEdge> SearchEdgesByEmbedding(
    const EmbeddingStore& store, std::string_view mention_key,
    std::span<const std::pair<Edge, std::string>> edge_keys,
    std::size_t top_n) {
  if (top_n == 0) throw InvalidArgumentError("top_n must be positive");
  const EmbeddingVector mention = store.Get(mention_key);
  std::vector<RankedEdge> ranked;
  ranked.reserve(edge_keys.size());
  for (const auto& [edge, key] : edge_keys) {
    ranked.push_back({edge, Dot(mention, store.Get(key))});
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

}  // namespace ontoplace
