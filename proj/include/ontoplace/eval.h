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

// Placement datasets and insertion-rate metrics.
//
// For mention i with ranked predictions Z_i and gold edges Y_i:
//   InR_any = mean 1(Z_i ∩ Y_i != ∅),  InR_all = mean 1(Z_i ⊇ Y_i).
// The @k variants truncate Z_i to its first k entries first.

#ifndef ONTOPLACE_EVAL_H_
#define ONTOPLACE_EVAL_H_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ontoplace/candidates.h"
#include "ontoplace/mention.h"
#include "ontoplace/ontology.h"

namespace ontoplace {

enum class Split { kTrainInKb, kValidInKb, kValidOutKb, kTestOutKb };

std::string_view ToString(Split split);
Split SplitFromString(std::string_view name);

struct PlacementDataset {
  Split split = Split::kTestOutKb;
  std::vector<ContextualMention> mentions;
};

// Line-delimited mention records. Every record needs at least one gold edge
// whose endpoints resolve in `o`. Mentions without an id get their 0-based
// record number. Throws ParseError with the line number.
PlacementDataset LoadDataset(std::istream& in, const Ontology& o,
                             Split split = Split::kTestOutKb);
PlacementDataset LoadDatasetFile(const std::string& path, const Ontology& o,
                                 Split split = Split::kTestOutKb);

// Mention records without the gold requirement, for curation queues and
// unlabeled candidate runs. Same id defaulting and duplicate check.
std::vector<ContextualMention> LoadMentions(std::istream& in);
std::vector<ContextualMention> LoadMentionsFile(const std::string& path);

// Converts records of the published release layout (mention, contexts and
// "|"-separated parent/child id lists, or explicit edge lists) into the
// canonical dataset lines. See the README for the accepted fields.
void ConvertReleaseRecords(std::istream& in, std::ostream& out);

struct PredictionRecord {
  std::size_t mention_index = 0;
  std::vector<Edge> predicted;  // Z_i, ranked, duplicate-free
  std::vector<Edge> gold;       // Y_i
};

double InrAny(const std::vector<PredictionRecord>& records);
double InrAll(const std::vector<PredictionRecord>& records);

enum class MentionSubset { kAll, kLeaf, kNonLeaf };

std::string_view ToString(MentionSubset subset);

// A mention is leaf iff every gold edge has a NULL child.
bool IsLeafMention(const PredictionRecord& record);

struct InsertionRates {
  double any = 0.0;
  double all = 0.0;
  std::size_t mentions = 0;
};

// Filters mentions by subset, truncates predictions to k, then applies the
// two formulas. nullopt when the subset is empty.
std::optional<InsertionRates> InrAtK(const std::vector<PredictionRecord>& records,
                                     std::size_t k, MentionSubset subset);

struct EvaluationReport {
  std::string label;
  std::size_t candidate_k = 0;
  std::size_t total_mentions = 0;
  std::size_t failed_mentions = 0;
  // cutoff -> subset -> rates (absent when the subset is empty).
  std::map<std::size_t, std::map<MentionSubset, std::optional<InsertionRates>>>
      cells;

  static EvaluationReport Compute(const std::vector<PredictionRecord>& records,
                                  const std::vector<std::size_t>& cutoffs);

  // Percentages with one decimal; "-" for absent cells.
  std::string ToMarkdown() const;
  std::string ToTsv() const;
};

// "valid / test" cells, one decimal place.
std::string RenderSplitComparison(const EvaluationReport& valid,
                                  const EvaluationReport& test);

std::string FormatPercent(double fraction);

using SlateSelector = std::function<CandidateSlate(const CandidateSlate&)>;

struct BenchmarkConfig {
  std::size_t k = 10;
  std::vector<std::size_t> cutoffs = {1, 5, 10};
  std::size_t parallelism = 1;
  // Optional re-ranking applied to each slate.
  SlateSelector selector;
  std::string label;
};

struct BenchmarkResult {
  EvaluationReport report;
  std::vector<CandidateSlate> slates;
  std::vector<PredictionRecord> records;
  // mention index -> error message
  std::map<std::size_t, std::string> failures;
};

// Generates (and optionally selects) per mention; failures are scored as
// empty predictions. Throws InvalidArgumentError on an empty dataset.
BenchmarkResult RunBenchmark(const CandidateGenerator& generator,
                             const PlacementDataset& dataset,
                             const BenchmarkConfig& config);

// Same metrics over precomputed slates (slates carry their gold edges).
EvaluationReport EvaluateSlates(const std::vector<CandidateSlate>& slates,
                                const std::vector<std::size_t>& cutoffs,
                                std::size_t candidate_k);

}  // namespace ontoplace

#endif  // ONTOPLACE_EVAL_H_
