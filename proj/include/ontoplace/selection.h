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

// Edge selection over a candidate slate: cross-encoder style per-row
// scoring, zero-shot LLM prompting, and the explanation-augmented
// instruction format together with its response parsers.
//
// Option numbers are slate positions everywhere: cross rows, prompt
// options, explanations and parsed answers all index `slate.edges`.

#ifndef ONTOPLACE_SELECTION_H_
#define ONTOPLACE_SELECTION_H_

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ontoplace/candidates.h"
#include "ontoplace/lexical_index.h"
#include "ontoplace/mention.h"
#include "ontoplace/ontology.h"

namespace ontoplace {

struct CrossInputRow {
  std::string text;
  std::size_t candidate_index = 0;
};

// "[CLS] ctxt_l [M_s] mention [M_e] ctxt_r [SEP] parent [P-TAG] child
// [C-TAG] [SEP]" per slate entry, leaf children as [NULL].
std::vector<CrossInputRow> BuildCrossRows(const Ontology& o,
                                          const CandidateSlate& slate,
                                          const SerializationOptions& options = {});

// -sum(y ln sigmoid(s) + (1 - y) ln(1 - sigmoid(s))), in softplus form so
// it stays finite for large |s|.
double BceMultilabelLoss(std::span<const double> scores,
                         std::span<const int> labels);

// Hosts a model that scores each cross row independently.
class RowScorer {
 public:
  virtual ~RowScorer() = default;
  virtual std::vector<double> Score(const std::vector<std::string>& rows) = 0;
};

struct SelectionScorerEndpoint {
  std::string locator;
  std::string model;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
};

// Wire contract: {"model", "rows":[..]} -> {"scores":[..]}.
class HttpRowScorer : public RowScorer {
 public:
  explicit HttpRowScorer(SelectionScorerEndpoint endpoint);
  std::vector<double> Score(const std::vector<std::string>& rows) override;

 private:
  SelectionScorerEndpoint endpoint_;
};

// Re-ranks the slate by the returned row scores (ties as in the candidate
// ranking). Throws ProtocolError when the count does not match.
CandidateSlate SelectScored(RowScorer& scorer, const CandidateSlate& slate,
                            const std::vector<CrossInputRow>& rows);

inline constexpr std::string_view kInputHeader = "### Input:";
inline constexpr std::string_view kExplanationHeader = "### Explanation:";
inline constexpr std::string_view kResponseHeader = "### Response:";
inline constexpr std::string_view kArrow = "\xE2\x86\x92";  // U+2192

// Task description opening every prompt.
extern const std::string_view kPlacementInstruction;

struct PromptBundle {
  std::string input_section;
  std::vector<std::string> options;
  std::optional<std::vector<std::size_t>> gold_option_indices;
  std::optional<std::string> explanation;
  std::optional<std::string> response;

  // Input section followed by the response header, ready for completion.
  std::string PromptText() const;
};

// "<context_left> *<mention>* <context_right>" with empty parts dropped; a
// right context opening with punctuation attaches without a space.
std::string MarkMentionInContext(const ContextualMention& m);

// "i.<parent text> → <child text or NULL>"
std::string FormatOption(const Ontology& o, const Edge& e, std::size_t index);

PromptBundle BuildZeroShotPrompt(const Ontology& o, const CandidateSlate& slate);

// Counts prompt tokens with `tokenizer` and checks them against
// max_input_tokens minus a 5% margin. Throws InvalidArgumentError.
std::size_t CheckPromptBudget(const std::string& prompt,
                              const Tokenizer& tokenizer,
                              std::size_t max_input_tokens);

struct ParsedOptions {
  // Distinct in-range indices in order of first mention.
  std::vector<std::size_t> indices;
  std::size_t out_of_range = 0;
  bool answered_none = false;
  bool parse_failed = false;
};

// Reads comma-separated option numbers from the first non-empty line.
// "None" (any case) yields an empty answer; no number at all is a failure.
ParsedOptions ParseOptionResponse(std::string_view text, std::size_t k);

// Prefers the "### Response:" section, then the "the final answers are"
// clause of an explanation.
ParsedOptions ParseExplainedResponse(std::string_view text, std::size_t k);

// Five-step reasoning trace over candidate parents and children ending in
// "Thus, the final answers are <options>." Lists are comma separated, parents
// and children deduplicated in slate order, option numbers ascending.
std::string BuildExplanation(const Ontology& o, const CandidateSlate& slate,
                             const std::vector<Edge>& gold);

// Ascending slate positions holding a gold edge.
std::vector<std::size_t> GoldOptionIndices(const CandidateSlate& slate,
                                           const std::vector<Edge>& gold);

class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string Complete(const std::string& prompt) = 0;
};

struct LlmEndpoint {
  std::string locator;
  std::string model;
  std::size_t max_input_tokens = 4096;
  std::size_t max_new_tokens = 512;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{120000};
  int retries = 2;
};

// Wire contract: {"model","prompt","max_new_tokens","temperature"} ->
// {"text"}.
class HttpCompletionClient : public CompletionClient {
 public:
  explicit HttpCompletionClient(LlmEndpoint endpoint);
  std::string Complete(const std::string& prompt) override;

 private:
  LlmEndpoint endpoint_;
};

struct LlmSelection {
  CandidateSlate slate;
  ParsedOptions parsed;
  std::string raw_response;
};

enum class ResponseFormat { kOptionsOnly, kExplained };

// Selected options lead in generation order; the rest keep their prior
// order. "None" and parse failures leave the slate as it was.
LlmSelection SelectWithLlm(CompletionClient& client, const Ontology& o,
                           const CandidateSlate& slate,
                           const Tokenizer& budget_tokenizer,
                           std::size_t max_input_tokens,
                           ResponseFormat format = ResponseFormat::kOptionsOnly);

// Reorders `slate` so that `selected` come first; used by SelectWithLlm.
CandidateSlate PromoteOptions(const CandidateSlate& slate,
                              std::span<const std::size_t> selected);

// Training record: input section, "### Explanation:" with the synthesized
// trace, and "### Response:" with the gold option numbers.
struct TuningRecord {
  std::string mention_id;
  std::string input;
  std::string explanation;
  std::string response;

  std::string Text() const;
  nlohmann::json ToJson() const;
};

TuningRecord BuildTuningRecord(const Ontology& o, const CandidateSlate& slate);

// One record per slate; slates must carry gold edges.
std::vector<TuningRecord> EmitInstructionTuningCorpus(
    const Ontology& o, const std::vector<CandidateSlate>& slates);

}  // namespace ontoplace

#endif  // ONTOPLACE_SELECTION_H_
