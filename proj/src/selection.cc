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

#include "ontoplace/selection.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

#include "internal/http_json.h"
#include "ontoplace/embedding.h"
#include "ontoplace/error.h"

namespace ontoplace {
namespace {

std::string JoinComma(const std::vector<std::string>& items) {
  if (items.empty()) return "None";
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += item;
  }
  return out;
}

std::string JoinIndices(const std::vector<std::size_t>& indices,
                        std::string_view separator) {
  if (indices.empty()) return "None";
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i > 0) out += separator;
    out += std::to_string(indices[i]);
  }
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view FirstNonEmptyLine(std::string_view text) {
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = Trim(text.substr(0, nl));
    if (!line.empty()) return line;
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return {};
}

// Parses one answer fragment ("2,8", "None", "3, 7, 5.").
ParsedOptions ParseAnswer(std::string_view answer, std::size_t k) {
  ParsedOptions parsed;
  answer = Trim(answer);
  if (answer.empty()) {
    parsed.parse_failed = true;
    return parsed;
  }
  if (Lower(answer).rfind("none", 0) == 0) {
    parsed.answered_none = true;
    return parsed;
  }
  std::set<std::size_t> seen;
  bool any_number = false;
  std::size_t i = 0;
  while (i < answer.size()) {
    if (!std::isdigit(static_cast<unsigned char>(answer[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < answer.size() &&
           std::isdigit(static_cast<unsigned char>(answer[j]))) {
      ++j;
    }
    any_number = true;
    const std::string digits(answer.substr(i, j - i));
    // Absurdly long digit runs are out of range by definition.
    const std::size_t value =
        digits.size() > 9 ? k : static_cast<std::size_t>(std::stoul(digits));
    if (value >= k) {
      ++parsed.out_of_range;
    } else if (seen.insert(value).second) {
      parsed.indices.push_back(value);
    }
    i = j;
  }
  parsed.parse_failed = !any_number;
  return parsed;
}

std::optional<std::string_view> AfterHeader(std::string_view text,
                                            std::string_view header) {
  const auto at = text.find(header);
  if (at == std::string_view::npos) return std::nullopt;
  return text.substr(at + header.size());
}

void CheckSlate(const CandidateSlate& slate) {
  if (slate.edges.empty()) throw InvalidArgumentError("empty candidate slate");
}

}  // namespace

const std::string_view kPlacementInstruction =
    "Can you identify the correct ontological edges for the given mention "
    "(marked with *) based on the context? The ontological edge consists of a "
    "pair where the left concept represents the parent of the mention, and "
    "the right concept represents the child of the mention. If the mention is "
    "a leaf node, the right side of the edges will be NULL. If the context is "
    "not relevant to the options, make your decision solely based on the "
    "mention itself. There may be multiple correct options. Please answer "
    "briefly using option numbers, separated by commas. If none of the "
    "options is correct, please answer None.";

std::vector<CrossInputRow> BuildCrossRows(const Ontology& o,
                                          const CandidateSlate& slate,
                                          const SerializationOptions& options) {
  CheckSlate(slate);
  const std::string mention = SerializeMention(
      slate.mention, options.max_context_units, options.with_context);
  std::vector<CrossInputRow> rows;
  rows.reserve(slate.edges.size());
  for (std::size_t i = 0; i < slate.edges.size(); ++i) {
    std::string edge =
        SerializeEdge(o, slate.edges[i].edge, options.max_concept_units);
    // Drop the edge's own [CLS]; the pair shares the mention's.
    edge.erase(0, kClsToken.size() + 1);
    rows.push_back({mention + " " + edge, i});
  }
  return rows;
}

double BceMultilabelLoss(std::span<const double> scores,
                         std::span<const int> labels) {
  if (scores.empty()) throw InvalidArgumentError("empty score list");
  if (scores.size() != labels.size()) {
    throw InvalidArgumentError("scores and labels differ in length");
  }
  // -ln sigmoid(s) = softplus(-s); -ln(1 - sigmoid(s)) = softplus(s).
  auto softplus = [](double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  };
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw InvalidArgumentError("labels must be 0 or 1");
    }
    loss += labels[i] == 1 ? softplus(-scores[i]) : softplus(scores[i]);
  }
  return loss;
}

HttpRowScorer::HttpRowScorer(SelectionScorerEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  internal::ParseLocator(endpoint_.locator);
}

std::vector<double> HttpRowScorer::Score(const std::vector<std::string>& rows) {
  const auto response = internal::PostJson(
      endpoint_.locator, nlohmann::json{{"model", endpoint_.model}, {"rows", rows}},
      endpoint_.timeout, endpoint_.retries);
  if (!response.is_object() || !response.contains("scores") ||
      !response.at("scores").is_array()) {
    throw ProtocolError("scorer response lacks 'scores'");
  }
  try {
    return response.at("scores").get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("scorer 'scores' must be numbers");
  }
}

CandidateSlate SelectScored(RowScorer& scorer, const CandidateSlate& slate,
                            const std::vector<CrossInputRow>& rows) {
  CheckSlate(slate);
  if (rows.size() != slate.edges.size()) {
    throw InvalidArgumentError("one cross row per slate entry is required");
  }
  std::vector<std::string> texts;
  texts.reserve(rows.size());
  for (const auto& r : rows) texts.push_back(r.text);
  const auto scores = scorer.Score(texts);
  if (scores.size() != rows.size()) {
    throw ProtocolError("scorer returned " + std::to_string(scores.size()) +
                        " scores for " + std::to_string(rows.size()) + " rows");
  }
  CandidateSlate out = slate;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw ProtocolError("scorer returned a non-finite score");
    }
    auto& e = out.edges.at(rows[i].candidate_index);
    e.score = scores[i];
    e.base_score = scores[i];
  }
  SortSlate(&out.edges);
  return out;
}

std::string PromptBundle::PromptText() const {
  return input_section + "\n" + std::string(kResponseHeader) + "\n";
}

std::string MarkMentionInContext(const ContextualMention& m) {
  std::string out;
  auto add = [&out](std::string_view piece) {
    piece = Trim(piece);
    if (piece.empty()) return;
    // Right contexts often open with the punctuation that followed the span.
    const bool attached =
        std::string_view(",.;:!?)").find(piece.front()) != std::string_view::npos;
    if (!out.empty() && !attached) out += ' ';
    out += piece;
  };
  add(m.context_left);
  add("*" + std::string(Trim(m.mention)) + "*");
  add(m.context_right);
  return out;
}

std::string FormatOption(const Ontology& o, const Edge& e, std::size_t index) {
  return std::to_string(index) + "." + o.text_of(e.parent) + " " +
         std::string(kArrow) + " " + o.text_of(e.child);
}

PromptBundle BuildZeroShotPrompt(const Ontology& o,
                                 const CandidateSlate& slate) {
  CheckSlate(slate);
  PromptBundle bundle;
  std::string input(kInputHeader);
  input += "\n";
  input += kPlacementInstruction;
  input += "\n\nmention in context:\n";
  input += MarkMentionInContext(slate.mention);
  input += "\n\noptions:\n";
  for (std::size_t i = 0; i < slate.edges.size(); ++i) {
    bundle.options.push_back(FormatOption(o, slate.edges[i].edge, i));
    input += bundle.options.back();
    input += "\n";
  }
  bundle.input_section = std::move(input);
  if (slate.mention.gold_edges) {
    bundle.gold_option_indices =
        GoldOptionIndices(slate, *slate.mention.gold_edges);
  }
  return bundle;
}

std::size_t CheckPromptBudget(const std::string& prompt,
                              const Tokenizer& tokenizer,
                              std::size_t max_input_tokens) {
  const std::size_t tokens = tokenizer.Tokenize(prompt).size();
  const auto limit = static_cast<std::size_t>(
      std::floor(static_cast<double>(max_input_tokens) * 0.95));
  if (tokens > limit) {
    throw InvalidArgumentError("prompt has " + std::to_string(tokens) +
                               " tokens, budget is " + std::to_string(limit));
  }
  return tokens;
}

ParsedOptions ParseOptionResponse(std::string_view text, std::size_t k) {
  if (k == 0) throw InvalidArgumentError("k must be >= 1");
  return ParseAnswer(FirstNonEmptyLine(text), k);
}

ParsedOptions ParseExplainedResponse(std::string_view text, std::size_t k) {
  if (k == 0) throw InvalidArgumentError("k must be >= 1");
  if (auto response = AfterHeader(text, kResponseHeader)) {
    ParsedOptions parsed = ParseOptionResponse(*response, k);
    if (!parsed.parse_failed) return parsed;
  }
  static constexpr std::string_view kClause = "the final answers are";
  const std::string lowered = Lower(text);
  const auto at = lowered.rfind(kClause);
  if (at != std::string::npos) {
    std::string_view rest = text.substr(at + kClause.size());
    // The clause ends at the sentence period or the end of the line.
    const auto end = rest.find_first_of(".\n");
    return ParseAnswer(rest.substr(0, end), k);
  }
  ParsedOptions failed;
  failed.parse_failed = true;
  return failed;
}

std::vector<std::size_t> GoldOptionIndices(const CandidateSlate& slate,
                                           const std::vector<Edge>& gold) {
  const EdgeSet gold_set(gold.begin(), gold.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < slate.edges.size(); ++i) {
    if (gold_set.count(slate.edges[i].edge) > 0) out.push_back(i);
  }
  return out;
}

std::string BuildExplanation(const Ontology& o, const CandidateSlate& slate,
                             const std::vector<Edge>& gold) {
  CheckSlate(slate);
  const EdgeSet gold_set(gold.begin(), gold.end());
  std::set<ConceptId> gold_parent_ids;
  for (const auto& e : gold) gold_parent_ids.insert(e.parent);

  std::vector<std::string> parents;
  std::vector<std::string> correct_parents;
  std::set<ConceptId> listed;
  for (const auto& s : slate.edges) {
    if (!listed.insert(s.edge.parent).second) continue;
    parents.push_back(o.text_of(s.edge.parent));
    if (gold_parent_ids.count(s.edge.parent) > 0) {
      correct_parents.push_back(parents.back());
    }
  }

  std::vector<std::size_t> narrowed;
  std::vector<std::size_t> answers;
  std::vector<std::string> children;
  std::vector<std::string> correct_children;
  std::set<ConceptId> seen_children;
  std::set<ConceptId> seen_correct;
  for (std::size_t i = 0; i < slate.edges.size(); ++i) {
    const Edge& e = slate.edges[i].edge;
    if (gold_parent_ids.count(e.parent) == 0) continue;
    narrowed.push_back(i);
    if (seen_children.insert(e.child).second) {
      children.push_back(o.text_of(e.child));
    }
    if (gold_set.count(e) > 0) {
      answers.push_back(i);
      if (seen_correct.insert(e.child).second) {
        correct_children.push_back(o.text_of(e.child));
      }
    }
  }

  const std::string& name = slate.mention.mention;
  std::string out = "From the parents in the options above, including ";
  out += JoinComma(parents);
  out += ", the correct parents of the mention, " + name + ", include ";
  out += JoinComma(correct_parents);
  out += ". Thus the options are narrowed down to ";
  out += JoinIndices(narrowed, ", ");
  out += ". From the children in the narrowed options, including ";
  out += JoinComma(children);
  out += ", the correct children of the mention, " + name + ", include ";
  out += JoinComma(correct_children);
  out += ". Thus, the final answers are ";
  out += JoinIndices(answers, ", ");
  out += ".";
  return out;
}

HttpCompletionClient::HttpCompletionClient(LlmEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  internal::ParseLocator(endpoint_.locator);
}

std::string HttpCompletionClient::Complete(const std::string& prompt) {
  const auto response = internal::PostJson(
      endpoint_.locator,
      nlohmann::json{{"model", endpoint_.model},
                     {"prompt", prompt},
                     {"max_new_tokens", endpoint_.max_new_tokens},
                     {"temperature", endpoint_.temperature}},
      endpoint_.timeout, endpoint_.retries);
  if (!response.is_object() || !response.contains("text") ||
      !response.at("text").is_string()) {
    throw ProtocolError("completion response lacks 'text'");
  }
  return response.at("text").get<std::string>();
}

CandidateSlate PromoteOptions(const CandidateSlate& slate,
                              std::span<const std::size_t> selected) {
  CandidateSlate out = slate;
  out.edges.clear();
  std::vector<bool> taken(slate.edges.size(), false);
  for (std::size_t i : selected) {
    if (i < slate.edges.size() && !taken[i]) {
      taken[i] = true;
      out.edges.push_back(slate.edges[i]);
    }
  }
  for (std::size_t i = 0; i < slate.edges.size(); ++i) {
    if (!taken[i]) out.edges.push_back(slate.edges[i]);
  }
  return out;
}

LlmSelection SelectWithLlm(CompletionClient& client, const Ontology& o,
                           const CandidateSlate& slate,
                           const Tokenizer& budget_tokenizer,
                           std::size_t max_input_tokens,
                           ResponseFormat format) {
  const PromptBundle bundle = BuildZeroShotPrompt(o, slate);
  std::string prompt = bundle.PromptText();
  if (format == ResponseFormat::kExplained) {
    // Instruction-tuned models continue after the explanation header.
    prompt = bundle.input_section + "\n" + std::string(kExplanationHeader) + "\n";
  }
  CheckPromptBudget(prompt, budget_tokenizer, max_input_tokens);

  LlmSelection result;
  result.raw_response = client.Complete(prompt);
  const std::size_t k = slate.edges.size();
  result.parsed = format == ResponseFormat::kExplained
                      ? ParseExplainedResponse(result.raw_response, k)
                      : ParseOptionResponse(result.raw_response, k);
  result.slate = result.parsed.indices.empty()
                     ? slate
                     : PromoteOptions(slate, result.parsed.indices);
  return result;
}

std::string TuningRecord::Text() const {
  return input + "\n" + std::string(kExplanationHeader) + "\n" + explanation +
         "\n\n" + std::string(kResponseHeader) + "\n" + response;
}

nlohmann::json TuningRecord::ToJson() const {
  return nlohmann::json{{"id", mention_id},
                        {"input", input},
                        {"explanation", explanation},
                        {"response", response},
                        {"text", Text()}};
}

TuningRecord BuildTuningRecord(const Ontology& o, const CandidateSlate& slate) {
  if (!slate.mention.gold_edges) {
    throw InvalidArgumentError("mention '" + slate.mention.mention +
                               "' has no gold edges");
  }
  const auto& gold = *slate.mention.gold_edges;
  TuningRecord record;
  record.mention_id = slate.mention.id;
  record.input = BuildZeroShotPrompt(o, slate).input_section;
  record.explanation = BuildExplanation(o, slate, gold);
  record.response = JoinIndices(GoldOptionIndices(slate, gold), ",");
  return record;
}

std::vector<TuningRecord> EmitInstructionTuningCorpus(
    const Ontology& o, const std::vector<CandidateSlate>& slates) {
  std::vector<TuningRecord> out;
  out.reserve(slates.size());
  for (const auto& slate : slates) out.push_back(BuildTuningRecord(o, slate));
  return out;
}

}  // namespace ontoplace
