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

#include "ontoplace/eval.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ontoplace/error.h"
#include "ontoplace/records.h"

namespace ontoplace {
namespace {

bool Hits(const std::vector<Edge>& predicted, std::size_t limit,
          const std::vector<Edge>& gold, bool require_all) {
  const std::size_t n = std::min(limit, predicted.size());
  const EdgeSet top(predicted.begin(),
                    predicted.begin() + static_cast<std::ptrdiff_t>(n));
  if (require_all) {
    return std::all_of(gold.begin(), gold.end(),
                       [&](const Edge& e) { return top.count(e) > 0; });
  }
  return std::any_of(gold.begin(), gold.end(),
                     [&](const Edge& e) { return top.count(e) > 0; });
}

void CheckNonEmpty(const std::vector<PredictionRecord>& records) {
  if (records.empty()) {
    throw InvalidArgumentError("insertion rate over an empty record list");
  }
}

bool InSubset(const PredictionRecord& r, MentionSubset subset) {
  switch (subset) {
    case MentionSubset::kAll:
      return true;
    case MentionSubset::kLeaf:
      return IsLeafMention(r);
    case MentionSubset::kNonLeaf:
      return !IsLeafMention(r);
  }
  return false;
}

constexpr MentionSubset kSubsets[] = {MentionSubset::kAll, MentionSubset::kLeaf,
                                      MentionSubset::kNonLeaf};

std::vector<std::string> IdList(const nlohmann::json& j) {
  std::vector<std::string> ids;
  if (j.is_null()) return ids;
  if (j.is_array()) {
    for (const auto& x : j) {
      ids.push_back(x.is_string() ? x.get<std::string>() : x.dump());
    }
    return ids;
  }
  const std::string raw = j.is_string() ? j.get<std::string>() : j.dump();
  std::stringstream in(raw);
  std::string id;
  while (std::getline(in, id, '|')) {
    const auto b = id.find_first_not_of(' ');
    const auto e = id.find_last_not_of(' ');
    if (b != std::string::npos) ids.push_back(id.substr(b, e - b + 1));
  }
  return ids;
}

bool IsNullId(const std::string& id) {
  return id.empty() || id == kNullConcept || id == "SCTID_NULL" ||
         id == "null";
}

}  // namespace

std::string_view ToString(Split split) {
  switch (split) {
    case Split::kTrainInKb:
      return "train-inKB";
    case Split::kValidInKb:
      return "valid-inKB";
    case Split::kValidOutKb:
      return "valid-outKB";
    case Split::kTestOutKb:
      return "test-outKB";
  }
  return "unknown";
}

Split SplitFromString(std::string_view name) {
  for (auto s : {Split::kTrainInKb, Split::kValidInKb, Split::kValidOutKb,
                 Split::kTestOutKb}) {
    if (ToString(s) == name) return s;
  }
  throw InvalidArgumentError("unknown split '" + std::string(name) + "'");
}

std::string_view ToString(MentionSubset subset) {
  switch (subset) {
    case MentionSubset::kAll:
      return "all";
    case MentionSubset::kLeaf:
      return "leaf";
    case MentionSubset::kNonLeaf:
      return "nonleaf";
  }
  return "unknown";
}

PlacementDataset LoadDataset(std::istream& in, const Ontology& o, Split split) {
  PlacementDataset dataset;
  dataset.split = split;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ContextualMention m;
    try {
      m = MentionFromJson(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("dataset record: ") + e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!m.gold_edges || m.gold_edges->empty()) {
      throw ParseError(line_no, "record has no gold edges");
    }
    for (const auto& e : *m.gold_edges) {
      if (!o.contains(e.parent)) {
        throw ParseError(line_no, "gold edge parent '" + e.parent +
                                      "' is not in the ontology");
      }
      if (!e.is_leaf() && !o.contains(e.child)) {
        throw ParseError(line_no, "gold edge child '" + e.child +
                                      "' is not in the ontology");
      }
    }
    if (m.id.empty()) m.id = std::to_string(dataset.mentions.size());
    if (!ids.insert(m.id).second) {
      throw ParseError(line_no, "duplicate mention id '" + m.id + "'");
    }
    dataset.mentions.push_back(std::move(m));
  }
  return dataset;
}

PlacementDataset LoadDatasetFile(const std::string& path, const Ontology& o,
                                 Split split) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open dataset " + path);
  return LoadDataset(in, o, split);
}

std::vector<ContextualMention> LoadMentions(std::istream& in) {
  std::vector<ContextualMention> mentions;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ContextualMention m;
    try {
      m = MentionFromJson(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("mention record: ") + e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    if (m.id.empty()) m.id = std::to_string(mentions.size());
    if (!ids.insert(m.id).second) {
      throw ParseError(line_no, "duplicate mention id '" + m.id + "'");
    }
    mentions.push_back(std::move(m));
  }
  return mentions;
}

std::vector<ContextualMention> LoadMentionsFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open mentions " + path);
  return LoadMentions(in);
}

void ConvertReleaseRecords(std::istream& in, std::ostream& out) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json src;
    try {
      src = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    nlohmann::json dst;
    dst["mention"] = src.value("mention", std::string());
    if (dst["mention"].get<std::string>().empty()) {
      throw ParseError(line_no, "record has no mention");
    }
    dst["context_left"] = src.value("context_left", std::string());
    dst["context_right"] = src.value("context_right", std::string());
    if (src.contains("id")) dst["id"] = src["id"];

    std::vector<Edge> gold;
    if (src.contains("gold_edges")) {
      gold = EdgesFromJson(src["gold_edges"]);
    } else if (src.contains("edges")) {
      for (const auto& e : src["edges"]) {
        if (e.is_string()) {
          const std::string s = e.get<std::string>();
          const auto arrow = s.find("->");
          if (arrow == std::string::npos) {
            throw ParseError(line_no, "edge string needs 'parent->child'");
          }
          std::string child = s.substr(arrow + 2);
          gold.push_back({s.substr(0, arrow), IsNullId(child)
                                                  ? std::string(kNullConcept)
                                                  : child});
        } else {
          gold.push_back(EdgeFromJson(e));
        }
      }
    } else {
      const auto parents = IdList(src.value("parents_concept", nlohmann::json()));
      auto children = IdList(src.value("children_concept", nlohmann::json()));
      children.erase(std::remove_if(children.begin(), children.end(), IsNullId),
                     children.end());
      for (const auto& p : parents) {
        if (IsNullId(p)) continue;
        if (children.empty()) {
          gold.push_back({p, std::string(kNullConcept)});
        }
        for (const auto& c : children) gold.push_back({p, c});
      }
    }
    if (gold.empty()) throw ParseError(line_no, "record has no gold edges");
    dst["gold_edges"] = EdgesToJson(gold);
    out << dst.dump() << '\n';
  }
}

double InrAny(const std::vector<PredictionRecord>& records) {
  CheckNonEmpty(records);
  std::size_t hits = 0;
  for (const auto& r : records) {
    if (Hits(r.predicted, r.predicted.size(), r.gold, false)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double InrAll(const std::vector<PredictionRecord>& records) {
  CheckNonEmpty(records);
  std::size_t hits = 0;
  for (const auto& r : records) {
    if (Hits(r.predicted, r.predicted.size(), r.gold, true)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

bool IsLeafMention(const PredictionRecord& record) {
  return !record.gold.empty() &&
         std::all_of(record.gold.begin(), record.gold.end(),
                     [](const Edge& e) { return e.is_leaf(); });
}

std::optional<InsertionRates> InrAtK(const std::vector<PredictionRecord>& records,
                                     std::size_t k, MentionSubset subset) {
  if (k == 0) throw InvalidArgumentError("k must be >= 1");
  InsertionRates rates;
  std::size_t any = 0;
  std::size_t all = 0;
  for (const auto& r : records) {
    if (!InSubset(r, subset)) continue;
    ++rates.mentions;
    if (Hits(r.predicted, k, r.gold, false)) ++any;
    if (Hits(r.predicted, k, r.gold, true)) ++all;
  }
  if (rates.mentions == 0) return std::nullopt;
  rates.any = static_cast<double>(any) / static_cast<double>(rates.mentions);
  rates.all = static_cast<double>(all) / static_cast<double>(rates.mentions);
  return rates;
}

EvaluationReport EvaluationReport::Compute(
    const std::vector<PredictionRecord>& records,
    const std::vector<std::size_t>& cutoffs) {
  EvaluationReport report;
  report.total_mentions = records.size();
  for (std::size_t k : cutoffs) {
    for (auto subset : kSubsets) {
      report.cells[k][subset] = InrAtK(records, k, subset);
    }
  }
  return report;
}

std::string FormatPercent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * fraction);
  return buf;
}

std::string EvaluationReport::ToMarkdown() const {
  std::ostringstream out;
  out << "# " << (label.empty() ? "evaluation" : label) << "\n\n";
  out << "candidates k: " << candidate_k << "\n";
  out << "mentions: " << total_mentions << " (failed: " << failed_mentions
      << ")\n\n";
  out << "| @k | subset | mentions | InR_any | InR_all |\n";
  out << "|---:|---|---:|---:|---:|\n";
  for (const auto& [k, row] : cells) {
    for (const auto& [subset, rates] : row) {
      out << "| " << k << " | " << ToString(subset) << " | "
          << (rates ? std::to_string(rates->mentions) : "0") << " | "
          << (rates ? FormatPercent(rates->any) : "-") << " | "
          << (rates ? FormatPercent(rates->all) : "-") << " |\n";
    }
  }
  return out.str();
}

std::string EvaluationReport::ToTsv() const {
  std::ostringstream out;
  out << "cutoff\tsubset\tmentions\tinr_any\tinr_all\n";
  for (const auto& [k, row] : cells) {
    for (const auto& [subset, rates] : row) {
      out << k << '\t' << ToString(subset) << '\t'
          << (rates ? rates->mentions : 0) << '\t'
          << (rates ? FormatPercent(rates->any) : "-") << '\t'
          << (rates ? FormatPercent(rates->all) : "-") << '\n';
    }
  }
  return out.str();
}

std::string RenderSplitComparison(const EvaluationReport& valid,
                                  const EvaluationReport& test) {
  auto cell = [](const EvaluationReport& r, std::size_t k, MentionSubset s,
                 bool all) -> std::string {
    auto row = r.cells.find(k);
    if (row == r.cells.end()) return "-";
    auto it = row->second.find(s);
    if (it == row->second.end() || !it->second) return "-";
    return FormatPercent(all ? it->second->all : it->second->any);
  };
  std::ostringstream out;
  out << "| @k | subset | InR_any | InR_all |\n|---:|---|---|---|\n";
  std::set<std::size_t> cutoffs;
  for (const auto& [k, row] : valid.cells) cutoffs.insert(k);
  for (const auto& [k, row] : test.cells) cutoffs.insert(k);
  for (std::size_t k : cutoffs) {
    for (auto s : kSubsets) {
      out << "| " << k << " | " << ToString(s) << " | "
          << cell(valid, k, s, false) << " / " << cell(test, k, s, false)
          << " | " << cell(valid, k, s, true) << " / " << cell(test, k, s, true)
          << " |\n";
    }
  }
  return out.str();
}

BenchmarkResult RunBenchmark(const CandidateGenerator& generator,
                             const PlacementDataset& dataset,
                             const BenchmarkConfig& config) {
  if (dataset.mentions.empty()) {
    throw InvalidArgumentError("benchmark over an empty dataset");
  }
  const auto& mentions = dataset.mentions;
  BenchmarkResult result;
  result.slates.resize(mentions.size());
  std::vector<std::optional<std::string>> errors(mentions.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < mentions.size(); i = next++) {
      try {
        CandidateSlate slate = generator.Generate(mentions[i], config.k);
        if (config.selector && !slate.edges.empty()) {
          slate = config.selector(slate);
        }
        result.slates[i] = std::move(slate);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        result.slates[i] = CandidateSlate{mentions[i], config.k, {}, 0};
      }
    }
  };
  const std::size_t threads =
      std::max<std::size_t>(1, std::min(config.parallelism, mentions.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < mentions.size(); ++i) {
    if (errors[i]) result.failures[i] = *errors[i];
    result.records.push_back(
        {i, result.slates[i].edge_list(), *mentions[i].gold_edges});
  }
  std::vector<std::size_t> cutoffs = config.cutoffs;
  cutoffs.push_back(config.k);
  std::sort(cutoffs.begin(), cutoffs.end());
  cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());
  result.report = EvaluationReport::Compute(result.records, cutoffs);
  result.report.label = config.label;
  result.report.candidate_k = config.k;
  result.report.failed_mentions = result.failures.size();
  return result;
}

EvaluationReport EvaluateSlates(const std::vector<CandidateSlate>& slates,
                                const std::vector<std::size_t>& cutoffs,
                                std::size_t candidate_k) {
  if (slates.empty()) throw InvalidArgumentError("no slates to evaluate");
  std::vector<PredictionRecord> records;
  for (std::size_t i = 0; i < slates.size(); ++i) {
    if (!slates[i].mention.gold_edges) {
      throw InvalidArgumentError("slate " + std::to_string(i) +
                                 " carries no gold edges");
    }
    records.push_back({i, slates[i].edge_list(), *slates[i].mention.gold_edges});
  }
  EvaluationReport report = EvaluationReport::Compute(records, cutoffs);
  report.candidate_k = candidate_k;
  return report;
}

}  // namespace ontoplace
