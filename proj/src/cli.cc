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

#include "ontoplace/cli.h"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ontoplace/candidates.h"
#include "ontoplace/embedding.h"
#include "ontoplace/embedding_provider.h"
#include "ontoplace/error.h"
#include "ontoplace/eval.h"
#include "ontoplace/lexical_index.h"
#include "ontoplace/ontology.h"
#include "ontoplace/pipeline.h"
#include "ontoplace/records.h"
#include "ontoplace/selection.h"
#include "ontoplace/service.h"

namespace ontoplace::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error("usage", message) {}
};

// Option names that may also come from the environment. Environment beats
// the config file; explicit flags beat both.
constexpr std::pair<const char*, const char*> kEnvOptions[] = {
    {"embed", "ONTOPLACE_EMBED_URL"},
    {"llm-url", "ONTOPLACE_LLM_URL"},
    {"scorer-url", "ONTOPLACE_SCORER_URL"},
};

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;

  std::string ontology;
  std::string concepts;
  std::string subsumptions;
  std::string mentions;
  std::string slates;
  std::string out;
  std::string report;
  std::string label;

  std::string vocab;
  double log_base = 0.0;
  std::string index;
  std::string query;
  std::size_t top = 10;

  std::string method = "lexical";
  std::vector<std::size_t> ks;
  std::size_t k = 10;
  std::vector<std::size_t> cutoffs;
  std::string split = "test-outKB";

  std::string embed;
  std::string mention_embed;
  std::string edge_embed;
  std::string embed_model = "default";
  std::string cache_dir;
  std::string kind = "concepts";
  std::size_t batch_size = 64;
  std::size_t max_context_units = 32;
  std::size_t max_concept_units = 128;
  bool no_context = false;
  std::size_t max_seed_concepts = 50;

  std::string select_method = "cross";
  std::string scorer_url;
  std::string llm_url;
  std::string model = "default";
  std::string format = "options";
  std::size_t max_input_tokens = 4096;
  std::size_t max_new_tokens = 512;
  int timeout_ms = 30000;
  int retries = 2;

  std::string session = "default";
  std::string state_dir;
  std::size_t snapshot_every = 10;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string log;
  std::string input;
};

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Flat "key = value" lines; '#' starts a comment line.
std::map<std::string, std::string> ReadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open config " + path);
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError(line_no, "config line without '='");
    }
    std::string key = Trim(std::string_view(t).substr(0, eq));
    if (key.starts_with("--")) key.erase(0, 2);
    values[key] = Trim(std::string_view(t).substr(eq + 1));
  }
  return values;
}

void ApplyDefaults(CLI::App* app,
                   const std::map<std::string, std::string>& config) {
  for (CLI::Option* opt : app->get_options()) {
    if (opt->count() > 0) continue;
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::optional<std::string> value;
    for (const auto& [option, env] : kEnvOptions) {
      if (name != option) continue;
      if (const char* v = std::getenv(env); v != nullptr && *v != '\0') {
        value = v;
      }
    }
    if (!value) {
      if (auto it = config.find(name); it != config.end()) value = it->second;
    }
    if (!value) continue;
    opt->add_result(*value);
    opt->run_callback();
  }
}

void Require(const CLI::App* app, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (app->get_option(std::string("--") + name)->count() == 0) {
      throw UsageError(app->get_name() + " requires --" + name);
    }
  }
}

void AddCommon(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "Flat key=value defaults file");
  app->add_option("--seed", f.seed,
                  "Shuffles work order; outputs must not depend on it");
  app->add_option("--parallelism", f.parallelism, "Worker threads")
      ->check(CLI::PositiveNumber);
}

void AddOntology(CLI::App* app, Flags& f) {
  app->add_option("--ontology", f.ontology,
                  "Directory with concepts.jsonl and subsumptions.tsv");
}

void AddPipeline(CLI::App* app, Flags& f) {
  AddOntology(app, f);
  app->add_option("--method", f.method, "lexical | fixed | biencoder");
  app->add_option("--vocab", f.vocab, "Subword vocabulary, one unit per line");
  app->add_option("--log-base", f.log_base, "Idf log base (0 = natural)");
  app->add_option("--index", f.index, "Prebuilt lexical index file");
  app->add_option("--embed", f.embed,
                  "Embedding provider: hashing[:dim], store:<file> or URL");
  app->add_option("--mention-embed", f.mention_embed,
                  "Mention encoder for biencoder (default: --embed)");
  app->add_option("--edge-embed", f.edge_embed,
                  "Edge encoder for biencoder (default: --embed)");
  app->add_option("--embed-model", f.embed_model, "Model name sent to URLs");
  app->add_option("--cache-dir", f.cache_dir,
                  "Embedding caches (concepts.vec, mentions.vec, edges.vec)");
  app->add_option("--batch-size", f.batch_size)->check(CLI::PositiveNumber);
  app->add_option("--max-context-units", f.max_context_units);
  app->add_option("--max-concept-units", f.max_concept_units);
  app->add_flag("--no-context", f.no_context, "Serialize mentions alone");
  app->add_option("--max-seed-concepts", f.max_seed_concepts)
      ->check(CLI::PositiveNumber);
}

Ontology LoadOntology(const Flags& f, LoadReport* report = nullptr) {
  if (!f.ontology.empty()) return Ontology::LoadDirectory(f.ontology, report);
  if (!f.concepts.empty() && !f.subsumptions.empty()) {
    return Ontology::LoadFiles(f.concepts, f.subsumptions, report);
  }
  throw UsageError("need --ontology or both --concepts and --subsumptions");
}

Tokenizer MakeTokenizer(const Flags& f) {
  return f.vocab.empty() ? Tokenizer::Whitespace()
                         : Tokenizer::FromVocabularyFile(f.vocab);
}

SerializationOptions MakeSerialization(const Flags& f) {
  return SerializationOptions{f.max_context_units, f.max_concept_units,
                              !f.no_context};
}

void LoadCache(const fs::path& path, EmbeddingStore& store) {
  if (fs::exists(path)) store = EmbeddingStore::LoadFile(path.string());
}

std::shared_ptr<PipelineResources> MakeResources(const Flags& f) {
  auto r = std::make_shared<PipelineResources>();
  r->tokenizer = MakeTokenizer(f);
  r->idf_log_base = f.log_base;
  if (!f.embed.empty()) {
    r->concept_provider = MakeEmbeddingProvider(f.embed, f.embed_model);
  }
  r->mention_provider =
      f.mention_embed.empty()
          ? r->concept_provider
          : std::shared_ptr(MakeEmbeddingProvider(f.mention_embed, f.embed_model));
  r->edge_provider =
      f.edge_embed.empty()
          ? r->concept_provider
          : std::shared_ptr(MakeEmbeddingProvider(f.edge_embed, f.embed_model));
  r->serialization = MakeSerialization(f);
  r->candidate_options.max_seed_concepts = f.max_seed_concepts;
  r->embed_options = EmbedOptions{f.batch_size, f.parallelism};
  if (!f.cache_dir.empty()) {
    const fs::path dir(f.cache_dir);
    LoadCache(dir / "concepts.vec", r->concept_store);
    LoadCache(dir / "mentions.vec", r->mention_store);
    LoadCache(dir / "edges.vec", r->edge_store);
  }
  return r;
}

std::optional<LexicalIndex> MaybeIndex(const Flags& f, const Ontology& o) {
  if (f.index.empty()) return std::nullopt;
  LexicalIndex index = LexicalIndex::LoadFile(f.index);
  if (index.corpus_size() != o.num_concepts()) {
    throw InvalidArgumentError("index " + f.index + " covers " +
                               std::to_string(index.corpus_size()) +
                               " concepts but the ontology has " +
                               std::to_string(o.num_concepts()));
  }
  return index;
}

// Writes to `path` when given, else to `fallback`.
void WithOutput(const std::string& path, std::ostream& fallback,
                const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InvalidArgumentError("cannot write " + path);
  write(file);
  file.flush();
  if (!file) throw Error("io", "write failed for " + path);
}

std::vector<CandidateSlate> ReadSlates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open slates " + path);
  std::vector<CandidateSlate> slates;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      slates.push_back(SlateFromJson(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("slate record: ") + e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return slates;
}

void ParallelFor(std::size_t n, std::size_t parallelism,
                 const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::scoped_lock lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(parallelism, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

int Ingest(const Flags& f, std::ostream& out, std::ostream& err) {
  LoadReport report;
  const Ontology o = LoadOntology(f, &report);
  std::size_t edges = 0;
  o.ForEachEdge([&](const Edge&) { ++edges; });
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  out << "concepts=" << report.concepts
      << " complex=" << report.complex_concepts
      << " subsumptions=" << report.subsumptions << " edges=" << edges
      << " warnings=" << report.warnings.size() << '\n';
  return 0;
}

int IndexBuild(const Flags& f, std::ostream& out) {
  const Ontology o = LoadOntology(f);
  const LexicalIndex index = LexicalIndex::Build(o, MakeTokenizer(f), f.log_base);
  WithOutput(f.out, out, [&](std::ostream& s) { index.Save(s); });
  if (!f.out.empty()) {
    out << "concepts=" << index.corpus_size()
        << " tokens=" << index.all_postings().size() << " path=" << f.out
        << '\n';
  }
  return 0;
}

int IndexQuery(const Flags& f, std::ostream& out) {
  const LexicalIndex index =
      !f.index.empty()
          ? LexicalIndex::LoadFile(f.index)
          : LexicalIndex::Build(LoadOntology(f), MakeTokenizer(f), f.log_base);
  for (const auto& r : index.Search(f.query, f.top)) {
    char score[32];
    std::snprintf(score, sizeof score, "%.6f", r.score);
    out << r.id << '\t' << score << '\n';
  }
  return 0;
}

int EmbedCache(const Flags& f, std::ostream& out) {
  if (f.embed.empty()) throw UsageError("embed-cache requires --embed");
  const Ontology o = LoadOntology(f);
  auto provider = MakeEmbeddingProvider(f.embed, f.embed_model);
  EmbeddingStore store;
  LoadCache(f.out, store);
  CachingEmbedder embedder(*provider, store,
                           EmbedOptions{f.batch_size, f.parallelism});
  const SerializationOptions ser = MakeSerialization(f);

  std::vector<std::string> texts;
  if (f.kind == "concepts") {
    for (const auto& [id, c] : o.concepts()) texts.push_back(Verbalize(c));
  } else if (f.kind == "edges") {
    o.ForEachEdge([&](const Edge& e) {
      texts.push_back(SerializeEdge(o, e, ser.max_concept_units));
    });
  } else if (f.kind == "mentions" || f.kind == "serialized-mentions") {
    if (f.mentions.empty()) throw UsageError("--kind " + f.kind + " needs --mentions");
    for (const auto& m : LoadMentionsFile(f.mentions)) {
      texts.push_back(f.kind == "mentions"
                          ? m.mention
                          : SerializeMention(m, ser.max_context_units,
                                             ser.with_context));
    }
  } else {
    throw UsageError("unknown --kind '" + f.kind + "'");
  }
  const std::size_t before = store.size();
  embedder.EmbedTexts(texts);
  store.SaveFile(f.out);
  out << "kind=" << f.kind << " texts=" << texts.size()
      << " new=" << store.size() - before << " stored=" << store.size()
      << " dim=" << store.dim() << '\n';
  return 0;
}

int Candidates(const Flags& f, std::ostream& out) {
  auto o = std::make_shared<const Ontology>(LoadOntology(f));
  const auto mentions = LoadMentionsFile(f.mentions);
  const SearchMethod method = SearchMethodFromString(f.method);
  PlacementPipeline pipeline(o, MakeResources(f), MaybeIndex(f, *o));

  // A nonzero seed permutes the processing order; the results are mapped
  // back, so any seed must produce the same file.
  std::vector<std::size_t> order(mentions.size());
  std::iota(order.begin(), order.end(), 0);
  if (f.seed != 0) std::shuffle(order.begin(), order.end(), std::mt19937_64(f.seed));
  std::vector<ContextualMention> permuted;
  permuted.reserve(order.size());
  for (std::size_t i : order) permuted.push_back(mentions[i]);

  auto generated =
      pipeline.Generator(method).GenerateAll(permuted, f.k, f.parallelism);
  std::vector<CandidateSlate> slates(mentions.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    slates[order[i]] = std::move(generated[i]);
  }
  WithOutput(f.out, out, [&](std::ostream& s) {
    for (const auto& slate : slates) s << SlateToJson(slate).dump() << '\n';
  });
  if (!f.out.empty()) {
    out << "mentions=" << slates.size() << " k=" << f.k
        << " method=" << ToString(method) << " path=" << f.out << '\n';
  }
  return 0;
}

int Select(const Flags& f, std::ostream& out) {
  const Ontology o = LoadOntology(f);
  const auto slates = ReadSlates(f.slates);
  std::vector<json> lines(slates.size());
  if (f.select_method == "cross") {
    if (f.scorer_url.empty()) {
      throw UsageError("select --method cross needs --scorer-url or ONTOPLACE_SCORER_URL");
    }
    HttpRowScorer scorer(SelectionScorerEndpoint{
        f.scorer_url, f.model, std::chrono::milliseconds(f.timeout_ms),
        f.retries});
    const SerializationOptions ser = MakeSerialization(f);
    ParallelFor(slates.size(), f.parallelism, [&](std::size_t i) {
      const auto rows = BuildCrossRows(o, slates[i], ser);
      lines[i] = SlateToJson(SelectScored(scorer, slates[i], rows));
    });
  } else if (f.select_method == "llm") {
    if (f.llm_url.empty()) {
      throw UsageError("select --method llm needs --llm-url or ONTOPLACE_LLM_URL");
    }
    LlmEndpoint endpoint;
    endpoint.locator = f.llm_url;
    endpoint.model = f.model;
    endpoint.max_input_tokens = f.max_input_tokens;
    endpoint.max_new_tokens = f.max_new_tokens;
    endpoint.timeout = std::chrono::milliseconds(f.timeout_ms);
    endpoint.retries = f.retries;
    HttpCompletionClient client(endpoint);
    const Tokenizer tokenizer = MakeTokenizer(f);
    ResponseFormat format;
    if (f.format == "options") {
      format = ResponseFormat::kOptionsOnly;
    } else if (f.format == "explained") {
      format = ResponseFormat::kExplained;
    } else {
      throw UsageError("unknown --format '" + f.format + "'");
    }
    ParallelFor(slates.size(), f.parallelism, [&](std::size_t i) {
      const LlmSelection sel = SelectWithLlm(client, o, slates[i], tokenizer,
                                             f.max_input_tokens, format);
      json line = SlateToJson(sel.slate);
      line["selection"] = json{{"options", sel.parsed.indices},
                               {"out_of_range", sel.parsed.out_of_range},
                               {"answered_none", sel.parsed.answered_none},
                               {"parse_failed", sel.parsed.parse_failed},
                               {"response", sel.raw_response}};
      lines[i] = std::move(line);
    });
  } else {
    throw UsageError("unknown select method '" + f.select_method + "'");
  }
  WithOutput(f.out, out, [&](std::ostream& s) {
    for (const auto& line : lines) s << line.dump() << '\n';
  });
  if (!f.out.empty()) {
    out << "slates=" << lines.size() << " method=" << f.select_method
        << " path=" << f.out << '\n';
  }
  return 0;
}

int TuneCorpus(const Flags& f, std::ostream& out) {
  const Ontology o = LoadOntology(f);
  const auto records = EmitInstructionTuningCorpus(o, ReadSlates(f.slates));
  WithOutput(f.out, out, [&](std::ostream& s) {
    for (const auto& r : records) s << r.ToJson().dump() << '\n';
  });
  if (!f.out.empty()) {
    out << "records=" << records.size() << " path=" << f.out << '\n';
  }
  return 0;
}

int Eval(const Flags& f, std::ostream& out) {
  const bool tsv = f.report.ends_with(".tsv");
  std::string text;
  std::vector<std::size_t> cutoffs =
      f.cutoffs.empty() ? std::vector<std::size_t>{1, 5, 10} : f.cutoffs;

  if (!f.slates.empty()) {
    const auto slates = ReadSlates(f.slates);
    std::size_t k = 0;
    for (const auto& s : slates) k = std::max(k, s.k);
    cutoffs.push_back(k);
    std::sort(cutoffs.begin(), cutoffs.end());
    cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());
    EvaluationReport report = EvaluateSlates(slates, cutoffs, k);
    report.label = f.label.empty() ? "slates" : f.label;
    text = tsv ? report.ToTsv() : report.ToMarkdown();
  } else {
    if (f.mentions.empty()) {
      throw UsageError("eval needs --slates, or --ontology with --mentions");
    }
    auto o = std::make_shared<const Ontology>(LoadOntology(f));
    const PlacementDataset dataset =
        LoadDatasetFile(f.mentions, *o, SplitFromString(f.split));
    const SearchMethod method = SearchMethodFromString(f.method);
    PlacementPipeline pipeline(o, MakeResources(f), MaybeIndex(f, *o));
    const std::vector<std::size_t> ks =
        f.ks.empty() ? std::vector<std::size_t>{10} : f.ks;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      BenchmarkConfig config;
      config.k = ks[i];
      config.cutoffs = cutoffs;
      config.parallelism = f.parallelism;
      config.label = (f.label.empty() ? std::string(ToString(method)) : f.label) +
                     " " + std::string(ToString(dataset.split)) +
                     " k=" + std::to_string(ks[i]);
      const BenchmarkResult result =
          RunBenchmark(pipeline.Generator(method), dataset, config);
      if (tsv) {
        std::istringstream rows(result.report.ToTsv());
        std::string row;
        bool header = true;
        while (std::getline(rows, row)) {
          if (header) {
            if (i == 0) text += "k\t" + row + "\n";
            header = false;
            continue;
          }
          text += std::to_string(ks[i]) + "\t" + row + "\n";
        }
      } else {
        if (i > 0) text += "\n";
        text += result.report.ToMarkdown();
      }
    }
  }
  WithOutput(f.report, out, [&](std::ostream& s) { s << text; });
  if (!f.report.empty()) out << "report=" << f.report << '\n';
  return 0;
}

std::vector<Decision> ReadDecisions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open decision log " + path);
  std::vector<Decision> log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      log.push_back(Decision::FromJson(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("decision: ") + e.what());
    }
  }
  return log;
}

int Export(const Flags& f, std::ostream& out) {
  Ontology o;
  std::string log_path = f.log;
  if (!f.state_dir.empty()) {
    o = Ontology::LoadDirectory((fs::path(f.state_dir) / "base").string());
    if (log_path.empty()) {
      const fs::path p = fs::path(f.state_dir) / "log.jsonl";
      if (fs::exists(p)) log_path = p.string();
    }
  } else {
    o = LoadOntology(f);
  }
  std::size_t decisions = 0;
  if (!log_path.empty()) {
    const auto log = ReadDecisions(log_path);
    decisions = log.size();
    o = CurationSession::Replay(o, log);
  }
  if (f.out.empty()) throw UsageError("export requires --out");
  o.ExportDirectory(f.out);
  out << "concepts=" << o.num_concepts()
      << " subsumptions=" << o.num_subsumptions()
      << " decisions=" << decisions << " path=" << f.out << '\n';
  return 0;
}

int AdaptMm(const Flags& f, std::ostream& out) {
  std::ifstream in(f.input);
  if (!in) throw NotFoundError("cannot open " + f.input);
  WithOutput(f.out, out, [&](std::ostream& s) { ConvertReleaseRecords(in, s); });
  return 0;
}

int Serve(const Flags& f, std::ostream& out) {
  Ontology o = LoadOntology(f);
  auto mentions = LoadMentionsFile(f.mentions);
  auto session = std::make_shared<CurationSession>(
      f.session, std::move(o), std::move(mentions), MakeResources(f),
      SessionOptions{f.state_dir, f.snapshot_every});
  PlacementServer server(
      PlacementServer::Defaults{f.k, SearchMethodFromString(f.method)});
  server.AddSession(session);
  out << "serving session " << f.session << " on http://" << f.host << ':'
      << f.port << std::endl;
  server.Serve(f.host, f.port);
  return 0;
}

CLI::App* Deepest(CLI::App* app) {
  for (;;) {
    const auto subs = app->get_subcommands();
    if (subs.empty()) return app;
    app = subs.front();
  }
}

void PrintError(std::ostream& err, const std::string& code,
                const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Flags f;
  CLI::App app{"Places new concept mentions into ontology subsumption edges",
               "ontoplace"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "Load and validate an ontology");
  AddCommon(ingest, f);
  AddOntology(ingest, f);
  ingest->add_option("--concepts", f.concepts, "Concept records file");
  ingest->add_option("--subsumptions", f.subsumptions, "Subsumption pairs file");

  auto* index = app.add_subcommand("index", "Lexical index tools");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "Build and save an index");
  AddCommon(index_build, f);
  AddOntology(index_build, f);
  index_build->add_option("--vocab", f.vocab);
  index_build->add_option("--log-base", f.log_base);
  index_build->add_option("--out", f.out, "Index file (stdout if absent)");
  auto* index_query = index->add_subcommand("query", "Search concepts");
  AddCommon(index_query, f);
  AddOntology(index_query, f);
  index_query->add_option("--index", f.index);
  index_query->add_option("--vocab", f.vocab);
  index_query->add_option("--log-base", f.log_base);
  index_query->add_option("--mention", f.query, "Mention text");
  index_query->add_option("--top", f.top)->check(CLI::PositiveNumber);

  auto* embed = app.add_subcommand("embed-cache", "Precompute embeddings");
  AddCommon(embed, f);
  AddOntology(embed, f);
  embed->add_option("--embed", f.embed);
  embed->add_option("--embed-model", f.embed_model);
  embed->add_option("--kind", f.kind,
                    "concepts | edges | mentions | serialized-mentions");
  embed->add_option("--mentions", f.mentions);
  embed->add_option("--out", f.out, "Store file, extended in place");
  embed->add_option("--batch-size", f.batch_size)->check(CLI::PositiveNumber);
  embed->add_option("--max-context-units", f.max_context_units);
  embed->add_option("--max-concept-units", f.max_concept_units);
  embed->add_flag("--no-context", f.no_context);

  auto* candidates = app.add_subcommand("candidates", "Generate candidate slates");
  AddCommon(candidates, f);
  AddPipeline(candidates, f);
  candidates->add_option("--mentions", f.mentions, "Mention records");
  candidates->add_option("--k", f.k, "Slate size (even, >= 2)");
  candidates->add_option("--out", f.out, "Slates file (stdout if absent)");

  auto* select = app.add_subcommand("select", "Re-rank slates with a selector");
  AddCommon(select, f);
  AddOntology(select, f);
  select->add_option("--slates", f.slates);
  select->add_option("--method", f.select_method, "cross | llm");
  select->add_option("--scorer-url", f.scorer_url);
  select->add_option("--llm-url", f.llm_url);
  select->add_option("--model", f.model);
  select->add_option("--format", f.format, "options | explained");
  select->add_option("--vocab", f.vocab, "Tokenizer for the prompt budget");
  select->add_option("--max-input-tokens", f.max_input_tokens);
  select->add_option("--max-new-tokens", f.max_new_tokens);
  select->add_option("--timeout-ms", f.timeout_ms);
  select->add_option("--retries", f.retries);
  select->add_option("--max-context-units", f.max_context_units);
  select->add_option("--max-concept-units", f.max_concept_units);
  select->add_flag("--no-context", f.no_context);
  select->add_option("--out", f.out);

  auto* tune = app.add_subcommand("tune-corpus",
                                  "Emit explanation-augmented training records");
  AddCommon(tune, f);
  AddOntology(tune, f);
  tune->add_option("--slates", f.slates);
  tune->add_option("--out", f.out);

  auto* eval = app.add_subcommand("eval", "Insertion-rate report");
  AddCommon(eval, f);
  AddPipeline(eval, f);
  eval->add_option("--slates", f.slates, "Evaluate precomputed slates");
  eval->add_option("--mentions", f.mentions, "Dataset with gold edges");
  eval->add_option("--split", f.split);
  eval->add_option("--k", f.ks, "Slate sizes, e.g. 10,50")->delimiter(',');
  eval->add_option("--cutoffs", f.cutoffs, "@k cutoffs, e.g. 1,5,10")
      ->delimiter(',');
  eval->add_option("--label", f.label);
  eval->add_option("--report", f.report, ".md or .tsv (stdout if absent)");

  auto* serve = app.add_subcommand("serve", "Run the curation service");
  AddCommon(serve, f);
  AddPipeline(serve, f);
  serve->add_option("--mentions", f.mentions, "Pending mention queue");
  serve->add_option("--k", f.k, "Default slate size");
  serve->add_option("--session", f.session);
  serve->add_option("--state-dir", f.state_dir);
  serve->add_option("--snapshot-every", f.snapshot_every);
  serve->add_option("--host", f.host);
  serve->add_option("--port", f.port);

  auto* exp = app.add_subcommand("export", "Write canonical ontology files");
  AddCommon(exp, f);
  AddOntology(exp, f);
  exp->add_option("--log", f.log, "Decision log to replay first");
  exp->add_option("--state-dir", f.state_dir, "Service state to replay");
  exp->add_option("--out", f.out, "Output directory");

  auto* adapt = app.add_subcommand("adapt-mm",
                                   "Convert release-layout mention records");
  AddCommon(adapt, f);
  adapt->add_option("--in", f.input);
  adapt->add_option("--out", f.out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << Deepest(&app)->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << Deepest(&app)->help();
    PrintError(err, "usage", e.what());
    return 2;
  }

  CLI::App* cmd = Deepest(&app);
  try {
    const auto config =
        f.config.empty() ? std::map<std::string, std::string>{} : ReadConfig(f.config);
    ApplyDefaults(cmd, config);

    if (cmd == ingest) return Ingest(f, out, err);
    if (cmd == index_build) return IndexBuild(f, out);
    if (cmd == index_query) {
      Require(cmd, {"mention"});
      return IndexQuery(f, out);
    }
    if (cmd == embed) {
      Require(cmd, {"out"});
      return EmbedCache(f, out);
    }
    if (cmd == candidates) {
      Require(cmd, {"mentions"});
      return Candidates(f, out);
    }
    if (cmd == select) {
      Require(cmd, {"slates"});
      return Select(f, out);
    }
    if (cmd == tune) {
      Require(cmd, {"slates"});
      return TuneCorpus(f, out);
    }
    if (cmd == eval) return Eval(f, out);
    if (cmd == serve) {
      Require(cmd, {"mentions"});
      return Serve(f, out);
    }
    if (cmd == exp) return Export(f, out);
    if (cmd == adapt) {
      Require(cmd, {"in"});
      return AdaptMm(f, out);
    }
    throw UsageError("no subcommand");
  } catch (const UsageError& e) {
    err << cmd->help();
    PrintError(err, e.code(), e.what());
    return 2;
  } catch (const CLI::ParseError& e) {
    err << cmd->help();
    PrintError(err, "usage", e.what());
    return 2;
  } catch (const Error& e) {
    PrintError(err, e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    PrintError(err, "internal", e.what());
    return 1;
  }
}

}  // namespace ontoplace::cli
