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

#include "ontoplace/service.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "httplib.h"
#include "ontoplace/error.h"
#include "ontoplace/records.h"

namespace ontoplace {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string UtcNow() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string Canonical(const Ontology& o) {
  std::ostringstream s;
  o.ExportConcepts(s);
  s << '\n';
  o.ExportSubsumptions(s);
  return s.str();
}

// Snapshot directories are named "v<version>".
std::optional<std::uint64_t> SnapshotVersion(const fs::path& dir) {
  const std::string name = dir.filename().string();
  if (name.size() < 2 || name[0] != 'v') return std::nullopt;
  std::uint64_t v = 0;
  const auto [end, ec] =
      std::from_chars(name.data() + 1, name.data() + name.size(), v);
  if (ec != std::errc() || end != name.data() + name.size()) return std::nullopt;
  return v;
}

}  // namespace

json Decision::ToJson() const {
  return json{{"version", version},     {"mention_id", mention_id},
              {"concept", ConceptToJson(placed)},
              {"edges", EdgesToJson(edges)},
              {"manual", manual},       {"who", who},
              {"timestamp", timestamp}};
}

Decision Decision::FromJson(const json& j) {
  Decision d;
  d.version = j.at("version").get<std::uint64_t>();
  d.mention_id = j.at("mention_id").get<std::string>();
  d.placed = ConceptFromJson(j.at("concept"));
  d.edges = EdgesFromJson(j.at("edges"));
  d.manual = j.value("manual", false);
  d.who = j.value("who", "");
  d.timestamp = j.value("timestamp", "");
  return d;
}

CurationSession::CurationSession(std::string id, Ontology base,
                                 std::vector<ContextualMention> mentions,
                                 std::shared_ptr<PipelineResources> resources,
                                 SessionOptions options)
    : id_(std::move(id)),
      base_(std::make_shared<const Ontology>(std::move(base))),
      resources_(std::move(resources)),
      options_(std::move(options)) {
  if (id_.empty()) throw InvalidArgumentError("session id must not be empty");
  for (auto& m : mentions) {
    if (m.id.empty()) throw InvalidArgumentError("mention without id");
    const std::string mid = m.id;
    if (!mentions_.emplace(mid, MentionState{std::move(m), std::nullopt})
             .second) {
      throw InvalidArgumentError("duplicate mention id '" + mid + "'");
    }
    queue_.push_back(mid);
  }
  pipeline_ = std::make_shared<const PlacementPipeline>(base_, resources_);
  if (!options_.state_dir.empty()) Restore();
}

void CurationSession::Restore() {
  const fs::path dir(options_.state_dir);
  const fs::path base_dir = dir / "base";
  const std::string canonical = Canonical(*base_);
  if (fs::exists(base_dir / "concepts.jsonl")) {
    const Ontology stored = Ontology::LoadDirectory(base_dir.string());
    if (Canonical(stored) != canonical) {
      throw ConflictError("state dir " + dir.string() +
                          " belongs to a different base ontology");
    }
  } else {
    base_->ExportDirectory(base_dir.string());
  }

  std::ifstream in(dir / "log.jsonl");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      log_.push_back(Decision::FromJson(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(lineno, std::string("decision log: ") + e.what());
    }
  }
  if (log_.empty()) return;

  // Start from the newest snapshot the log covers, then replay the rest.
  std::shared_ptr<const Ontology> start = base_;
  std::uint64_t start_version = 0;
  if (fs::exists(dir / "snapshots")) {
    for (const auto& entry : fs::directory_iterator(dir / "snapshots")) {
      const auto v = SnapshotVersion(entry.path());
      if (v && *v > start_version && *v <= log_.size()) {
        start_version = *v;
      }
    }
  }
  if (start_version > 0) {
    start = std::make_shared<const Ontology>(Ontology::LoadDirectory(
        (dir / "snapshots" / ("v" + std::to_string(start_version))).string()));
  }
  Ontology current = *start;
  for (std::size_t i = start_version; i < log_.size(); ++i) {
    if (log_[i].version != i + 1) {
      throw ParseError(i + 1, "decision log version gap");
    }
    current = current.InsertPlacement(log_[i].placed, log_[i].edges);
  }
  version_ = log_.size();
  pipeline_ = std::make_shared<const PlacementPipeline>(
      std::make_shared<const Ontology>(std::move(current)), resources_);
  for (const auto& d : log_) {
    std::erase(queue_, d.mention_id);
  }
}

std::uint64_t CurationSession::version() const {
  std::shared_lock lock(mutex_);
  return version_;
}

std::shared_ptr<const Ontology> CurationSession::ontology() const {
  std::shared_lock lock(mutex_);
  return pipeline_->shared_ontology();
}

std::vector<ContextualMention> CurationSession::Pending() const {
  std::shared_lock lock(mutex_);
  std::vector<ContextualMention> out;
  out.reserve(queue_.size());
  for (const auto& mid : queue_) out.push_back(mentions_.at(mid).mention);
  return out;
}

const ContextualMention& CurationSession::FindPending(
    const std::string& mention_id) const {
  const auto it = mentions_.find(mention_id);
  if (it == mentions_.end()) {
    throw NotFoundError("unknown mention '" + mention_id + "'");
  }
  if (std::find(queue_.begin(), queue_.end(), mention_id) == queue_.end()) {
    throw ConflictError("mention '" + mention_id + "' is already placed");
  }
  return it->second.mention;
}

CandidateSlate CurationSession::GetCandidates(const std::string& mention_id,
                                              std::size_t k,
                                              SearchMethod method) {
  ContextualMention mention;
  std::shared_ptr<const PlacementPipeline> pipeline;
  std::uint64_t version = 0;
  {
    std::shared_lock lock(mutex_);
    mention = FindPending(mention_id);
    pipeline = pipeline_;
    version = version_;
  }
  CandidateSlate slate = pipeline->Generate(mention, k, method);
  slate.ontology_version = version;

  std::unique_lock lock(mutex_);
  auto& state = mentions_.at(mention_id);
  if (!state.last_slate || state.last_slate->ontology_version <= version) {
    state.last_slate = slate;
  }
  return slate;
}

std::uint64_t CurationSession::Accept(const std::string& mention_id,
                                      const AcceptRequest& request) {
  std::unique_lock lock(mutex_);
  const ContextualMention& mention = FindPending(mention_id);
  if (request.edges.empty()) {
    throw InvalidArgumentError("accept needs at least one edge");
  }
  if (request.slate_version != version_) {
    throw ConflictError("slate version " +
                        std::to_string(request.slate_version) +
                        " is stale; current version is " +
                        std::to_string(version_));
  }
  if (!request.manual) {
    const auto& last = mentions_.at(mention_id).last_slate;
    if (!last || last->ontology_version != version_) {
      throw ConflictError("no current slate for '" + mention_id +
                          "'; fetch candidates first");
    }
    EdgeSet on_slate;
    for (const auto& e : last->edges) on_slate.insert(e.edge);
    for (const auto& e : request.edges) {
      if (!on_slate.contains(e)) {
        throw InvalidArgumentError("edge " + ToString(e) +
                                   " is not on the current slate");
      }
    }
  }

  Decision d;
  d.version = version_ + 1;
  d.mention_id = mention_id;
  d.placed.id = request.concept_id.value_or("new:" + mention_id);
  d.placed.label = request.label.value_or(mention.mention);
  // Deduplicate while keeping request order.
  EdgeSet seen;
  for (const auto& e : request.edges) {
    if (seen.insert(e).second) d.edges.push_back(e);
  }
  d.manual = request.manual;
  d.who = request.who;
  d.timestamp = UtcNow();

  auto next = std::make_shared<const Ontology>(
      pipeline_->ontology().InsertPlacement(d.placed, d.edges));
  Persist(d, *next);

  version_ = d.version;
  pipeline_ = std::make_shared<const PlacementPipeline>(next, resources_);
  std::erase(queue_, mention_id);
  mentions_.at(mention_id).last_slate.reset();
  log_.push_back(std::move(d));
  return version_;
}

void CurationSession::Persist(const Decision& d, const Ontology& next) {
  if (options_.state_dir.empty()) return;
  const fs::path dir(options_.state_dir);
  {
    std::ofstream log(dir / "log.jsonl", std::ios::app | std::ios::binary);
    log << d.ToJson().dump() << '\n';
    log.flush();
    if (!log) throw Error("io", "cannot append to " + (dir / "log.jsonl").string());
  }
  if (options_.snapshot_every > 0 && d.version % options_.snapshot_every == 0) {
    next.ExportDirectory(
        (dir / "snapshots" / ("v" + std::to_string(d.version))).string());
  }
}

void CurationSession::Skip(const std::string& mention_id) {
  std::unique_lock lock(mutex_);
  FindPending(mention_id);
  std::erase(queue_, mention_id);
  queue_.push_back(mention_id);
}

std::vector<Decision> CurationSession::Log() const {
  std::shared_lock lock(mutex_);
  return log_;
}

Ontology CurationSession::Replay(const Ontology& base,
                                 const std::vector<Decision>& log) {
  Ontology current = base;
  std::uint64_t expected = 1;
  for (const auto& d : log) {
    if (d.version != expected++) {
      throw InvalidArgumentError("decision log is not contiguous at version " +
                                 std::to_string(d.version));
    }
    current = current.InsertPlacement(d.placed, d.edges);
  }
  return current;
}

struct PlacementServer::Impl {
  Defaults defaults;
  httplib::Server server;
  std::thread thread;
  std::shared_mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<CurationSession>> sessions;

  std::shared_ptr<CurationSession> Session(const std::string& id) {
    std::shared_lock lock(sessions_mutex);
    const auto it = sessions.find(id);
    if (it == sessions.end()) {
      throw NotFoundError("unknown session '" + id + "'");
    }
    return it->second;
  }

  static int StatusFor(const Error& e) {
    if (e.code() == "not_found") return 404;
    if (e.code() == "conflict") return 409;
    if (e.code() == "transport_error" || e.code() == "protocol_error") return 502;
    if (e.code() == "io") return 500;
    return 400;
  }

  template <typename F>
  static httplib::Server::Handler Wrap(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = f(req);
        res.status = 200;
      } catch (const Error& e) {
        res.status = StatusFor(e);
        body = json{{"error", e.code()}, {"message", e.what()}};
      } catch (const json::exception& e) {
        res.status = 400;
        body = json{{"error", "invalid_argument"}, {"message", e.what()}};
      } catch (const std::exception& e) {
        res.status = 500;
        body = json{{"error", "internal"}, {"message", e.what()}};
      }
      res.set_content(body.dump(), "application/json");
    };
  }

  static std::size_t ParseK(const std::string& text) {
    std::size_t k = 0;
    const auto [end, ec] =
        std::from_chars(text.data(), text.data() + text.size(), k);
    if (ec != std::errc() || end != text.data() + text.size()) {
      throw InvalidArgumentError("k must be a positive integer");
    }
    return k;
  }

  void Routes() {
    server.Get(R"(/sessions/([^/]+)/mentions)", Wrap([this](const auto& req) {
      auto s = Session(req.matches[1]);
      json mentions = json::array();
      for (const auto& m : s->Pending()) mentions.push_back(MentionToJson(m));
      return json{{"session", s->id()},
                  {"version", s->version()},
                  {"mentions", std::move(mentions)}};
    }));

    server.Get(R"(/sessions/([^/]+)/mentions/([^/]+)/candidates)",
               Wrap([this](const httplib::Request& req) {
      auto s = Session(req.matches[1]);
      const std::size_t k =
          req.has_param("k") ? ParseK(req.get_param_value("k")) : defaults.k;
      const SearchMethod method =
          req.has_param("method")
              ? SearchMethodFromString(req.get_param_value("method"))
              : defaults.method;
      const CandidateSlate slate = s->GetCandidates(req.matches[2], k, method);
      json out = SlateToJson(slate);
      // Display texts for both edge ends, so clients need no ontology copy.
      const auto o = s->ontology();
      json labels = json::object();
      for (const auto& e : slate.edges) {
        labels[e.edge.parent] = o->text_of(e.edge.parent);
        labels[e.edge.child] = o->text_of(e.edge.child);
      }
      out["labels"] = std::move(labels);
      return out;
    }));

    server.Post(R"(/sessions/([^/]+)/mentions/([^/]+)/accept)",
                Wrap([this](const httplib::Request& req) {
      auto s = Session(req.matches[1]);
      const json body = json::parse(req.body);
      AcceptRequest request;
      request.edges = EdgesFromJson(body.at("edges"));
      request.slate_version = body.at("slate_version").get<std::uint64_t>();
      request.manual = body.value("manual", false);
      request.who = body.value("who", std::string("anonymous"));
      if (body.contains("concept_id")) {
        request.concept_id = body.at("concept_id").get<std::string>();
      }
      if (body.contains("label")) {
        request.label = body.at("label").get<std::string>();
      }
      const std::uint64_t v = s->Accept(req.matches[2], request);
      return json{{"version", v}, {"log_size", s->Log().size()}};
    }));

    server.Post(R"(/sessions/([^/]+)/mentions/([^/]+)/skip)",
                Wrap([this](const httplib::Request& req) {
      auto s = Session(req.matches[1]);
      s->Skip(req.matches[2]);
      json pending = json::array();
      for (const auto& m : s->Pending()) pending.push_back(m.id);
      return json{{"ok", true}, {"pending", std::move(pending)}};
    }));

    server.Get(R"(/sessions/([^/]+)/ontology/version)",
               Wrap([this](const httplib::Request& req) {
      auto s = Session(req.matches[1]);
      const auto o = s->ontology();
      return json{{"version", s->version()},
                  {"concepts", o->num_concepts()},
                  {"subsumptions", o->num_subsumptions()}};
    }));

    server.Get(R"(/sessions/([^/]+)/log)",
               Wrap([this](const httplib::Request& req) {
      auto s = Session(req.matches[1]);
      json decisions = json::array();
      for (const auto& d : s->Log()) decisions.push_back(d.ToJson());
      return json{{"decisions", std::move(decisions)}};
    }));
  }
};

PlacementServer::PlacementServer() : PlacementServer(Defaults{}) {}

PlacementServer::PlacementServer(Defaults defaults)
    : impl_(std::make_unique<Impl>()) {
  impl_->defaults = defaults;
  impl_->Routes();
}

PlacementServer::~PlacementServer() { Stop(); }

void PlacementServer::AddSession(std::shared_ptr<CurationSession> session) {
  std::unique_lock lock(impl_->sessions_mutex);
  const std::string id = session->id();
  if (!impl_->sessions.emplace(id, std::move(session)).second) {
    throw ConflictError("session '" + id + "' already exists");
  }
}

void PlacementServer::Start(const std::string& host, int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ <= 0) {
    throw TransportError("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void PlacementServer::Serve(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw TransportError("cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = port;
  impl_->server.listen_after_bind();
}

void PlacementServer::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ontoplace
