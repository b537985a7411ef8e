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

// Curation sessions: a working ontology that terminologists extend one
// accepted placement at a time, with optimistic concurrency on slates.
//
// Every accepted placement bumps the session version and appends to the
// decision log. Slates are stamped with the version they were computed
// against; accepting from an older slate is a conflict and forces a refetch.

#ifndef ONTOPLACE_SERVICE_H_
#define ONTOPLACE_SERVICE_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "ontoplace/candidates.h"
#include "ontoplace/mention.h"
#include "ontoplace/ontology.h"
#include "ontoplace/pipeline.h"

namespace ontoplace {

struct Decision {
  std::uint64_t version = 0;  // version produced by this decision
  std::string mention_id;
  Concept placed;
  std::vector<Edge> edges;
  bool manual = false;
  std::string who;
  std::string timestamp;  // UTC, ISO 8601

  nlohmann::json ToJson() const;
  static Decision FromJson(const nlohmann::json& j);
};

struct AcceptRequest {
  std::vector<Edge> edges;
  std::uint64_t slate_version = 0;
  // Allows edges outside the last slate.
  bool manual = false;
  std::string who = "anonymous";
  // Defaults: id "new:<mention id>", label = mention text.
  std::optional<ConceptId> concept_id;
  std::optional<std::string> label;
};

struct SessionOptions {
  // Empty: in-memory only. Otherwise base/, log.jsonl and snapshots/ live
  // here and an existing log is replayed on open.
  std::string state_dir;
  // Snapshot the working ontology every N accepted placements (0 = never).
  std::size_t snapshot_every = 10;
};

class CurationSession {
 public:
  CurationSession(std::string id, Ontology base,
                  std::vector<ContextualMention> mentions,
                  std::shared_ptr<PipelineResources> resources,
                  SessionOptions options = {});

  const std::string& id() const { return id_; }
  std::uint64_t version() const;
  std::shared_ptr<const Ontology> ontology() const;
  const Ontology& base() const { return *base_; }

  // Pending mentions in queue order.
  std::vector<ContextualMention> Pending() const;

  // Slate against the current version; records it as the mention's most
  // recent slate. Never changes the version.
  CandidateSlate GetCandidates(const std::string& mention_id, std::size_t k,
                               SearchMethod method);

  // Returns the new version. ConflictError when the slate is stale,
  // InvalidArgumentError when an edge is not on the last slate and the
  // request is not manual.
  std::uint64_t Accept(const std::string& mention_id,
                       const AcceptRequest& request);

  void Skip(const std::string& mention_id);

  std::vector<Decision> Log() const;

  // Applies `log` to `base` in order, checking version continuity.
  static Ontology Replay(const Ontology& base, const std::vector<Decision>& log);

 private:
  struct MentionState {
    ContextualMention mention;
    std::optional<CandidateSlate> last_slate;
  };

  const ContextualMention& FindPending(const std::string& mention_id) const;
  void Persist(const Decision& d, const Ontology& next);
  void Restore();

  std::string id_;
  std::shared_ptr<const Ontology> base_;
  std::shared_ptr<PipelineResources> resources_;
  SessionOptions options_;

  mutable std::shared_mutex mutex_;
  std::uint64_t version_ = 0;
  std::shared_ptr<const PlacementPipeline> pipeline_;
  std::deque<std::string> queue_;
  std::map<std::string, MentionState> mentions_;
  std::vector<Decision> log_;
};

// Routes, all JSON:
//   GET  /sessions/{id}/mentions
//   GET  /sessions/{id}/mentions/{mid}/candidates?k=&method=
//   POST /sessions/{id}/mentions/{mid}/accept   {edges, slate_version, ...}
//   POST /sessions/{id}/mentions/{mid}/skip
//   GET  /sessions/{id}/ontology/version
//   GET  /sessions/{id}/log
// Errors answer {"error": code, "message": ...} with 400/404/409/502.
class PlacementServer {
 public:
  struct Defaults {
    std::size_t k = 10;
    SearchMethod method = SearchMethod::kLexical;
  };

  PlacementServer();
  explicit PlacementServer(Defaults defaults);
  ~PlacementServer();

  void AddSession(std::shared_ptr<CurationSession> session);

  // Binds and serves until Stop(). Port 0 picks a free port; see port().
  void Start(const std::string& host, int port);
  // Blocking variant used by the CLI.
  void Serve(const std::string& host, int port);
  void Stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace ontoplace

#endif  // ONTOPLACE_SERVICE_H_
