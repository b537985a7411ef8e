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

// Subsumption graph of an ontology: concepts, direct parent/child links,
// the enumerable space of insertion edges and rule-based verbalization of
// complex concepts.

#ifndef ONTOPLACE_ONTOLOGY_H_
#define ONTOPLACE_ONTOLOGY_H_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ontoplace {

using ConceptId = std::string;

// Reserved child id of a leaf edge. Never a concept id.
inline constexpr std::string_view kNullConcept = "NULL";

// Structured form of a complex concept built from existential restrictions
// and conjunctions, e.g. RoleGroup some (DueTo some Disease).
struct ConceptExpression {
  enum class Kind { kAtom, kSome, kAnd };

  Kind kind = Kind::kAtom;
  // Atom: the concept label. Some: the role name. And: unused.
  std::string name;
  // Some: exactly one filler. And: two or more conjuncts.
  std::vector<ConceptExpression> operands;

  static ConceptExpression Atom(std::string label);
  static ConceptExpression Some(std::string role, ConceptExpression filler);
  static ConceptExpression And(std::vector<ConceptExpression> conjuncts);

  bool operator==(const ConceptExpression&) const = default;
};

struct Concept {
  ConceptId id;
  std::string label;
  bool complex = false;
  std::optional<std::string> verbalization;
  std::optional<ConceptExpression> expression;

  bool operator==(const Concept&) const = default;
};

// Manchester-style rendering of an expression ("r some C", "A and B").
std::string RenderExpression(const ConceptExpression& expression);

// Text used for a concept everywhere a concept is shown to a model. Atomic
// concepts render as their label; complex concepts prefer the stored
// verbalization and fall back to the rendered expression.
std::string Verbalize(const Concept& concept_);

// Insertion slot <parent, child>. A leaf slot has child == "NULL".
struct Edge {
  ConceptId parent;
  ConceptId child;

  bool is_leaf() const { return child == kNullConcept; }

  bool operator==(const Edge&) const = default;
};

// Total order used for every deterministic listing of edges: parent, then
// child, with the NULL child after every real child.
bool EdgeLess(const Edge& a, const Edge& b);

struct EdgeOrder {
  bool operator()(const Edge& a, const Edge& b) const { return EdgeLess(a, b); }
};

using EdgeSet = std::set<Edge, EdgeOrder>;

std::string ToString(const Edge& edge);

struct LoadReport {
  std::size_t concepts = 0;
  std::size_t complex_concepts = 0;
  std::size_t subsumptions = 0;
  std::vector<std::string> warnings;
};

class Ontology {
 public:
  Ontology() = default;

  // Builds from in-memory parts. Throws InvalidArgumentError on duplicate or
  // reserved ids, empty labels, self-loops and dangling subsumption ends.
  static Ontology FromParts(std::vector<Concept> concepts,
                            const std::vector<std::pair<ConceptId, ConceptId>>&
                                subsumptions);

  // Line-delimited JSON concept records and `parent<TAB>child` lines.
  // Throws ParseError carrying the offending line number.
  static Ontology Load(std::istream& concept_stream,
                       std::istream& subsumption_stream,
                       LoadReport* report = nullptr);
  static Ontology LoadFiles(const std::string& concept_path,
                            const std::string& subsumption_path,
                            LoadReport* report = nullptr);
  // Directory holding concepts.jsonl and subsumptions.tsv.
  static Ontology LoadDirectory(const std::string& directory,
                                LoadReport* report = nullptr);

  // Canonical export: records sorted by id, pairs sorted by (parent, child).
  void ExportConcepts(std::ostream& out) const;
  void ExportSubsumptions(std::ostream& out) const;
  void ExportDirectory(const std::string& directory) const;

  std::size_t num_concepts() const { return concepts_.size(); }
  std::size_t num_subsumptions() const { return num_subsumptions_; }

  bool contains(std::string_view id) const;
  const Concept& concept_of(std::string_view id) const;
  const std::map<ConceptId, Concept, std::less<>>& concepts() const {
    return concepts_;
  }

  const std::set<ConceptId>& parents(std::string_view id) const;
  const std::set<ConceptId>& children(std::string_view id) const;
  bool is_leaf(std::string_view id) const;

  // Verbalized text of a concept id; "NULL" renders as itself.
  std::string text_of(std::string_view id) const;

  // Every direct pair, every two-hop pair G->D with G->X->D, and L->NULL for
  // every leaf L. Duplicate-free, in EdgeLess order.
  std::vector<Edge> EnumerateEdgeSpace() const;
  void ForEachEdge(const std::function<void(const Edge&)>& visit) const;

  // Non-fatal findings: complex concepts used as children, cycles.
  std::vector<std::string> Validate() const;

  // New ontology with `new_concept` placed into each edge: adds P->new and,
  // for non-leaf edges, new->C. Existing pairs are never removed.
  Ontology InsertPlacement(const Concept& new_concept,
                           const std::vector<Edge>& edges) const;

 private:
  void AddSubsumption(const ConceptId& parent, const ConceptId& child);
  static void CheckConcept(const Concept& c);

  std::map<ConceptId, Concept, std::less<>> concepts_;
  std::map<ConceptId, std::set<ConceptId>, std::less<>> parents_;
  std::map<ConceptId, std::set<ConceptId>, std::less<>> children_;
  std::size_t num_subsumptions_ = 0;
};

}  // namespace ontoplace

#endif  // ONTOPLACE_ONTOLOGY_H_
