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

#include "ontoplace/ontology.h"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <utility>

#include "ontoplace/error.h"
#include "ontoplace/records.h"

namespace ontoplace {
namespace {

const std::set<ConceptId>& EmptySet() {
  static const std::set<ConceptId> kEmpty;
  return kEmpty;
}

std::string RenderOperand(const ConceptExpression& e) {
  if (e.kind == ConceptExpression::Kind::kAtom) return e.name;
  return "(" + RenderExpression(e) + ")";
}

std::string StripCarriageReturn(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool IsBlank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

}  // namespace

ConceptExpression ConceptExpression::Atom(std::string label) {
  return {Kind::kAtom, std::move(label), {}};
}

ConceptExpression ConceptExpression::Some(std::string role,
                                          ConceptExpression filler) {
  ConceptExpression e{Kind::kSome, std::move(role), {}};
  e.operands.push_back(std::move(filler));
  return e;
}

ConceptExpression ConceptExpression::And(
    std::vector<ConceptExpression> conjuncts) {
  return {Kind::kAnd, "", std::move(conjuncts)};
}

std::string RenderExpression(const ConceptExpression& e) {
  switch (e.kind) {
    case ConceptExpression::Kind::kAtom:
      return e.name;
    case ConceptExpression::Kind::kSome:
      if (e.operands.size() != 1) {
        throw InvalidArgumentError("existential restriction on '" + e.name +
                                   "' needs exactly one filler");
      }
      return e.name + " some " + RenderOperand(e.operands.front());
    case ConceptExpression::Kind::kAnd: {
      if (e.operands.size() < 2) {
        throw InvalidArgumentError("conjunction needs at least two operands");
      }
      std::string out;
      for (const auto& operand : e.operands) {
        if (!out.empty()) out += " and ";
        out += RenderExpression(operand);
      }
      return out;
    }
  }
  return {};
}

std::string Verbalize(const Concept& c) {
  if (!c.complex) return c.label;
  if (c.verbalization) return *c.verbalization;
  if (c.expression) return RenderExpression(*c.expression);
  throw InvalidArgumentError("complex concept '" + c.id +
                             "' has neither a verbalization nor an expression");
}

bool EdgeLess(const Edge& a, const Edge& b) {
  if (a.parent != b.parent) return a.parent < b.parent;
  const bool a_null = a.is_leaf();
  const bool b_null = b.is_leaf();
  if (a_null != b_null) return b_null;
  return a.child < b.child;
}

std::string ToString(const Edge& edge) {
  return edge.parent + " -> " + edge.child;
}

void Ontology::CheckConcept(const Concept& c) {
  if (c.id.empty()) throw InvalidArgumentError("empty concept id");
  if (c.id == kNullConcept) {
    throw InvalidArgumentError("concept id \"NULL\" is reserved");
  }
  if (c.label.empty()) {
    throw InvalidArgumentError("concept '" + c.id + "' has an empty label");
  }
  if (c.complex && !c.verbalization && !c.expression) {
    throw InvalidArgumentError(
        "complex concept '" + c.id +
        "' has neither a verbalization nor an operator tree");
  }
}

void Ontology::AddSubsumption(const ConceptId& parent, const ConceptId& child) {
  if (parent == child) {
    throw InvalidArgumentError("self-loop on '" + parent + "'");
  }
  if (!contains(parent)) {
    throw NotFoundError("dangling concept id '" + parent + "'");
  }
  if (!contains(child)) {
    throw NotFoundError("dangling concept id '" + child + "'");
  }
  if (children_[parent].insert(child).second) {
    parents_[child].insert(parent);
    ++num_subsumptions_;
  }
}

Ontology Ontology::FromParts(
    std::vector<Concept> concepts,
    const std::vector<std::pair<ConceptId, ConceptId>>& subsumptions) {
  Ontology o;
  for (auto& c : concepts) {
    CheckConcept(c);
    ConceptId id = c.id;
    if (!o.concepts_.emplace(id, std::move(c)).second) {
      throw InvalidArgumentError("duplicate concept id '" + id + "'");
    }
  }
  for (const auto& [parent, child] : subsumptions) {
    o.AddSubsumption(parent, child);
  }
  return o;
}

Ontology Ontology::Load(std::istream& concept_stream,
                        std::istream& subsumption_stream, LoadReport* report) {
  Ontology o;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(concept_stream, line)) {
    ++line_no;
    line = StripCarriageReturn(std::move(line));
    if (IsBlank(line)) continue;
    Concept c;
    try {
      c = ConceptFromJson(nlohmann::json::parse(line));
      CheckConcept(c);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("concept record: ") + e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    ConceptId id = c.id;
    if (!o.concepts_.emplace(id, std::move(c)).second) {
      throw ParseError(line_no, "duplicate concept id '" + id + "'");
    }
  }

  line_no = 0;
  while (std::getline(subsumption_stream, line)) {
    ++line_no;
    line = StripCarriageReturn(std::move(line));
    if (IsBlank(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(line_no, "expected 'parent<TAB>child'");
    }
    ConceptId parent = line.substr(0, tab);
    ConceptId child = line.substr(tab + 1);
    if (parent.empty() || child.empty()) {
      throw ParseError(line_no, "empty concept id in subsumption");
    }
    try {
      o.AddSubsumption(parent, child);
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }

  if (report != nullptr) {
    report->concepts = o.num_concepts();
    report->subsumptions = o.num_subsumptions();
    report->complex_concepts = 0;
    for (const auto& [id, c] : o.concepts_) {
      if (c.complex) ++report->complex_concepts;
    }
    report->warnings = o.Validate();
  }
  return o;
}

Ontology Ontology::LoadFiles(const std::string& concept_path,
                             const std::string& subsumption_path,
                             LoadReport* report) {
  std::ifstream concepts(concept_path);
  if (!concepts) throw NotFoundError("cannot open " + concept_path);
  std::ifstream subsumptions(subsumption_path);
  if (!subsumptions) throw NotFoundError("cannot open " + subsumption_path);
  return Load(concepts, subsumptions, report);
}

Ontology Ontology::LoadDirectory(const std::string& directory,
                                 LoadReport* report) {
  const std::filesystem::path dir(directory);
  return LoadFiles((dir / "concepts.jsonl").string(),
                   (dir / "subsumptions.tsv").string(), report);
}

void Ontology::ExportConcepts(std::ostream& out) const {
  for (const auto& [id, c] : concepts_) {
    out << ConceptToJson(c).dump() << '\n';
  }
}

void Ontology::ExportSubsumptions(std::ostream& out) const {
  for (const auto& [parent, kids] : children_) {
    for (const auto& child : kids) out << parent << '\t' << child << '\n';
  }
}

void Ontology::ExportDirectory(const std::string& directory) const {
  const std::filesystem::path dir(directory);
  std::filesystem::create_directories(dir);
  std::ofstream concepts(dir / "concepts.jsonl", std::ios::binary);
  std::ofstream subsumptions(dir / "subsumptions.tsv", std::ios::binary);
  if (!concepts || !subsumptions) {
    throw InvalidArgumentError("cannot write to " + directory);
  }
  ExportConcepts(concepts);
  ExportSubsumptions(subsumptions);
}

bool Ontology::contains(std::string_view id) const {
  return concepts_.find(id) != concepts_.end();
}

const Concept& Ontology::concept_of(std::string_view id) const {
  auto it = concepts_.find(id);
  if (it == concepts_.end()) {
    throw NotFoundError("unknown concept id '" + std::string(id) + "'");
  }
  return it->second;
}

const std::set<ConceptId>& Ontology::parents(std::string_view id) const {
  if (!contains(id)) {
    throw NotFoundError("unknown concept id '" + std::string(id) + "'");
  }
  auto it = parents_.find(id);
  return it == parents_.end() ? EmptySet() : it->second;
}

const std::set<ConceptId>& Ontology::children(std::string_view id) const {
  if (!contains(id)) {
    throw NotFoundError("unknown concept id '" + std::string(id) + "'");
  }
  auto it = children_.find(id);
  return it == children_.end() ? EmptySet() : it->second;
}

bool Ontology::is_leaf(std::string_view id) const {
  return children(id).empty();
}

std::string Ontology::text_of(std::string_view id) const {
  if (id == kNullConcept) return std::string(kNullConcept);
  return Verbalize(concept_of(id));
}

void Ontology::ForEachEdge(
    const std::function<void(const Edge&)>& visit) const {
  std::set<ConceptId> targets;
  for (const auto& [id, c] : concepts_) {
    auto it = children_.find(id);
    if (it == children_.end() || it->second.empty()) {
      visit(Edge{id, std::string(kNullConcept)});
      continue;
    }
    targets.clear();
    for (const auto& child : it->second) {
      targets.insert(child);
      auto grand = children_.find(child);
      if (grand == children_.end()) continue;
      for (const auto& d : grand->second) {
        // A two-cycle would produce a self edge.
        if (d != id) targets.insert(d);
      }
    }
    for (const auto& t : targets) visit(Edge{id, t});
  }
}

std::vector<Edge> Ontology::EnumerateEdgeSpace() const {
  std::vector<Edge> edges;
  ForEachEdge([&edges](const Edge& e) { edges.push_back(e); });
  return edges;
}

std::vector<std::string> Ontology::Validate() const {
  std::vector<std::string> warnings;
  for (const auto& [id, c] : concepts_) {
    if (c.complex && parents_.count(id) > 0 && !parents_.at(id).empty()) {
      warnings.push_back("complex concept '" + id + "' appears as a child");
    }
  }

  // Iterative three-colour DFS; reports the first back edge per root.
  enum class Colour { kWhite, kGrey, kBlack };
  std::map<std::string_view, Colour> colour;
  for (const auto& [id, c] : concepts_) colour[id] = Colour::kWhite;
  std::size_t cycles = 0;
  for (const auto& [root, c] : concepts_) {
    if (colour[root] != Colour::kWhite) continue;
    std::vector<std::pair<std::string_view, std::set<ConceptId>::const_iterator>>
        stack;
    colour[root] = Colour::kGrey;
    stack.emplace_back(root, children(root).begin());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& kids = children(node);
      if (next == kids.end()) {
        colour[node] = Colour::kBlack;
        stack.pop_back();
        continue;
      }
      const ConceptId& child = *next++;
      if (colour[child] == Colour::kGrey) {
        ++cycles;
        warnings.push_back("cycle through '" + std::string(node) + "' -> '" +
                           child + "'");
      } else if (colour[child] == Colour::kWhite) {
        colour[child] = Colour::kGrey;
        stack.emplace_back(child, children(child).begin());
      }
    }
  }
  return warnings;
}

Ontology Ontology::InsertPlacement(const Concept& new_concept,
                                   const std::vector<Edge>& edges) const {
  CheckConcept(new_concept);
  if (contains(new_concept.id)) {
    throw InvalidArgumentError("concept id '" + new_concept.id +
                               "' already exists");
  }
  for (const auto& e : edges) {
    if (e.parent == kNullConcept || !contains(e.parent)) {
      throw NotFoundError("dangling edge parent '" + e.parent + "'");
    }
    if (!e.is_leaf() && !contains(e.child)) {
      throw NotFoundError("dangling edge child '" + e.child + "'");
    }
  }
  Ontology next = *this;
  next.concepts_.emplace(new_concept.id, new_concept);
  for (const auto& e : edges) {
    next.AddSubsumption(e.parent, new_concept.id);
    if (!e.is_leaf()) next.AddSubsumption(new_concept.id, e.child);
  }
  return next;
}

}  // namespace ontoplace
