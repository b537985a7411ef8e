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

#include "ontoplace/records.h"

#include <string>

#include "ontoplace/error.h"

namespace ontoplace {

using nlohmann::json;

json ExpressionToJson(const ConceptExpression& e) {
  switch (e.kind) {
    case ConceptExpression::Kind::kAtom:
      return json{{"op", "atom"}, {"name", e.name}};
    case ConceptExpression::Kind::kSome:
      return json{{"op", "some"},
                  {"role", e.name},
                  {"filler", ExpressionToJson(e.operands.at(0))}};
    case ConceptExpression::Kind::kAnd: {
      json args = json::array();
      for (const auto& operand : e.operands) {
        args.push_back(ExpressionToJson(operand));
      }
      return json{{"op", "and"}, {"args", std::move(args)}};
    }
  }
  return {};
}

ConceptExpression ExpressionFromJson(const json& j) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "atom") {
    return ConceptExpression::Atom(j.at("name").get<std::string>());
  }
  if (op == "some") {
    return ConceptExpression::Some(j.at("role").get<std::string>(),
                                   ExpressionFromJson(j.at("filler")));
  }
  if (op == "and") {
    std::vector<ConceptExpression> args;
    for (const auto& a : j.at("args")) args.push_back(ExpressionFromJson(a));
    if (args.size() < 2) {
      throw InvalidArgumentError("'and' needs at least two operands");
    }
    return ConceptExpression::And(std::move(args));
  }
  throw InvalidArgumentError("unknown operator '" + op + "'");
}

json ConceptToJson(const Concept& c) {
  json j{{"id", c.id}, {"label", c.label}, {"complex", c.complex}};
  if (c.verbalization) j["verbalization"] = *c.verbalization;
  if (c.expression) j["operator_tree"] = ExpressionToJson(*c.expression);
  return j;
}

Concept ConceptFromJson(const json& j) {
  Concept c;
  c.id = j.at("id").get<std::string>();
  c.label = j.at("label").get<std::string>();
  c.complex = j.value("complex", false);
  if (auto it = j.find("verbalization"); it != j.end() && !it->is_null()) {
    c.verbalization = it->get<std::string>();
  }
  if (auto it = j.find("operator_tree"); it != j.end() && !it->is_null()) {
    c.expression = ExpressionFromJson(*it);
  }
  return c;
}

json EdgeToJson(const Edge& e) { return json::array({e.parent, e.child}); }

Edge EdgeFromJson(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw InvalidArgumentError("edge must be a [parent, child] pair");
  }
  Edge e{j[0].get<std::string>(), j[1].get<std::string>()};
  if (e.parent.empty() || e.child.empty()) {
    throw InvalidArgumentError("edge has an empty endpoint");
  }
  if (e.parent == kNullConcept) {
    throw InvalidArgumentError("edge parent cannot be NULL");
  }
  if (e.parent == e.child) {
    throw InvalidArgumentError("edge parent equals child '" + e.parent + "'");
  }
  return e;
}

json EdgesToJson(const std::vector<Edge>& edges) {
  json out = json::array();
  for (const auto& e : edges) out.push_back(EdgeToJson(e));
  return out;
}

std::vector<Edge> EdgesFromJson(const json& j) {
  std::vector<Edge> edges;
  for (const auto& e : j) edges.push_back(EdgeFromJson(e));
  return edges;
}

json MentionToJson(const ContextualMention& m) {
  json j{{"mention", m.mention},
         {"context_left", m.context_left},
         {"context_right", m.context_right}};
  if (!m.id.empty()) j["id"] = m.id;
  if (m.gold_edges) j["gold_edges"] = EdgesToJson(*m.gold_edges);
  return j;
}

ContextualMention MentionFromJson(const json& j) {
  ContextualMention m;
  m.mention = j.at("mention").get<std::string>();
  if (m.mention.empty()) throw InvalidArgumentError("empty mention");
  m.context_left = j.value("context_left", std::string());
  m.context_right = j.value("context_right", std::string());
  if (auto it = j.find("id"); it != j.end()) {
    m.id = it->is_string() ? it->get<std::string>() : it->dump();
  }
  if (auto it = j.find("gold_edges"); it != j.end() && !it->is_null()) {
    m.gold_edges = EdgesFromJson(*it);
  }
  return m;
}

}  // namespace ontoplace
