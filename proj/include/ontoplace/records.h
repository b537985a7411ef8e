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

// JSON shapes shared by the file formats, the CLI and the service API.

#ifndef ONTOPLACE_RECORDS_H_
#define ONTOPLACE_RECORDS_H_

#include <vector>

#include "json.hpp"
#include "ontoplace/mention.h"
#include "ontoplace/ontology.h"

namespace ontoplace {

// {"op":"atom","name":..} | {"op":"some","role":..,"filler":{..}} |
// {"op":"and","args":[..]}
nlohmann::json ExpressionToJson(const ConceptExpression& e);
ConceptExpression ExpressionFromJson(const nlohmann::json& j);

// {"id","label","complex"[,"verbalization"][,"operator_tree"]}
nlohmann::json ConceptToJson(const Concept& c);
Concept ConceptFromJson(const nlohmann::json& j);

// [parent, child-or-"NULL"]
nlohmann::json EdgeToJson(const Edge& e);
Edge EdgeFromJson(const nlohmann::json& j);
nlohmann::json EdgesToJson(const std::vector<Edge>& edges);
std::vector<Edge> EdgesFromJson(const nlohmann::json& j);

// {"mention","context_left","context_right"[,"id"][,"gold_edges"]}
nlohmann::json MentionToJson(const ContextualMention& m);
ContextualMention MentionFromJson(const nlohmann::json& j);

}  // namespace ontoplace

#endif  // ONTOPLACE_RECORDS_H_
