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

#ifndef ONTOPLACE_MENTION_H_
#define ONTOPLACE_MENTION_H_

#include <optional>
#include <string>
#include <vector>

#include "ontoplace/ontology.h"

namespace ontoplace {

// A surface mention of a (possibly new) concept with its textual window.
// Empty contexts stand for the context-free setting.
struct ContextualMention {
  std::string id;
  std::string mention;
  std::string context_left;
  std::string context_right;
  std::optional<std::vector<Edge>> gold_edges;
};

}  // namespace ontoplace

#endif  // ONTOPLACE_MENTION_H_
