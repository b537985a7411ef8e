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

#ifndef ONTOPLACE_INTERNAL_HTTP_JSON_H_
#define ONTOPLACE_INTERNAL_HTTP_JSON_H_

#include <chrono>
#include <string>

#include "json.hpp"

namespace ontoplace::internal {

struct Locator {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

// Splits "http://host:port/path". Throws InvalidArgumentError.
Locator ParseLocator(const std::string& locator);

// POSTs `body` as JSON and parses the JSON answer. Connection failures and
// 5xx answers are retried `retries` times before a TransportError; other
// non-200 answers and unparseable bodies raise ProtocolError.
nlohmann::json PostJson(const std::string& locator, const nlohmann::json& body,
                        std::chrono::milliseconds timeout, int retries);

}  // namespace ontoplace::internal

#endif  // ONTOPLACE_INTERNAL_HTTP_JSON_H_
