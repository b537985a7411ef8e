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

#include "internal/http_json.h"

#include <thread>

#include "httplib.h"
#include "ontoplace/error.h"

namespace ontoplace::internal {

Locator ParseLocator(const std::string& locator) {
  const auto scheme_end = locator.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidArgumentError("endpoint locator needs a scheme: " + locator);
  }
  const std::string scheme = locator.substr(0, scheme_end);
  if (scheme != "http") {
    throw InvalidArgumentError("unsupported endpoint scheme '" + scheme + "'");
  }
  const auto path_start = locator.find('/', scheme_end + 3);
  Locator out;
  out.origin = locator.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : locator.substr(path_start);
  if (out.origin.size() <= scheme_end + 3) {
    throw InvalidArgumentError("endpoint locator has no host: " + locator);
  }
  return out;
}

nlohmann::json PostJson(const std::string& locator, const nlohmann::json& body,
                        std::chrono::milliseconds timeout, int retries) {
  if (timeout.count() <= 0) {
    throw InvalidArgumentError("endpoint timeout must be positive");
  }
  const Locator where = ParseLocator(locator);
  httplib::Client client(where.origin);
  const auto seconds = timeout.count() / 1000;
  const auto micros = (timeout.count() % 1000) * 1000;
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    }
    auto result = client.Post(where.path, payload, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 500) {
      last_error = "HTTP " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200) {
      throw ProtocolError(locator + " answered HTTP " +
                          std::to_string(result->status) + ": " +
                          result->body);
    }
    try {
      return nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(locator + " answered non-JSON: " + e.what());
    }
  }
  throw TransportError(locator + " unreachable after " +
                       std::to_string(retries + 1) + " attempts: " +
                       last_error);
}

}  // namespace ontoplace::internal
