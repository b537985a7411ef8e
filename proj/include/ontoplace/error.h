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

#ifndef ONTOPLACE_ERROR_H_
#define ONTOPLACE_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ontoplace {

// Base of every error thrown by the library. `code()` is a short stable tag
// used by the CLI and the service for machine-parseable error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Malformed input record. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("parse_error", line > 0 ? "line " + std::to_string(line) + ": " +
                                            message
                                      : message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message)
      : Error("not_found", message) {}
};

class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& message)
      : Error("invalid_argument", message) {}
};

// A remote endpoint answered with something that violates the wire contract.
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& message)
      : Error("protocol_error", message) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message)
      : Error("transport_error", message) {}
};

// Optimistic-concurrency failure: the caller acted on a stale version.
class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& message)
      : Error("conflict", message) {}
};

}  // namespace ontoplace

#endif  // ONTOPLACE_ERROR_H_
