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

// In-process JSON endpoint for provider contract tests.

#ifndef ONTOPLACE_TESTS_MOCK_HTTP_H_
#define ONTOPLACE_TESTS_MOCK_HTTP_H_

#include <atomic>
#include <functional>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace ontoplace::testing {

class MockJsonServer {
 public:
  using Handler = std::function<nlohmann::json(const nlohmann::json&)>;

  // Answers POSTs on `path` with handler(body). A handler returning a
  // json object with "__status" sends that status with an empty body.
  MockJsonServer(const std::string& path, Handler handler) {
    server_.Post(path, [this, handler](const httplib::Request& req,
                                       httplib::Response& res) {
      ++calls_;
      const nlohmann::json reply = handler(nlohmann::json::parse(req.body));
      if (reply.is_object() && reply.contains("__status")) {
        res.status = reply.at("__status").get<int>();
        return;
      }
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockJsonServer() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }
  int calls() const { return calls_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0};
};

}  // namespace ontoplace::testing

#endif  // ONTOPLACE_TESTS_MOCK_HTTP_H_
