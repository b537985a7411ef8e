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

#include "ontoplace/embedding_provider.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "internal/http_json.h"
#include "ontoplace/error.h"
#include "ontoplace/lexical_index.h"

namespace ontoplace {
namespace {

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

nlohmann::json MakeEmbedRequest(const std::string& model,
                                const std::vector<std::string>& texts) {
  return nlohmann::json{{"model", model}, {"texts", texts}};
}

std::vector<EmbeddingVector> ParseEmbedResponse(const nlohmann::json& response,
                                                std::size_t expected_count) {
  if (!response.is_object() || !response.contains("vectors")) {
    throw ProtocolError("embedding response lacks 'vectors'");
  }
  const auto& vectors = response.at("vectors");
  if (!vectors.is_array() || vectors.size() != expected_count) {
    throw ProtocolError("embedding response carries " +
                        std::to_string(vectors.is_array() ? vectors.size() : 0) +
                        " vectors for " + std::to_string(expected_count) +
                        " texts");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(expected_count);
  std::size_t dim = response.value("dim", std::size_t{0});
  for (const auto& v : vectors) {
    EmbeddingVector row;
    try {
      row = v.get<EmbeddingVector>();
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError("embedding vector is not a list of numbers");
    }
    if (dim == 0) dim = row.size();
    if (row.size() != dim || dim == 0) {
      throw ProtocolError("embedding dimension mismatch within batch");
    }
    out.push_back(std::move(row));
  }
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(EmbeddingProviderEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  if (endpoint_.timeout.count() <= 0) {
    throw InvalidArgumentError("embedding endpoint timeout must be positive");
  }
  internal::ParseLocator(endpoint_.locator);
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::Embed(
    const std::vector<std::string>& texts) {
  const auto response =
      internal::PostJson(endpoint_.locator, MakeEmbedRequest(model(), texts),
                         endpoint_.timeout, endpoint_.retries);
  return ParseEmbedResponse(response, texts.size());
}

HashingEmbeddingProvider::HashingEmbeddingProvider(std::size_t dim,
                                                   std::string model)
    : dim_(dim), model_(std::move(model)) {
  if (dim_ < 2) throw InvalidArgumentError("hashing dimension must be >= 2");
}

EmbeddingVector HashingEmbeddingProvider::EmbedOne(
    const std::string& text) const {
  EmbeddingVector v(dim_, 0.0);
  v[0] = 0.1;
  for (const auto& token : Tokenizer::Whitespace().Tokenize(text)) {
    const std::uint64_t h = Fnv1a(token);
    const std::size_t bucket = 1 + static_cast<std::size_t>(h % (dim_ - 1));
    v[bucket] += (h >> 63) != 0 ? -1.0 : 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<EmbeddingVector> HashingEmbeddingProvider::Embed(
    const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(EmbedOne(t));
  return out;
}

StoreEmbeddingProvider::StoreEmbeddingProvider(EmbeddingStore store,
                                               std::string model)
    : store_(std::move(store)), model_(std::move(model)) {}

std::vector<EmbeddingVector> StoreEmbeddingProvider::Embed(
    const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(store_.Get(t));
  return out;
}

std::unique_ptr<EmbeddingProvider> MakeEmbeddingProvider(
    const std::string& spec, const std::string& model) {
  if (spec == "hashing") return std::make_unique<HashingEmbeddingProvider>();
  if (spec.rfind("hashing:", 0) == 0) {
    return std::make_unique<HashingEmbeddingProvider>(
        std::stoul(spec.substr(8)));
  }
  if (spec.rfind("store:", 0) == 0) {
    return std::make_unique<StoreEmbeddingProvider>(
        EmbeddingStore::LoadFile(spec.substr(6)));
  }
  if (spec.rfind("http://", 0) == 0) {
    return std::make_unique<HttpEmbeddingProvider>(
        EmbeddingProviderEndpoint{spec, model});
  }
  throw InvalidArgumentError("unknown embedding provider '" + spec + "'");
}

CachingEmbedder::CachingEmbedder(EmbeddingProvider& provider,
                                 EmbeddingStore& store, EmbedOptions options)
    : provider_(provider), store_(store), options_(options) {
  if (options_.batch_size == 0) options_.batch_size = 1;
  if (options_.parallelism == 0) options_.parallelism = 1;
}

std::vector<EmbeddingVector> CachingEmbedder::EmbedTexts(
    const std::vector<std::string>& texts) {
  if (texts.empty()) throw InvalidArgumentError("no texts to embed");

  std::vector<std::string> misses;
  std::unordered_set<std::string_view> seen;
  for (const auto& t : texts) {
    if (!store_.Contains(t) && seen.insert(t).second) misses.push_back(t);
  }

  if (!misses.empty()) {
    std::vector<std::vector<std::string>> batches;
    for (std::size_t i = 0; i < misses.size(); i += options_.batch_size) {
      const auto end = std::min(misses.size(), i + options_.batch_size);
      batches.emplace_back(misses.begin() + static_cast<std::ptrdiff_t>(i),
                           misses.begin() + static_cast<std::ptrdiff_t>(end));
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t b = next++; b < batches.size(); b = next++) {
        try {
          auto vectors = provider_.Embed(batches[b]);
          if (vectors.size() != batches[b].size()) {
            throw ProtocolError(
                "provider returned " + std::to_string(vectors.size()) +
                " vectors for " + std::to_string(batches[b].size()) + " texts");
          }
          for (std::size_t i = 1; i < vectors.size(); ++i) {
            if (vectors[i].size() != vectors[0].size()) {
              throw ProtocolError("embedding dimension mismatch within batch");
            }
          }
          for (std::size_t i = 0; i < vectors.size(); ++i) {
            store_.Put(batches[b][i], std::move(vectors[i]));
          }
        } catch (...) {
          std::scoped_lock lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    const std::size_t threads = std::min(options_.parallelism, batches.size());
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(store_.Get(t));
  return out;
}

EmbeddingVector CachingEmbedder::EmbedText(const std::string& text) {
  if (auto hit = store_.Find(text)) return *std::move(hit);
  return EmbedTexts({text}).front();
}

}  // namespace ontoplace
