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

// Encoders live outside the process. A provider turns texts into vectors;
// CachingEmbedder sits in front of it and memoizes into an EmbeddingStore.

#ifndef ONTOPLACE_EMBEDDING_PROVIDER_H_
#define ONTOPLACE_EMBEDDING_PROVIDER_H_

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "ontoplace/embedding.h"

namespace ontoplace {

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual const std::string& model() const = 0;
  // One vector per text, in order. Implementations may be called from
  // several threads at once.
  virtual std::vector<EmbeddingVector> Embed(
      const std::vector<std::string>& texts) = 0;
};

// Wire contract: {"model", "texts":[..]} -> {"dim", "vectors":[[..],..]}.
nlohmann::json MakeEmbedRequest(const std::string& model,
                                const std::vector<std::string>& texts);
// Validates count and dimension against the request.
std::vector<EmbeddingVector> ParseEmbedResponse(const nlohmann::json& response,
                                                std::size_t expected_count);

struct EmbeddingProviderEndpoint {
  // http://host:port/path
  std::string locator;
  std::string model;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
};

// POSTs the wire contract to `endpoint.locator`, retrying transport failures.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(EmbeddingProviderEndpoint endpoint);

  const std::string& model() const override { return endpoint_.model; }
  std::vector<EmbeddingVector> Embed(
      const std::vector<std::string>& texts) override;

 private:
  EmbeddingProviderEndpoint endpoint_;
};

// Deterministic offline encoder: signed feature hashing of lowercased word
// unigrams, plus a constant bias component so no text maps to the zero
// vector. Meant for tests and dry runs of the pipeline.
class HashingEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HashingEmbeddingProvider(std::size_t dim = 64,
                                    std::string model = "hashing");

  const std::string& model() const override { return model_; }
  std::vector<EmbeddingVector> Embed(
      const std::vector<std::string>& texts) override;

  EmbeddingVector EmbedOne(const std::string& text) const;

 private:
  std::size_t dim_;
  std::string model_;
};

// Answers from a fixed store and fails on anything it does not hold.
class StoreEmbeddingProvider : public EmbeddingProvider {
 public:
  StoreEmbeddingProvider(EmbeddingStore store, std::string model = "store");

  const std::string& model() const override { return model_; }
  std::vector<EmbeddingVector> Embed(
      const std::vector<std::string>& texts) override;

 private:
  EmbeddingStore store_;
  std::string model_;
};

// Builds a provider from a spec string: "hashing[:dim]", "store:<path>" or
// an http(s) locator (model name taken from `model`).
std::unique_ptr<EmbeddingProvider> MakeEmbeddingProvider(
    const std::string& spec, const std::string& model = "default");

struct EmbedOptions {
  std::size_t batch_size = 64;
  // Concurrent provider requests for cache misses.
  std::size_t parallelism = 1;
};

class CachingEmbedder {
 public:
  CachingEmbedder(EmbeddingProvider& provider, EmbeddingStore& store,
                  EmbedOptions options = {});

  // One vector per text, order preserved; cache misses are fetched in
  // batches and written back before returning.
  std::vector<EmbeddingVector> EmbedTexts(const std::vector<std::string>& texts);
  EmbeddingVector EmbedText(const std::string& text);

  const EmbeddingStore& store() const { return store_; }
  EmbeddingStore& store() { return store_; }
  const std::string& model() const { return provider_.model(); }

 private:
  EmbeddingProvider& provider_;
  EmbeddingStore& store_;
  EmbedOptions options_;
};

}  // namespace ontoplace

#endif  // ONTOPLACE_EMBEDDING_PROVIDER_H_
