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

#include "ontoplace/pipeline.h"

#include <utility>

#include "ontoplace/error.h"

namespace ontoplace {

PlacementPipeline::PlacementPipeline(std::shared_ptr<const Ontology> ontology,
                                     std::shared_ptr<PipelineResources> resources,
                                     std::optional<LexicalIndex> prebuilt_index)
    : ontology_(std::move(ontology)),
      resources_(std::move(resources)),
      index_(std::move(prebuilt_index)) {
  if (!ontology_ || !resources_) {
    throw InvalidArgumentError("pipeline needs an ontology and resources");
  }
}

const LexicalIndex& PlacementPipeline::Index() const {
  std::scoped_lock lock(mutex_);
  if (!index_) {
    index_ = LexicalIndex::Build(*ontology_, resources_->tokenizer,
                                 resources_->idf_log_base);
  }
  return *index_;
}

const CandidateGenerator& PlacementPipeline::Generator(
    SearchMethod method) const {
  const auto slot = static_cast<std::size_t>(method);
  {
    std::scoped_lock lock(mutex_);
    if (generators_[slot]) return *generators_[slot];
  }
  if (method == SearchMethod::kLexical) Index();

  std::scoped_lock lock(mutex_);
  if (generators_[slot]) return *generators_[slot];
  auto& r = *resources_;
  const EdgeScorer* scorer = nullptr;
  switch (method) {
    case SearchMethod::kLexical:
      lexical_scorer_ = std::make_unique<LexicalScorer>(*index_);
      scorer = lexical_scorer_.get();
      break;
    case SearchMethod::kFixedEmbedding:
      if (!r.concept_provider) {
        throw InvalidArgumentError("fixed-embedding search needs an embedding provider");
      }
      concept_embedder_ = std::make_unique<CachingEmbedder>(
          *r.concept_provider, r.concept_store, r.embed_options);
      fixed_scorer_ =
          std::make_unique<FixedEmbeddingScorer>(*ontology_, *concept_embedder_);
      scorer = fixed_scorer_.get();
      break;
    case SearchMethod::kEdgeBiEncoder:
      if (!r.mention_provider || !r.edge_provider) {
        throw InvalidArgumentError(
            "bi-encoder search needs mention and edge embedding providers");
      }
      mention_embedder_ = std::make_unique<CachingEmbedder>(
          *r.mention_provider, r.mention_store, r.embed_options);
      edge_embedder_ = std::make_unique<CachingEmbedder>(
          *r.edge_provider, r.edge_store, r.embed_options);
      biencoder_scorer_ = std::make_unique<BiEncoderScorer>(
          *ontology_, *mention_embedder_, *edge_embedder_, r.serialization);
      scorer = biencoder_scorer_.get();
      break;
  }
  generators_[slot] = std::make_unique<CandidateGenerator>(
      *ontology_, *scorer, r.candidate_options);
  return *generators_[slot];
}

CandidateSlate PlacementPipeline::Generate(const ContextualMention& m,
                                           std::size_t k,
                                           SearchMethod method) const {
  return Generator(method).Generate(m, k);
}

}  // namespace ontoplace
