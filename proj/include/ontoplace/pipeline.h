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

#ifndef ONTOPLACE_PIPELINE_H_
#define ONTOPLACE_PIPELINE_H_

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>

#include "ontoplace/candidates.h"
#include "ontoplace/embedding.h"
#include "ontoplace/embedding_provider.h"
#include "ontoplace/lexical_index.h"
#include "ontoplace/ontology.h"

namespace ontoplace {

// Encoders, tokenizer and embedding caches shared by every ontology version
// a pipeline is built for. Providers left null disable their methods.
struct PipelineResources {
  Tokenizer tokenizer = Tokenizer::Whitespace();
  double idf_log_base = 0.0;
  std::shared_ptr<EmbeddingProvider> concept_provider;
  std::shared_ptr<EmbeddingProvider> mention_provider;
  std::shared_ptr<EmbeddingProvider> edge_provider;
  EmbeddingStore concept_store;
  EmbeddingStore mention_store;
  EmbeddingStore edge_store;
  SerializationOptions serialization;
  CandidateOptions candidate_options;
  EmbedOptions embed_options;
};

// Candidate generation for one immutable ontology version. Index, scorers
// and generators are built on first use per method; thread-safe.
class PlacementPipeline {
 public:
  PlacementPipeline(std::shared_ptr<const Ontology> ontology,
                    std::shared_ptr<PipelineResources> resources,
                    std::optional<LexicalIndex> prebuilt_index = std::nullopt);

  const Ontology& ontology() const { return *ontology_; }
  std::shared_ptr<const Ontology> shared_ontology() const { return ontology_; }

  const CandidateGenerator& Generator(SearchMethod method) const;
  const LexicalIndex& Index() const;

  CandidateSlate Generate(const ContextualMention& m, std::size_t k,
                          SearchMethod method) const;

 private:
  std::shared_ptr<const Ontology> ontology_;
  std::shared_ptr<PipelineResources> resources_;

  mutable std::mutex mutex_;
  mutable std::optional<LexicalIndex> index_;
  mutable std::unique_ptr<CachingEmbedder> concept_embedder_;
  mutable std::unique_ptr<CachingEmbedder> mention_embedder_;
  mutable std::unique_ptr<CachingEmbedder> edge_embedder_;
  mutable std::unique_ptr<EdgeScorer> lexical_scorer_;
  mutable std::unique_ptr<EdgeScorer> fixed_scorer_;
  mutable std::unique_ptr<EdgeScorer> biencoder_scorer_;
  mutable std::unique_ptr<CandidateGenerator> generators_[3];
};

}  // namespace ontoplace

#endif  // ONTOPLACE_PIPELINE_H_
