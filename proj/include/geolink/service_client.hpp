// Copyright 2026 The Geolink Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GEOLINK_SERVICE_CLIENT_HPP_
#define GEOLINK_SERVICE_CLIENT_HPP_

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "geolink/embedding.hpp"

namespace geolink {

// Environment variable consulted when a service provider has no endpoint.
inline constexpr const char* kEndpointEnvVar = "GEOLINK_EMBED_ENDPOINT";

struct ServiceClientConfig {
  // "unix:<socket path>" or "exec:<shell command>" (the command speaks the
  // protocol on its stdin/stdout).
  std::string endpoint;
  std::string tag = "service";
  int pool_size = 1;
  std::size_t max_batch = 256;
  // 0 = learn the width from a probe request at construction.
  int dimension = 0;
};

// Client for the newline-delimited JSON embedding protocol:
//   request  {"id": int, "texts": [str, ...]}
//   response {"id": int, "vectors": [[float, ...], ...], "dim": int}
//   error    {"id": int, "error": str}
// Each pooled connection carries one request at a time; concurrent callers
// spread over the pool. Returned vectors are re-normalized.
class ServiceEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit ServiceEmbeddingProvider(ServiceClientConfig config);
  ~ServiceEmbeddingProvider() override;

  ServiceEmbeddingProvider(const ServiceEmbeddingProvider&) = delete;
  ServiceEmbeddingProvider& operator=(const ServiceEmbeddingProvider&) = delete;

  int dimension() const override { return dimension_; }
  const std::string& tag() const override { return config_.tag; }
  std::vector<Embedding> embed_batch(
      std::span<const std::string> texts) const override;

 private:
  class Connection;

  std::vector<Embedding> request(Connection& conn,
                                 std::span<const std::string> texts,
                                 std::size_t offset) const;

  ServiceClientConfig config_;
  int dimension_ = 0;
  std::vector<std::unique_ptr<Connection>> pool_;
  mutable std::atomic<std::uint64_t> next_id_{1};
  mutable std::atomic<std::size_t> next_conn_{0};
};

// Builds a provider from a spec string:
//   hash[:dim=<D>,seed=<S>]      deterministic n-gram test embedder
//   file:<path>                  VectorFileStore
//   service[:<endpoint>]         ServiceEmbeddingProvider; endpoint defaults
//                                to $GEOLINK_EMBED_ENDPOINT
std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec);

}  // namespace geolink

#endif  // GEOLINK_SERVICE_CLIENT_HPP_
