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

#ifndef GEOLINK_EMBEDDING_HPP_
#define GEOLINK_EMBEDDING_HPP_

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "geolink/error.hpp"

namespace geolink {

template <typename Scalar>
using EmbeddingT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Embedding = EmbeddingT<double>;

// Cosine similarity of two equal-length, non-zero vectors.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw Error("cosine_similarity: dimension mismatch (" +
                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                ")");
  }
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) {
    throw Error("cosine_similarity: zero vector");
  }
  return a.dot(b) / (na * nb);
}

// Scales `v` to unit L2 norm. Throws on a zero or non-finite vector.
template <typename Derived>
void normalize_in_place(Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar n = v.norm();
  if (!(n > Scalar(0)) || !std::isfinite(n)) {
    throw Error("cannot normalize a zero or non-finite vector");
  }
  v /= n;
}

template <typename Derived>
EmbeddingT<typename Derived::Scalar> normalized(const Eigen::MatrixBase<Derived>& v) {
  EmbeddingT<typename Derived::Scalar> out = v;
  normalize_in_place(out);
  return out;
}

// Text -> unit vector. Implementations are deterministic for a fixed
// instance and safe to call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual int dimension() const = 0;
  virtual const std::string& tag() const = 0;

  // One unit-norm vector per text, in order. Throws ProviderError naming the
  // first text that could not be embedded.
  virtual std::vector<Embedding> embed_batch(
      std::span<const std::string> texts) const = 0;

  Embedding embed(const std::string& text) const {
    return std::move(embed_batch(std::span(&text, 1)).front());
  }
};

inline std::vector<Embedding> embed_batch(const EmbeddingProvider& provider,
                                          std::span<const std::string> texts) {
  return provider.embed_batch(texts);
}

// Deterministic character n-gram (n = 1..3) feature hashing into `dimension`
// signed buckets, L2-normalized. Text with no code points hashes a fixed
// sentinel feature instead. Requires dimension >= 8.
Embedding test_embed(std::string_view text, int dimension, std::uint64_t seed);

class HashingEmbedder final : public EmbeddingProvider {
 public:
  HashingEmbedder(int dimension, std::uint64_t seed);

  int dimension() const override { return dimension_; }
  const std::string& tag() const override { return tag_; }
  std::vector<Embedding> embed_batch(
      std::span<const std::string> texts) const override;

 private:
  int dimension_;
  std::uint64_t seed_;
  std::string tag_;
};

// Precomputed vectors keyed by exact text. Serialized as
//   dimension=<D> provider=<tag>
//   <escaped text>\t<f1> <f2> ... <fD>
class VectorFileStore final : public EmbeddingProvider {
 public:
  VectorFileStore(int dimension, std::string tag);

  static VectorFileStore load(std::istream& in);
  void save(std::ostream& out) const;

  // Stores `vector` as given; embed_batch normalizes on the way out.
  void insert(std::string text, Embedding vector);
  bool contains(const std::string& text) const {
    return vectors_.contains(text);
  }
  std::size_t size() const { return vectors_.size(); }

  int dimension() const override { return dimension_; }
  const std::string& tag() const override { return tag_; }
  std::vector<Embedding> embed_batch(
      std::span<const std::string> texts) const override;

 private:
  int dimension_;
  std::string tag_;
  std::unordered_map<std::string, Embedding> vectors_;
};

// Embeds `texts` with `provider` and records the results under the
// provider's tag, so later runs can replay them offline.
VectorFileStore capture_vectors(const EmbeddingProvider& provider,
                                std::span<const std::string> texts);

}  // namespace geolink

#endif  // GEOLINK_EMBEDDING_HPP_
