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

#include "geolink/embedding.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "geolink/text.hpp"

namespace geolink {
namespace {

constexpr int kMaxGram = 3;
constexpr std::string_view kEmptySentinel = "\x01<empty>";

std::uint64_t mix_seed(std::uint64_t seed) {
  // splitmix64 finalizer.
  seed += 0x9e3779b97f4a7c15ULL;
  seed = (seed ^ (seed >> 30)) * 0xbf58476d1ce4e5b9ULL;
  seed = (seed ^ (seed >> 27)) * 0x94d049bb133111ebULL;
  return seed ^ (seed >> 31);
}

void add_feature(std::string_view feature, std::uint64_t basis, Embedding& v) {
  const std::uint64_t h = fnv1a64(feature, basis);
  const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(v.size()));
  v[bucket] += (h >> 63) != 0 ? -1.0 : 1.0;
}

}  // namespace

Embedding test_embed(std::string_view text, int dimension, std::uint64_t seed) {
  if (dimension < 8) throw Error("test embedder needs dimension >= 8");
  const std::uint64_t basis = 0xcbf29ce484222325ULL ^ mix_seed(seed);
  Embedding v = Embedding::Zero(dimension);

  const std::u32string cps = decode_utf8(text);
  std::string gram;
  for (int n = 1; n <= kMaxGram; ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      gram.assign(1, static_cast<char>('0' + n));
      append_utf8(std::u32string_view(cps).substr(i, n), gram);
      add_feature(gram, basis, v);
    }
  }
  // Collisions can cancel every feature; fall back to the sentinel so the
  // result is always a unit vector.
  if (v.isZero(0.0)) add_feature(kEmptySentinel, basis, v);
  normalize_in_place(v);
  return v;
}

HashingEmbedder::HashingEmbedder(int dimension, std::uint64_t seed)
    : dimension_(dimension),
      seed_(seed),
      tag_("hash-ngram-d" + std::to_string(dimension) + "-s" +
           std::to_string(seed)) {
  if (dimension < 8) throw InputError("test embedder needs dimension >= 8");
}

std::vector<Embedding> HashingEmbedder::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(test_embed(t, dimension_, seed_));
  return out;
}

VectorFileStore::VectorFileStore(int dimension, std::string tag)
    : dimension_(dimension), tag_(std::move(tag)) {
  if (dimension <= 0) throw InputError("vector store dimension must be positive");
  if (tag_.empty() || tag_.find_first_of(" \t\n") != std::string::npos) {
    throw InputError("vector store tag must be a non-empty token");
  }
}

void VectorFileStore::insert(std::string text, Embedding vector) {
  if (vector.size() != dimension_) {
    throw InputError("vector for '" + text + "' has dimension " +
                     std::to_string(vector.size()) + ", store expects " +
                     std::to_string(dimension_));
  }
  if (!vector.allFinite() || vector.isZero(0.0)) {
    throw InputError("vector for '" + text + "' is zero or non-finite");
  }
  vectors_.insert_or_assign(std::move(text), std::move(vector));
}

VectorFileStore VectorFileStore::load(std::istream& in) {
  if (!in.good()) throw InputError("cannot read vector store");
  std::string line;
  if (!std::getline(in, line)) throw InputError("vector store: empty file");
  int dimension = 0;
  std::string tag;
  for (auto token : split(chomp(line), ' ')) {
    if (token.starts_with("dimension=")) {
      dimension = static_cast<int>(parse_int(token.substr(10)));
    } else if (token.starts_with("provider=")) {
      tag = std::string(token.substr(9));
    }
  }
  if (dimension <= 0 || tag.empty()) {
    throw InputError("vector store: header must be 'dimension=<D> provider=<tag>'");
  }
  VectorFileStore store(dimension, tag);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = chomp(line);
    if (view.empty()) continue;
    const auto tab = view.rfind('\t');
    if (tab == std::string_view::npos) {
      throw InputError("vector store line " + std::to_string(line_no) +
                       ": missing tab");
    }
    auto values = split(view.substr(tab + 1), ' ');
    if (values.size() != static_cast<std::size_t>(dimension)) {
      throw InputError("vector store line " + std::to_string(line_no) +
                       ": expected " + std::to_string(dimension) + " values");
    }
    Embedding v(dimension);
    for (int i = 0; i < dimension; ++i) v[i] = parse_double(values[i]);
    store.insert(unescape_field(view.substr(0, tab)), std::move(v));
  }
  if (in.bad()) throw InputError("read error in vector store");
  return store;
}

void VectorFileStore::save(std::ostream& out) const {
  out << "dimension=" << dimension_ << " provider=" << tag_ << '\n';
  std::vector<const std::string*> keys;
  keys.reserve(vectors_.size());
  for (const auto& [text, v] : vectors_) keys.push_back(&text);
  std::sort(keys.begin(), keys.end(),
            [](const auto* a, const auto* b) { return *a < *b; });
  for (const auto* key : keys) {
    const Embedding& v = vectors_.at(*key);
    out << escape_field(*key) << '\t';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i > 0) out << ' ';
      out << format_double(v[i]);
    }
    out << '\n';
  }
}

std::vector<Embedding> VectorFileStore::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto it = vectors_.find(texts[i]);
    if (it == vectors_.end()) {
      throw ProviderError("no stored vector for text '" + texts[i] + "'",
                          texts[i], i);
    }
    out.push_back(normalized(it->second));
  }
  return out;
}

VectorFileStore capture_vectors(const EmbeddingProvider& provider,
                                std::span<const std::string> texts) {
  VectorFileStore store(provider.dimension(), provider.tag());
  auto vectors = provider.embed_batch(texts);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    store.insert(texts[i], std::move(vectors[i]));
  }
  return store;
}

}  // namespace geolink
