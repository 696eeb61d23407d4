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

#ifndef GEOLINK_LINKER_HPP_
#define GEOLINK_LINKER_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "geolink/embedding.hpp"
#include "geolink/index.hpp"

namespace geolink {

// `score` is the best cosine similarity found, reported even when the
// prediction is rejected. accepted == !triple.is_null().
struct Prediction {
  LocationTriple triple;
  double score = 0.0;
  bool accepted = false;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

// Dot product summed strictly in index order. Scores are defined by this
// summation so that exact ties are reproducible.
double sequential_dot(std::span<const double> a, std::span<const double> b);

// Best-scoring entry for a unit query vector: exact scan, first maximum in
// index order (lowest (country, admin1, city) wins ties).
struct ScanResult {
  std::size_t entry = 0;
  double score = 0.0;
};
ScanResult best_match(const LocationIndex& index, const Embedding& query);

// Accepts the argmax iff its score >= threshold; otherwise Null carrying the
// score. Throws InputError for threshold outside [0, 1], Error when index and
// provider disagree on tag or dimension.
Prediction link(const LocationIndex& index, const EmbeddingProvider& provider,
                const std::string& input, double threshold);

// Element-wise identical to calling link() on each input. A provider failure
// is rethrown as ProviderError whose offset is the input position.
std::vector<Prediction> link_batch(const LocationIndex& index,
                                   const EmbeddingProvider& provider,
                                   const std::vector<std::string>& inputs,
                                   double threshold, int threads = 1);

// "input_escaped\tcity\tadmin1\tcountry\tscore\taccepted"
void write_predictions(std::ostream& out, const std::vector<std::string>& inputs,
                       const std::vector<Prediction>& predictions);
struct PredictionRecord {
  std::string input;
  Prediction prediction;
};
std::vector<PredictionRecord> read_predictions(std::istream& in);

}  // namespace geolink

#endif  // GEOLINK_LINKER_HPP_
