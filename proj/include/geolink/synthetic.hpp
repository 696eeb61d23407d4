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

#ifndef GEOLINK_SYNTHETIC_HPP_
#define GEOLINK_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "geolink/index.hpp"

namespace geolink {

// Knobs for a GeoNames-shaped toy world plus labeled user mentions.
struct SyntheticConfig {
  std::uint64_t seed = 2024;
  int countries = 8;
  int admin1_per_country = 3;
  int cities = 168;             // kept after population filtering
  int small_cities = 24;        // generated below the population cutoff
  int mentions = 2000;
  double noise_fraction = 0.0;  // mentions replaced by off-topic text
  double alias_fraction = 0.3;  // mentions using a location's informal alias
};

// File contents in GeoNames layouts, ready for parse_gazetteer.
struct SyntheticCorpus {
  std::string dump;
  std::string admin1_codes;
  std::string country_info;
  std::vector<LabeledMention> mentions;
  std::size_t noisy_mentions = 0;
};

// Mentions are casing, punctuation, separator, affix and typo corruptions of
// each location's names or its alias. Deterministic for a given config.
SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config);

}  // namespace geolink

#endif  // GEOLINK_SYNTHETIC_HPP_
