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

#ifndef GEOLINK_EVAL_HPP_
#define GEOLINK_EVAL_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geolink/index.hpp"
#include "geolink/linker.hpp"

namespace geolink {

enum class Level { Country, Admin, City };
inline constexpr Level kAllLevels[] = {Level::Country, Level::Admin, Level::City};
std::string_view to_string(Level level);

struct MatchResult {
  bool country_correct = false;
  bool admin_correct = false;
  bool city_correct = false;

  bool at(Level level) const {
    switch (level) {
      case Level::Country: return country_correct;
      case Level::Admin: return admin_correct;
      case Level::City: return city_correct;
    }
    return false;
  }
};

// Cumulative string match: country; country + admin1; all three. An empty
// predicted component never matches a non-empty truth. Throws on Null truth.
MatchResult match_level(const LocationTriple& pred, const LocationTriple& truth);

struct Metrics {
  double accuracy = 0.0;
  double coverage = 0.0;
  std::optional<double> precision;  // undefined when nothing was predicted
  std::size_t n = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
};

Metrics compute_metrics(std::span<const Prediction> predictions,
                        std::span<const LocationTriple> truths, Level level);

struct CountryScore {
  double f1 = 0.0;
  std::size_t support = 0;  // truth examples
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// One-vs-rest country-level F1 for each truth country with at least
// `min_examples` examples. Null predictions count as FN for their truth.
std::map<std::string, CountryScore> per_country_f1(
    std::span<const Prediction> predictions,
    std::span<const LocationTriple> truths, std::size_t min_examples);

inline const std::vector<double> kDefaultThresholds = {
    0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

struct CurvePoint {
  double threshold = 0.0;
  std::optional<double> precision;
  double coverage = 0.0;
  double accuracy = 0.0;
};

// Re-thresholds threshold-0 predictions: any score below t becomes Null.
// Thresholds are deduplicated and returned in ascending order.
std::vector<CurvePoint> precision_coverage_curve(
    std::span<const Prediction> predictions,
    std::span<const LocationTriple> truths, Level level,
    std::vector<double> thresholds = kDefaultThresholds);

// Bucket for Fig.-3-style analysis: floor(log2(mention count)) for counts
// >= 1, plus a bucket for locations with no mentions and one for truths
// missing from the index.
struct MentionBucket {
  enum class Kind { NoMentions, Log2, Unknown };
  Kind kind = Kind::Log2;
  int log2 = 0;

  static MentionBucket for_count(std::size_t mention_count);
  std::string label() const;

  friend auto operator<=>(const MentionBucket&, const MentionBucket&) = default;
};

struct BucketScore {
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy() const {
    return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
  }
};

std::map<MentionBucket, BucketScore> mention_bucket_accuracy(
    std::span<const Prediction> predictions,
    std::span<const LocationTriple> truths, const LocationIndex& index,
    Level level);

// Seeded Fisher-Yates; |test| = round(test_fraction * n). Both halves keep
// the input order.
std::pair<std::vector<LabeledMention>, std::vector<LabeledMention>>
split_train_test(const std::vector<LabeledMention>& mentions,
                 double test_fraction, std::uint64_t seed);

// Full report: per-level metrics, per-country F1, curves, and mention
// buckets (when an index is given).
nlohmann::json evaluation_report(std::span<const Prediction> predictions,
                                 std::span<const LocationTriple> truths,
                                 std::size_t min_country_examples,
                                 const std::vector<double>& thresholds,
                                 const LocationIndex* index);

// "threshold,precision,coverage,level" with "nan" for undefined precision.
void write_curve_csv(std::ostream& out,
                     const std::map<Level, std::vector<CurvePoint>>& curves);

}  // namespace geolink

#endif  // GEOLINK_EVAL_HPP_
