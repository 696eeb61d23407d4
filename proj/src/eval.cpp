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

#include "geolink/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "geolink/error.hpp"
#include "geolink/text.hpp"

namespace geolink {
namespace {

void require_aligned(std::size_t predictions, std::size_t truths) {
  if (predictions != truths) {
    throw InputError("predictions (" + std::to_string(predictions) +
                     ") and truths (" + std::to_string(truths) +
                     ") differ in length");
  }
}

double ratio(std::size_t num, std::size_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

// Unbiased draw from [0, bound) by rejection; std::uniform_int_distribution
// is not reproducible across standard libraries.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Country: return "country";
    case Level::Admin: return "admin";
    case Level::City: return "city";
  }
  return "country";
}

MatchResult match_level(const LocationTriple& pred, const LocationTriple& truth) {
  if (truth.is_null()) throw InputError("match_level: truth is Null");
  MatchResult r;
  if (pred.is_null()) return r;
  r.country_correct = pred.country() == truth.country();
  r.admin_correct = r.country_correct && pred.admin1() == truth.admin1();
  r.city_correct = r.admin_correct && pred.city() == truth.city();
  return r;
}

Metrics compute_metrics(std::span<const Prediction> predictions,
                        std::span<const LocationTriple> truths, Level level) {
  require_aligned(predictions.size(), truths.size());
  if (predictions.empty()) throw InputError("compute_metrics: no examples");
  Metrics m;
  m.n = predictions.size();
  for (std::size_t i = 0; i < m.n; ++i) {
    if (predictions[i].triple.is_null()) continue;
    ++m.predicted;
    if (match_level(predictions[i].triple, truths[i]).at(level)) ++m.correct;
  }
  m.accuracy = ratio(m.correct, m.n);
  m.coverage = ratio(m.predicted, m.n);
  if (m.predicted > 0) m.precision = ratio(m.correct, m.predicted);
  return m;
}

std::map<std::string, CountryScore> per_country_f1(
    std::span<const Prediction> predictions,
    std::span<const LocationTriple> truths, std::size_t min_examples) {
  require_aligned(predictions.size(), truths.size());
  std::map<std::string, CountryScore> all;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const std::string& truth = truths[i].country();
    const std::string& pred = predictions[i].triple.country();
    ++all[truth].support;
    if (pred == truth) {
      ++all[truth].tp;
    } else {
      ++all[truth].fn;
      if (!pred.empty()) ++all[pred].fp;
    }
  }
  std::map<std::string, CountryScore> out;
  for (auto& [country, s] : all) {
    if (s.support < min_examples || s.support == 0) continue;
    s.f1 = 2.0 * static_cast<double>(s.tp) /
           static_cast<double>(2 * s.tp + s.fp + s.fn);
    out.emplace(country, s);
  }
  return out;
}

std::vector<CurvePoint> precision_coverage_curve(
    std::span<const Prediction> predictions,
    std::span<const LocationTriple> truths, Level level,
    std::vector<double> thresholds) {
  require_aligned(predictions.size(), truths.size());
  if (predictions.empty()) throw InputError("precision_coverage_curve: no examples");
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<bool> correct(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    correct[i] = match_level(predictions[i].triple, truths[i]).at(level);
  }
  std::vector<CurvePoint> curve;
  for (double t : thresholds) {
    std::size_t kept = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const auto& p = predictions[i];
      if (p.triple.is_null() || p.score < t) continue;
      ++kept;
      if (correct[i]) ++hits;
    }
    CurvePoint point;
    point.threshold = t;
    point.coverage = ratio(kept, predictions.size());
    point.accuracy = ratio(hits, predictions.size());
    if (kept > 0) point.precision = ratio(hits, kept);
    curve.push_back(point);
  }
  return curve;
}

MentionBucket MentionBucket::for_count(std::size_t mention_count) {
  if (mention_count == 0) return {Kind::NoMentions, 0};
  int log2 = 0;
  while (mention_count >>= 1) ++log2;
  return {Kind::Log2, log2};
}

std::string MentionBucket::label() const {
  switch (kind) {
    case Kind::NoMentions: return "none";
    case Kind::Unknown: return "unknown";
    case Kind::Log2: break;
  }
  return std::to_string(log2);
}

std::map<MentionBucket, BucketScore> mention_bucket_accuracy(
    std::span<const Prediction> predictions,
    std::span<const LocationTriple> truths, const LocationIndex& index,
    Level level) {
  require_aligned(predictions.size(), truths.size());
  std::map<MentionBucket, BucketScore> out;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    MentionBucket bucket{MentionBucket::Kind::Unknown, 0};
    if (auto slot = index.find(truths[i])) {
      bucket = MentionBucket::for_count(index.mention_count(*slot));
    }
    BucketScore& s = out[bucket];
    ++s.n;
    if (match_level(predictions[i].triple, truths[i]).at(level)) ++s.correct;
  }
  return out;
}

std::pair<std::vector<LabeledMention>, std::vector<LabeledMention>>
split_train_test(const std::vector<LabeledMention>& mentions,
                 double test_fraction, std::uint64_t seed) {
  if (mentions.empty()) throw InputError("split_train_test: no mentions");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InputError("test fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = mentions.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[draw_below(rng, i + 1)]);
  }
  const auto test_size = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  std::vector<bool> in_test(n, false);
  for (std::size_t k = 0; k < test_size; ++k) in_test[order[k]] = true;

  std::pair<std::vector<LabeledMention>, std::vector<LabeledMention>> out;
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? out.second : out.first).push_back(mentions[i]);
  }
  return out;
}

nlohmann::json evaluation_report(std::span<const Prediction> predictions,
                                 std::span<const LocationTriple> truths,
                                 std::size_t min_country_examples,
                                 const std::vector<double>& thresholds,
                                 const LocationIndex* index) {
  nlohmann::json report;
  report["n"] = predictions.size();
  for (Level level : kAllLevels) {
    const std::string name(to_string(level));
    const Metrics m = compute_metrics(predictions, truths, level);
    report["metrics"][name] = {{"accuracy", m.accuracy},
                               {"coverage", m.coverage},
                               {"precision", optional_number(m.precision)},
                               {"n", m.n},
                               {"predicted", m.predicted},
                               {"correct", m.correct}};
    auto& curve = report["curves"][name];
    curve = nlohmann::json::array();
    for (const auto& p : precision_coverage_curve(predictions, truths, level,
                                                  thresholds)) {
      curve.push_back({{"threshold", p.threshold},
                       {"precision", optional_number(p.precision)},
                       {"coverage", p.coverage},
                       {"accuracy", p.accuracy}});
    }
    if (index != nullptr) {
      auto& buckets = report["mention_buckets"][name];
      buckets = nlohmann::json::array();
      for (const auto& [bucket, s] :
           mention_bucket_accuracy(predictions, truths, *index, level)) {
        buckets.push_back(
            {{"bucket", bucket.label()}, {"n", s.n}, {"accuracy", s.accuracy()}});
      }
    }
  }
  auto& f1 = report["per_country_f1"];
  f1 = nlohmann::json::object();
  for (const auto& [country, s] :
       per_country_f1(predictions, truths, min_country_examples)) {
    f1[country] = {{"f1", s.f1}, {"support", s.support}, {"tp", s.tp},
                   {"fp", s.fp}, {"fn", s.fn}};
  }
  return report;
}

void write_curve_csv(std::ostream& out,
                     const std::map<Level, std::vector<CurvePoint>>& curves) {
  out << "threshold,precision,coverage,level\n";
  for (const auto& [level, points] : curves) {
    for (const auto& p : points) {
      out << format_double(p.threshold) << ','
          << (p.precision ? format_double(*p.precision) : std::string("nan"))
          << ',' << format_double(p.coverage) << ',' << to_string(level)
          << '\n';
    }
  }
}

}  // namespace geolink
