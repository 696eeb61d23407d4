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

#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "geolink/error.hpp"

namespace geolink {
namespace {

const LocationTriple kNull;
const LocationTriple kUS("", "", "US");
const LocationTriple kNewYork("New York City", "New York", "US");
const LocationTriple kIwaki("Iwaki", "Fukushima", "JP");
const LocationTriple kBoyabat("Boyabat", "Sinop", "TR");
const LocationTriple kSinop("Sinop", "Sinop", "TR");

Prediction accept(const LocationTriple& t, double score = 1.0) {
  return {t, score, true};
}
Prediction reject(double score = 0.0) { return {kNull, score, false}; }

TEST(MatchLevelTest, HierarchicalExamples) {
  auto m = match_level(kUS, kNewYork);
  EXPECT_TRUE(m.country_correct);
  EXPECT_FALSE(m.admin_correct);
  EXPECT_FALSE(m.city_correct);

  m = match_level(kIwaki, kIwaki);
  EXPECT_TRUE(m.country_correct && m.admin_correct && m.city_correct);

  m = match_level(kSinop, kBoyabat);
  EXPECT_TRUE(m.country_correct);
  EXPECT_TRUE(m.admin_correct);
  EXPECT_FALSE(m.city_correct);

  m = match_level(kNull, kIwaki);
  EXPECT_FALSE(m.country_correct || m.admin_correct || m.city_correct);

  // Country-granularity truth: a country prediction is right at every level.
  m = match_level(kUS, kUS);
  EXPECT_TRUE(m.country_correct && m.admin_correct && m.city_correct);
  m = match_level(kNewYork, kUS);
  EXPECT_TRUE(m.country_correct);
  EXPECT_FALSE(m.admin_correct);

  EXPECT_THROW(match_level(kUS, kNull), InputError);
}

TEST(MetricsTest, TenExamples) {
  // 8 predicted, 6 of them correct at country level.
  std::vector<Prediction> preds;
  std::vector<LocationTriple> truths(10, kIwaki);
  for (int i = 0; i < 6; ++i) preds.push_back(accept(kIwaki));
  preds.push_back(accept(kUS));
  preds.push_back(accept(kSinop));
  preds.push_back(reject());
  preds.push_back(reject());
  const auto m = compute_metrics(preds, truths, Level::Country);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.6);
  EXPECT_DOUBLE_EQ(m.coverage, 0.8);
  ASSERT_TRUE(m.precision.has_value());
  EXPECT_DOUBLE_EQ(*m.precision, 0.75);
  EXPECT_EQ(m.n, 10u);
  EXPECT_EQ(m.predicted, 8u);
  EXPECT_EQ(m.correct, 6u);
}

TEST(MetricsTest, AllNullAndAllCorrect) {
  std::vector<LocationTriple> truths{kIwaki, kUS, kSinop};
  std::vector<Prediction> none(3, reject());
  auto m = compute_metrics(none, truths, Level::City);
  EXPECT_EQ(m.accuracy, 0.0);
  EXPECT_EQ(m.coverage, 0.0);
  EXPECT_FALSE(m.precision.has_value());

  std::vector<Prediction> all{accept(kIwaki), accept(kUS), accept(kSinop)};
  for (Level level : kAllLevels) {
    m = compute_metrics(all, truths, level);
    EXPECT_EQ(m.accuracy, 1.0);
    EXPECT_EQ(m.coverage, 1.0);
    EXPECT_EQ(m.precision, 1.0);
  }
  EXPECT_THROW(compute_metrics(std::span<const Prediction>(), {}, Level::City),
               InputError);
  EXPECT_THROW(compute_metrics(all, std::span(truths).first(2), Level::City),
               InputError);
}

TEST(MetricsTest, IdentitiesAndHierarchyOnRandomData) {
  const std::vector<LocationTriple> pool{
      kUS, kNewYork, kIwaki, kBoyabat, kSinop,
      LocationTriple("", "New York", "US"), LocationTriple("", "", "JP"),
      LocationTriple("Buffalo", "New York", "US")};
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Prediction> preds;
    std::vector<LocationTriple> truths;
    for (int i = 0; i < 40; ++i) {
      truths.push_back(pool[rng() % pool.size()]);
      if (rng() % 4 == 0) {
        preds.push_back(reject());
      } else {
        preds.push_back(accept(pool[rng() % pool.size()]));
      }
    }
    double prev = 2.0;
    for (Level level : kAllLevels) {
      const auto m = compute_metrics(preds, truths, level);
      if (m.precision) EXPECT_NEAR(m.accuracy, *m.precision * m.coverage, 1e-12);
      EXPECT_LE(m.accuracy, prev);
      prev = m.accuracy;
    }
  }
}

TEST(F1Test, HandComputedThreeCountries) {
  // truth:  us us us jp jp tr
  // pred:   us us jp jp -- us
  // us: tp 2, fp 1, fn 1 -> 4/6; jp: tp 1, fp 1, fn 1 -> 2/4; tr: tp 0, fn 1 -> 0.
  std::vector<LocationTriple> truths{kUS, kNewYork, kUS, kIwaki, kIwaki, kSinop};
  std::vector<Prediction> preds{accept(kUS), accept(kNewYork), accept(kIwaki),
                                accept(kIwaki), reject(), accept(kUS)};
  auto f1 = per_country_f1(preds, truths, 1);
  ASSERT_EQ(f1.size(), 3u);
  EXPECT_DOUBLE_EQ(f1.at("us").f1, 4.0 / 6.0);
  EXPECT_EQ(f1.at("us").support, 3u);
  EXPECT_DOUBLE_EQ(f1.at("jp").f1, 0.5);
  EXPECT_EQ(f1.at("jp").fn, 1u);
  EXPECT_DOUBLE_EQ(f1.at("tr").f1, 0.0);
  auto big = per_country_f1(preds, truths, 3);
  ASSERT_EQ(big.size(), 1u);
  EXPECT_TRUE(big.contains("us"));
}

TEST(CurveTest, ThreePointFixture) {
  std::vector<LocationTriple> truths{kIwaki, kIwaki, kIwaki};
  std::vector<Prediction> preds{accept(kIwaki, 0.95), accept(kUS, 0.55),
                                accept(kIwaki, 0.15)};
  auto curve = precision_coverage_curve(preds, truths, Level::Country, {0.9, 0.0, 0.5});
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_EQ(curve[0].threshold, 0.0);
  EXPECT_DOUBLE_EQ(curve[0].coverage, 1.0);
  EXPECT_DOUBLE_EQ(*curve[0].precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(curve[1].coverage, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*curve[1].precision, 0.5);
  EXPECT_DOUBLE_EQ(curve[2].coverage, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(*curve[2].precision, 1.0);
}

TEST(CurveTest, ZeroPointReproducesHeadlineAndCoverageFalls) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.2, 1.0);
  std::vector<Prediction> preds;
  std::vector<LocationTriple> truths;
  for (int i = 0; i < 200; ++i) {
    truths.push_back(i % 2 ? kIwaki : kSinop);
    const double s = u(rng);
    preds.push_back(s >= 0 ? accept(i % 3 ? kIwaki : kBoyabat, s) : reject(s));
  }
  for (Level level : kAllLevels) {
    const auto curve = precision_coverage_curve(preds, truths, level);
    ASSERT_EQ(curve.size(), 10u);
    const auto m = compute_metrics(preds, truths, level);
    EXPECT_NEAR(curve[0].coverage, m.coverage, 1e-12);
    EXPECT_NEAR(curve[0].accuracy, m.accuracy, 1e-12);
    EXPECT_NEAR(*curve[0].precision, *m.precision, 1e-12);
    for (std::size_t k = 1; k < curve.size(); ++k) {
      EXPECT_LE(curve[k].coverage, curve[k - 1].coverage);
    }
  }
  std::ostringstream csv;
  write_curve_csv(csv, {{Level::Country,
                         precision_coverage_curve(preds, truths, Level::Country, {0.0, 1.0})}});
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "threshold,precision,coverage,level");
  EXPECT_NE(csv.str().find("nan"), std::string::npos);
}

TEST(BucketTest, FloorLog2) {
  EXPECT_EQ(MentionBucket::for_count(1).log2, 0);
  EXPECT_EQ(MentionBucket::for_count(1).kind, MentionBucket::Kind::Log2);
  EXPECT_EQ(MentionBucket::for_count(3).log2, 1);
  EXPECT_EQ(MentionBucket::for_count(1023).log2, 9);
  EXPECT_EQ(MentionBucket::for_count(1024).log2, 10);
  EXPECT_EQ(MentionBucket::for_count(0).label(), "none");
  EXPECT_EQ(MentionBucket::for_count(8).label(), "3");
}

TEST(BucketTest, AccuracyByMentionCount) {
  LocationIndex index(2, "t", {IndexMethod::UserGeo, false, {}});
  Embedding v(2);
  v << 1.0, 0.0;
  index.add(kIwaki, v, 5, 1);    // bucket 2
  index.add(kSinop, v, 0, 1);    // bucket none
  index.add(kNewYork, v, 6, 1);  // bucket 2
  index.finalize();
  std::vector<LocationTriple> truths{kIwaki, kNewYork, kSinop, kBoyabat};
  std::vector<Prediction> preds{accept(kIwaki), accept(kUS), accept(kSinop),
                                accept(kBoyabat)};
  auto buckets = mention_bucket_accuracy(preds, truths, index, Level::City);
  ASSERT_EQ(buckets.size(), 3u);
  const auto two = buckets.at(MentionBucket::for_count(4));
  EXPECT_EQ(two.n, 2u);
  EXPECT_DOUBLE_EQ(two.accuracy(), 0.5);
  EXPECT_EQ(buckets.at(MentionBucket::for_count(0)).n, 1u);
  EXPECT_EQ(buckets.at({MentionBucket::Kind::Unknown, 0}).n, 1u);
  std::size_t total = 0;
  for (const auto& [b, s] : buckets) total += s.n;
  EXPECT_EQ(total, truths.size());
}

std::vector<LabeledMention> numbered(int n) {
  std::vector<LabeledMention> out;
  for (int i = 0; i < n; ++i) out.push_back({std::to_string(i), kIwaki});
  return out;
}

TEST(SplitTest, SizesAndDeterminism) {
  auto [train, test] = split_train_test(numbered(10), 0.1, 7);
  EXPECT_EQ(train.size(), 9u);
  EXPECT_EQ(test.size(), 1u);
  auto again = split_train_test(numbered(10), 0.1, 7);
  EXPECT_EQ(again.second[0].user_input, test[0].user_input);

  auto [a, b] = split_train_test(numbered(1000), 0.25, 99);
  EXPECT_EQ(b.size(), 250u);
  std::set<std::string> seen;
  for (const auto& m : a) seen.insert(m.user_input);
  for (const auto& m : b) EXPECT_TRUE(seen.insert(m.user_input).second);
  EXPECT_EQ(seen.size(), 1000u);
  // Original relative order is preserved in each half.
  for (std::size_t i = 1; i < a.size(); ++i) {
    EXPECT_LT(std::stoi(a[i - 1].user_input), std::stoi(a[i].user_input));
  }
  auto other = split_train_test(numbered(1000), 0.25, 100);
  bool differs = false;
  for (std::size_t i = 0; i < b.size(); ++i) {
    differs |= other.second[i].user_input != b[i].user_input;
  }
  EXPECT_TRUE(differs);
}

TEST(SplitTest, Errors) {
  EXPECT_THROW(split_train_test({}, 0.5, 1), InputError);
  EXPECT_THROW(split_train_test(numbered(4), 0.0, 1), InputError);
  EXPECT_THROW(split_train_test(numbered(4), 1.0, 1), InputError);
}

TEST(ReportTest, Structure) {
  std::vector<LocationTriple> truths{kIwaki, kUS};
  std::vector<Prediction> preds{accept(kIwaki, 0.8), reject(0.1)};
  auto r = evaluation_report(preds, truths, 1, kDefaultThresholds, nullptr);
  EXPECT_EQ(r["n"], 2);
  EXPECT_EQ(r["metrics"]["city"]["accuracy"], 0.5);
  EXPECT_EQ(r["curves"]["country"].size(), 10u);
  EXPECT_FALSE(r.contains("mention_buckets"));
  EXPECT_TRUE(r["per_country_f1"].contains("jp"));
}

}  // namespace
}  // namespace geolink
