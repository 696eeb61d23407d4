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

#include "geolink/linker.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>

#include "geolink/error.hpp"
#include "geolink/parallel.hpp"
#include "geolink/text.hpp"

namespace geolink {
namespace {

constexpr std::size_t kLinkChunk = 256;
// Far above the rounding gap between GEMV and a sequential dot product.
constexpr double kRescoreWindow = 1e-9;

void check_compatible(const LocationIndex& index,
                      const EmbeddingProvider& provider, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InputError("threshold must lie in [0, 1], got " +
                     format_double(threshold));
  }
  if (index.dimension() != provider.dimension()) {
    throw InputError("index dimension " + std::to_string(index.dimension()) +
                " does not match provider dimension " +
                std::to_string(provider.dimension()));
  }
  if (index.provider_tag() != provider.tag()) {
    throw InputError("index was built with provider '" + index.provider_tag() +
                "' but linking uses '" + provider.tag() + "'");
  }
  if (index.size() == 0) throw InputError("index is empty");
}

Prediction decide(const LocationIndex& index, const Embedding& query,
                  double threshold) {
  const ScanResult best = best_match(index, query);
  Prediction p;
  p.score = best.score;
  p.accepted = best.score >= threshold;
  if (p.accepted) p.triple = index.triple(best.entry);
  return p;
}

}  // namespace

double sequential_dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum;
}

ScanResult best_match(const LocationIndex& index, const Embedding& query) {
  if (query.size() != index.dimension()) {
    throw Error("query dimension does not match index");
  }
  // GEMV reorders the summation, so it only shortlists; candidates within
  // kRescoreWindow of its maximum are rescored in sequential order.
  const Eigen::VectorXd approx = index.centroids().transpose() * query;
  const double cutoff = approx.maxCoeff() - kRescoreWindow;
  const std::span<const double> q(query.data(), static_cast<std::size_t>(query.size()));
  ScanResult best{0, -std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < approx.size(); ++i) {
    if (approx[i] < cutoff) continue;
    const auto col = index.centroid(static_cast<std::size_t>(i));
    const double score = sequential_dot({col.data(), q.size()}, q);
    if (score > best.score) best = {static_cast<std::size_t>(i), score};
  }
  return best;
}

Prediction link(const LocationIndex& index, const EmbeddingProvider& provider,
                const std::string& input, double threshold) {
  check_compatible(index, provider, threshold);
  return decide(index, provider.embed(input), threshold);
}

std::vector<Prediction> link_batch(const LocationIndex& index,
                                   const EmbeddingProvider& provider,
                                   const std::vector<std::string>& inputs,
                                   double threshold, int threads) {
  if (inputs.empty()) return {};
  check_compatible(index, provider, threshold);
  std::vector<Prediction> out(inputs.size());
  const std::size_t chunks = (inputs.size() + kLinkChunk - 1) / kLinkChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kLinkChunk;
    const std::size_t count = std::min(kLinkChunk, inputs.size() - begin);
    std::vector<Embedding> queries;
    try {
      queries = provider.embed_batch(std::span(inputs).subspan(begin, count));
    } catch (const ProviderError& e) {
      throw ProviderError(std::string(e.what()) + " (input " +
                              std::to_string(begin + e.offset()) + ")",
                          e.text(), begin + e.offset());
    }
    for (std::size_t i = 0; i < count; ++i) {
      out[begin + i] = decide(index, queries[i], threshold);
    }
  });
  return out;
}

void write_predictions(std::ostream& out, const std::vector<std::string>& inputs,
                       const std::vector<Prediction>& predictions) {
  if (inputs.size() != predictions.size()) {
    throw Error("write_predictions: inputs and predictions differ in length");
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& p = predictions[i];
    out << escape_field(inputs[i]) << '\t' << escape_field(p.triple.city())
        << '\t' << escape_field(p.triple.admin1()) << '\t'
        << escape_field(p.triple.country()) << '\t' << format_double(p.score)
        << '\t' << (p.accepted ? "true" : "false") << '\n';
  }
}

std::vector<PredictionRecord> read_predictions(std::istream& in) {
  if (!in.good()) throw InputError("cannot read predictions file");
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = split(chomp(line), '\t');
    if (f.size() != 6) {
      if (chomp(line).empty()) continue;
      throw InputError("predictions line " + std::to_string(line_no) +
                       ": expected 6 fields");
    }
    PredictionRecord r;
    r.input = unescape_field(f[0]);
    r.prediction.triple = LocationTriple(unescape_field(f[1]),
                                         unescape_field(f[2]),
                                         unescape_field(f[3]));
    r.prediction.score = parse_double(f[4]);
    if (f[5] != "true" && f[5] != "false") {
      throw InputError("predictions line " + std::to_string(line_no) +
                       ": accepted must be true or false");
    }
    r.prediction.accepted = f[5] == "true";
    if (r.prediction.accepted == r.prediction.triple.is_null()) {
      throw InputError("predictions line " + std::to_string(line_no) +
                       ": accepted flag disagrees with the triple");
    }
    out.push_back(std::move(r));
  }
  if (in.bad()) throw InputError("read error in predictions file");
  return out;
}

}  // namespace geolink
