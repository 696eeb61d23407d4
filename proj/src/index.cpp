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

#include "geolink/index.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "geolink/error.hpp"
#include "geolink/parallel.hpp"
#include "geolink/text.hpp"

namespace geolink {
namespace {

constexpr std::size_t kEmbedChunk = 512;

std::string_view method_name(IndexMethod m) {
  return m == IndexMethod::NameGeo ? "namegeo" : "usergeo";
}

IndexMethod method_from_name(std::string_view name) {
  if (name == "namegeo") return IndexMethod::NameGeo;
  if (name == "usergeo") return IndexMethod::UserGeo;
  throw InputError("unknown index method '" + std::string(name) + "'");
}

// Embeds every distinct text once. Chunks run in parallel; a provider error
// is re-raised with its offset into `texts`.
class EmbeddingTable {
 public:
  EmbeddingTable(const EmbeddingProvider& provider,
                 const std::vector<std::string>& texts, int threads) {
    std::vector<std::string> unique;
    for (const auto& t : texts) {
      if (slot_.emplace(t, unique.size()).second) unique.push_back(t);
    }
    vectors_.resize(unique.size());
    const std::size_t chunks = (unique.size() + kEmbedChunk - 1) / kEmbedChunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
      const std::size_t begin = c * kEmbedChunk;
      const std::size_t count = std::min(kEmbedChunk, unique.size() - begin);
      std::vector<Embedding> out;
      try {
        out = provider.embed_batch(std::span(unique).subspan(begin, count));
      } catch (const ProviderError& e) {
        throw ProviderError(e.what(), e.text(), begin + e.offset());
      }
      if (out.size() != count) {
        throw ProviderError("provider returned wrong number of vectors",
                            unique[begin], begin);
      }
      for (std::size_t i = 0; i < count; ++i) {
        if (out[i].size() != provider.dimension()) {
          throw ProviderError("provider returned wrong dimension",
                              unique[begin + i], begin + i);
        }
        vectors_[begin + i] = std::move(out[i]);
      }
    });
  }

  const Embedding& at(const std::string& text) const {
    return vectors_[slot_.at(text)];
  }

 private:
  std::unordered_map<std::string, std::size_t> slot_;
  std::vector<Embedding> vectors_;
};

std::vector<std::string> supplemental_strings(const LocationEntity& e,
                                              bool use_variants) {
  if (use_variants) return name_variants(e);
  return {canonical_string(e)};
}

void require_unique_triples(const std::vector<LocationEntity>& entities) {
  std::set<LocationTriple> seen;
  for (const auto& e : entities) {
    if (!seen.insert(triple_of(e)).second) {
      throw InputError("duplicate location in database: " + canonical_string(e) +
                       " (run filter_entities first)");
    }
  }
}

std::vector<std::size_t> prune_members(
    const std::vector<const Embedding*>& members,
    const std::vector<bool>& exempt, double multiplier) {
  const std::size_t n = members.size();
  std::vector<std::size_t> kept;
  if (n == 0) return kept;
  Embedding center = Embedding::Zero(members.front()->size());
  for (const auto* v : members) center += *v;
  center /= static_cast<double>(n);

  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = (*members[i] - center).squaredNorm();
  }
  const double mean = std::accumulate(dist.begin(), dist.end(), 0.0) /
                      static_cast<double>(n);
  const double cutoff = multiplier * mean;
  for (std::size_t i = 0; i < n; ++i) {
    if (exempt[i] || !(dist[i] > cutoff)) kept.push_back(i);
  }
  if (kept.empty()) {
    kept.push_back(static_cast<std::size_t>(
        std::min_element(dist.begin(), dist.end()) - dist.begin()));
  }
  return kept;
}

}  // namespace

LocationIndex::LocationIndex(int dimension, std::string provider_tag,
                             IndexMode mode)
    : dimension_(dimension),
      provider_tag_(std::move(provider_tag)),
      mode_(mode),
      centroids_(dimension, 0) {
  if (dimension <= 0) throw InputError("index dimension must be positive");
  if (mode_.prune.multiplier <= 0.0) {
    throw InputError("prune multiplier must be positive");
  }
}

void LocationIndex::add(LocationTriple triple, const Embedding& centroid,
                        std::size_t mention_count,
                        std::size_t supplemental_count) {
  if (centroid.size() != dimension_) {
    throw InputError("centroid dimension mismatch");
  }
  if (triple.is_null()) throw InputError("cannot index the Null triple");
  triples_.push_back(std::move(triple));
  mention_counts_.push_back(mention_count);
  supplemental_counts_.push_back(supplemental_count);
  pending_.push_back(centroid);
}

void LocationIndex::finalize() {
  std::vector<std::size_t> order(triples_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return triples_[a] < triples_[b];
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (triples_[order[i]] == triples_[order[i - 1]]) {
      const auto& t = triples_[order[i]];
      throw InputError("duplicate index entry (" + t.city() + ", " +
                       t.admin1() + ", " + t.country() + ")");
    }
  }
  std::vector<LocationTriple> triples;
  std::vector<std::size_t> mentions;
  std::vector<std::size_t> supplemental;
  Eigen::MatrixXd centroids(dimension_, static_cast<Eigen::Index>(order.size()));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    triples.push_back(std::move(triples_[i]));
    mentions.push_back(mention_counts_[i]);
    supplemental.push_back(supplemental_counts_[i]);
    centroids.col(static_cast<Eigen::Index>(k)) = pending_[i];
  }
  triples_ = std::move(triples);
  mention_counts_ = std::move(mentions);
  supplemental_counts_ = std::move(supplemental);
  centroids_ = std::move(centroids);
  pending_.clear();
}

std::optional<std::size_t> LocationIndex::find(const LocationTriple& triple) const {
  auto it = std::lower_bound(triples_.begin(), triples_.end(), triple);
  if (it == triples_.end() || !(*it == triple)) return std::nullopt;
  return static_cast<std::size_t>(it - triples_.begin());
}

void LocationIndex::save(std::ostream& out) const {
  nlohmann::json header = {
      {"dim", dimension_},
      {"provider", provider_tag_},
      {"mode",
       {{"method", method_name(mode_.method)},
        {"variants", mode_.variants},
        {"prune",
         {{"enabled", mode_.prune.enabled},
          {"multiplier", mode_.prune.multiplier},
          {"exempt_supplemental", mode_.prune.exempt_supplemental}}}}},
      {"entry_count", size()}};
  if (!config_hash_.empty()) header["config_hash"] = config_hash_;
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < size(); ++i) {
    out << escape_field(triples_[i].city()) << '\t'
        << escape_field(triples_[i].admin1()) << '\t'
        << escape_field(triples_[i].country()) << '\t' << mention_counts_[i]
        << '\t' << supplemental_counts_[i] << '\t';
    const auto col = centroid(i);
    for (Eigen::Index k = 0; k < col.size(); ++k) {
      if (k > 0) out << ' ';
      out << format_double(col[k]);
    }
    out << '\n';
  }
}

LocationIndex LocationIndex::load(std::istream& in) {
  if (!in.good()) throw InputError("cannot read index file");
  std::string line;
  if (!std::getline(in, line)) throw InputError("index file is empty");
  nlohmann::json header;
  int dim = 0;
  std::size_t expected = 0;
  IndexMode mode;
  std::string tag;
  try {
    header = nlohmann::json::parse(line);
    dim = header.at("dim").get<int>();
    tag = header.at("provider").get<std::string>();
    expected = header.at("entry_count").get<std::size_t>();
    const auto& m = header.at("mode");
    mode.method = method_from_name(m.at("method").get<std::string>());
    mode.variants = m.at("variants").get<bool>();
    const auto& p = m.at("prune");
    mode.prune.enabled = p.at("enabled").get<bool>();
    mode.prune.multiplier = p.at("multiplier").get<double>();
    mode.prune.exempt_supplemental = p.at("exempt_supplemental").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("index header: ") + e.what());
  }
  LocationIndex index(dim, tag, mode);
  if (header.contains("config_hash")) {
    index.config_hash_ = header["config_hash"].get<std::string>();
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = chomp(line);
    if (view.empty()) continue;
    auto f = split(view, '\t');
    if (f.size() != 6) {
      throw InputError("index line " + std::to_string(line_no) +
                       ": expected 6 fields");
    }
    auto values = split(f[5], ' ');
    if (values.size() != static_cast<std::size_t>(dim)) {
      throw InputError("index line " + std::to_string(line_no) + ": expected " +
                       std::to_string(dim) + " values");
    }
    Embedding v(dim);
    for (int k = 0; k < dim; ++k) v[k] = parse_double(values[k]);
    index.add(LocationTriple(unescape_field(f[0]), unescape_field(f[1]),
                             unescape_field(f[2])),
              v, static_cast<std::size_t>(parse_int(f[3])),
              static_cast<std::size_t>(parse_int(f[4])));
  }
  if (in.bad()) throw InputError("read error in index file");
  if (index.triples_.size() != expected) {
    throw InputError("index file has " + std::to_string(index.triples_.size()) +
                     " entries, header says " + std::to_string(expected));
  }
  index.finalize();
  return index;
}

std::vector<std::size_t> prune_outliers(const std::vector<Embedding>& vectors,
                                        const std::set<std::size_t>& exempt,
                                        double multiplier) {
  if (vectors.empty()) throw Error("prune_outliers needs at least one vector");
  if (!(multiplier > 0.0)) throw Error("prune multiplier must be positive");
  std::vector<const Embedding*> members;
  std::vector<bool> mask(vectors.size(), false);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    members.push_back(&vectors[i]);
    mask[i] = exempt.contains(i);
  }
  return prune_members(members, mask, multiplier);
}

Embedding mean_direction(const std::vector<const Embedding*>& members) {
  if (members.empty()) throw Error("mean of an empty member set");
  Embedding sum = Embedding::Zero(members.front()->size());
  for (const auto* v : members) sum += *v;
  sum /= static_cast<double>(members.size());
  normalize_in_place(sum);
  return sum;
}

namespace {

LocationIndex build_index(const std::vector<LocationEntity>& entities,
                          const std::vector<LabeledMention>& mentions,
                          const EmbeddingProvider& provider,
                          const IndexMode& mode, int threads,
                          BuildReport* report) {
  require_unique_triples(entities);
  const PruneConfig& prune = mode.prune;
  if (prune.enabled && !(prune.multiplier > 0.0)) {
    throw InputError("prune multiplier must be positive");
  }

  std::map<LocationTriple, std::size_t> slot_of;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    slot_of.emplace(triple_of(entities[i]), i);
  }
  std::vector<std::vector<std::size_t>> mentions_of(entities.size());
  BuildReport local;
  for (std::size_t m = 0; m < mentions.size(); ++m) {
    auto it = slot_of.find(mentions[m].truth);
    if (it == slot_of.end()) {
      ++local.dropped_mentions;
      continue;
    }
    mentions_of[it->second].push_back(m);
  }

  std::vector<std::vector<std::string>> supplemental(entities.size());
  std::vector<std::string> all_texts;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    supplemental[i] = supplemental_strings(entities[i], mode.variants);
    all_texts.insert(all_texts.end(), supplemental[i].begin(),
                     supplemental[i].end());
    for (std::size_t m : mentions_of[i]) all_texts.push_back(mentions[m].user_input);
  }
  const EmbeddingTable table(provider, all_texts, threads);

  std::vector<Embedding> centroids(entities.size());
  std::vector<std::size_t> pruned(entities.size(), 0);
  parallel_for(entities.size(), threads, [&](std::size_t i) {
    // Members: mentions in input order, then supplemental strings.
    std::vector<const Embedding*> members;
    std::vector<bool> exempt;
    for (std::size_t m : mentions_of[i]) {
      members.push_back(&table.at(mentions[m].user_input));
      exempt.push_back(false);
    }
    for (const auto& s : supplemental[i]) {
      members.push_back(&table.at(s));
      exempt.push_back(prune.exempt_supplemental);
    }
    if (prune.enabled && !mentions_of[i].empty()) {
      auto kept = prune_members(members, exempt, prune.multiplier);
      std::vector<const Embedding*> survivors;
      survivors.reserve(kept.size());
      for (std::size_t k : kept) survivors.push_back(members[k]);
      pruned[i] = members.size() - kept.size();
      members = std::move(survivors);
    }
    centroids[i] = mean_direction(members);
  });

  LocationIndex index(provider.dimension(), provider.tag(), mode);
  double fraction_sum = 0.0;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    index.add(triple_of(entities[i]), centroids[i], mentions_of[i].size(),
              supplemental[i].size());
    if (mentions_of[i].empty()) continue;
    const std::size_t candidates =
        mentions_of[i].size() +
        (prune.exempt_supplemental ? 0 : supplemental[i].size());
    ++local.prune.clusters;
    local.prune.non_exempt_members += candidates;
    local.prune.pruned += pruned[i];
    fraction_sum += static_cast<double>(pruned[i]) / static_cast<double>(candidates);
  }
  if (local.prune.clusters > 0) {
    local.prune.mean_cluster_fraction =
        fraction_sum / static_cast<double>(local.prune.clusters);
  }
  index.finalize();
  if (report != nullptr) *report = local;
  return index;
}

}  // namespace

LocationIndex build_name_index(const std::vector<LocationEntity>& entities,
                               const EmbeddingProvider& provider,
                               bool use_variants, int threads) {
  return build_index(entities, {}, provider,
                     IndexMode{IndexMethod::NameGeo, use_variants, PruneConfig{}},
                     threads, nullptr);
}

LocationIndex build_user_index(const std::vector<LocationEntity>& entities,
                               const std::vector<LabeledMention>& mentions,
                               const EmbeddingProvider& provider,
                               bool use_variants, const PruneConfig& prune,
                               int threads, BuildReport* report) {
  return build_index(entities, mentions, provider,
                     IndexMode{IndexMethod::UserGeo, use_variants, prune},
                     threads, report);
}

std::vector<LabeledMention> read_mentions(std::istream& in) {
  if (!in.good()) throw InputError("cannot read mentions file");
  std::vector<LabeledMention> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = chomp(line);
    if (view.empty()) continue;
    auto f = split(view, '\t');
    if (f.size() != 4) {
      throw InputError("mentions line " + std::to_string(line_no) +
                       ": expected 4 tab-separated fields");
    }
    LocationTriple truth(unescape_field(f[1]), unescape_field(f[2]),
                         unescape_field(f[3]));
    if (truth.is_null()) {
      throw InputError("mentions line " + std::to_string(line_no) +
                       ": truth location is empty");
    }
    out.push_back({unescape_field(f[0]), std::move(truth)});
  }
  if (in.bad()) throw InputError("read error in mentions file");
  return out;
}

void write_mentions(std::ostream& out, const std::vector<LabeledMention>& mentions) {
  for (const auto& m : mentions) {
    out << escape_field(m.user_input) << '\t' << escape_field(m.truth.city())
        << '\t' << escape_field(m.truth.admin1()) << '\t'
        << escape_field(m.truth.country()) << '\n';
  }
}

}  // namespace geolink
