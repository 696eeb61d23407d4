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

#ifndef GEOLINK_INDEX_HPP_
#define GEOLINK_INDEX_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "geolink/embedding.hpp"
#include "geolink/gazetteer.hpp"

namespace geolink {

struct LabeledMention {
  std::string user_input;
  LocationTriple truth;
};

struct PruneConfig {
  bool enabled = false;
  double multiplier = 1.0;
  bool exempt_supplemental = true;
};

enum class IndexMethod { NameGeo, UserGeo };

struct IndexMode {
  IndexMethod method = IndexMethod::NameGeo;
  bool variants = false;
  PruneConfig prune;
};

// One centroid per location. Entries are kept sorted by LocationTriple order
// so the first maximum of a score scan is the tie-break winner. Centroids are
// the columns of a dimension x size matrix.
class LocationIndex {
 public:
  LocationIndex(int dimension, std::string provider_tag, IndexMode mode);

  // Entries may be added in any order; finalize() sorts them. Throws
  // InputError on duplicate triples or wrong dimension.
  void add(LocationTriple triple, const Embedding& centroid,
           std::size_t mention_count, std::size_t supplemental_count);
  void finalize();

  std::size_t size() const { return triples_.size(); }
  int dimension() const { return dimension_; }
  const std::string& provider_tag() const { return provider_tag_; }
  const IndexMode& mode() const { return mode_; }

  const LocationTriple& triple(std::size_t i) const { return triples_[i]; }
  auto centroid(std::size_t i) const {
    return centroids_.col(static_cast<Eigen::Index>(i));
  }
  const Eigen::MatrixXd& centroids() const { return centroids_; }
  std::size_t mention_count(std::size_t i) const { return mention_counts_[i]; }
  std::size_t supplemental_count(std::size_t i) const {
    return supplemental_counts_[i];
  }
  std::optional<std::size_t> find(const LocationTriple& triple) const;

  const std::string& config_hash() const { return config_hash_; }
  void set_config_hash(std::string hash) { config_hash_ = std::move(hash); }

  // Header JSON line, then one TSV line per entry.
  void save(std::ostream& out) const;
  static LocationIndex load(std::istream& in);

 private:
  int dimension_;
  std::string provider_tag_;
  IndexMode mode_;
  std::string config_hash_;
  std::vector<LocationTriple> triples_;
  std::vector<std::size_t> mention_counts_;
  std::vector<std::size_t> supplemental_counts_;
  std::vector<Embedding> pending_;
  Eigen::MatrixXd centroids_;
};

struct PruneStats {
  std::size_t clusters = 0;          // locations with at least one mention
  std::size_t non_exempt_members = 0;
  std::size_t pruned = 0;
  double mean_cluster_fraction = 0.0;  // per-cluster pruned share, averaged

  double pruned_fraction() const {
    return non_exempt_members == 0
               ? 0.0
               : static_cast<double>(pruned) /
                     static_cast<double>(non_exempt_members);
  }
};

struct BuildReport {
  std::size_t dropped_mentions = 0;  // truth triple not in the database
  PruneStats prune;
};

// One-pass outlier removal: with C the mean of `vectors` and
// d_i = |v_i - C|^2, drops every non-exempt i with d_i > multiplier * mean(d).
// Returns kept positions in ascending order; never empty.
std::vector<std::size_t> prune_outliers(const std::vector<Embedding>& vectors,
                                        const std::set<std::size_t>& exempt,
                                        double multiplier);

// Normalized mean of unit-normalized members.
Embedding mean_direction(const std::vector<const Embedding*>& members);

// Each location is the embedding of its canonical string, or the normalized
// mean over all its name variants.
LocationIndex build_name_index(const std::vector<LocationEntity>& entities,
                               const EmbeddingProvider& provider,
                               bool use_variants, int threads = 1);

// Each location is the normalized mean of its labeled mentions plus its
// supplemental strings (canonical string, or all variants). Mentions whose
// truth is not in `entities` are dropped and counted in `report`.
LocationIndex build_user_index(const std::vector<LocationEntity>& entities,
                               const std::vector<LabeledMention>& mentions,
                               const EmbeddingProvider& provider,
                               bool use_variants, const PruneConfig& prune,
                               int threads = 1, BuildReport* report = nullptr);

// Mentions TSV: "<escaped user input>\t<city>\t<admin1>\t<country>".
std::vector<LabeledMention> read_mentions(std::istream& in);
void write_mentions(std::ostream& out, const std::vector<LabeledMention>& mentions);

}  // namespace geolink

#endif  // GEOLINK_INDEX_HPP_
