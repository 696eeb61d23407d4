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

#ifndef GEOLINK_GAZETTEER_HPP_
#define GEOLINK_GAZETTEER_HPP_

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace geolink {

enum class Granularity { Country, Admin1, City };

std::string_view to_string(Granularity g);
Granularity granularity_from_string(std::string_view name);

// (city, admin1, country) identity of a location. Components are stored in
// normalize_name() form; the country component is the ISO 3166 alpha-2 code.
// All three empty is the Null triple.
class LocationTriple {
 public:
  LocationTriple() = default;
  // Normalizes the components. Throws InputError if the hierarchy has a gap
  // (city without admin1, or admin1 without country).
  LocationTriple(std::string_view city, std::string_view admin1,
                 std::string_view country);

  static LocationTriple null() { return {}; }

  const std::string& city() const { return city_; }
  const std::string& admin1() const { return admin1_; }
  const std::string& country() const { return country_; }

  bool is_null() const {
    return city_.empty() && admin1_.empty() && country_.empty();
  }

  // Ordering is (country, admin1, city); the linker breaks score ties with it.
  friend bool operator<(const LocationTriple& a, const LocationTriple& b) {
    return std::tie(a.country_, a.admin1_, a.city_) <
           std::tie(b.country_, b.admin1_, b.city_);
  }
  friend bool operator==(const LocationTriple& a,
                         const LocationTriple& b) = default;

 private:
  std::string city_;
  std::string admin1_;
  std::string country_;
};

struct LocationEntity {
  std::int64_t entity_id = 0;
  std::string name;
  std::string ascii_name;
  double latitude = 0.0;
  double longitude = 0.0;
  Granularity granularity = Granularity::City;
  std::string country_code;
  std::string country_name;
  std::string admin1_code;
  std::string admin1_name;
  std::string admin2_name;
  std::int64_t population = 0;
};

LocationTriple triple_of(const LocationEntity& entity);

// Feature-code rules that sort GeoNames rows into the three granularities.
// Rows matching none of them are dropped.
struct FeatureCodeMap {
  std::set<std::string> country_codes{"PCLI", "PCLD", "PCLF",
                                      "PCLS", "PCL",  "TERR"};
  std::string country_class = "A";
  std::set<std::string> admin1_codes{"ADM1"};
  std::string admin1_class = "A";
  std::set<std::string> city_classes{"P"};
};

struct GazetteerConfig {
  std::int64_t min_population = 15000;
  FeatureCodeMap feature_codes;
};

struct ParseReport {
  std::vector<LocationEntity> entities;
  std::size_t lines_read = 0;
  std::size_t malformed = 0;     // too few fields, bad numbers, bad codes
  std::size_t unclassified = 0;  // feature code outside the map
  std::size_t unresolved_admin1 = 0;
  std::size_t unresolved_country = 0;
};

// Parses a GeoNames-format dump (tab separated, >= 15 fields) together with
// the admin1CodesASCII and countryInfo tables. `admin2_codes` is optional.
// Throws InputError when a stream is unreadable.
ParseReport parse_gazetteer(std::istream& dump, std::istream& admin1_codes,
                            std::istream& country_info,
                            const GazetteerConfig& config,
                            std::istream* admin2_codes = nullptr);

// Drops cities below min_population (boundary kept), then deduplicates by
// triple keeping the most populous entity (lower entity_id on ties). Output
// is sorted by entity_id.
std::vector<LocationEntity> filter_entities(std::vector<LocationEntity> entities,
                                            const GazetteerConfig& config);

// "city, admin2, admin1, country, CC" with empty components skipped.
std::string canonical_string(const LocationEntity& entity);

// canonical_string plus the granularity-specific templates, deduplicated,
// canonical first.
std::vector<std::string> name_variants(const LocationEntity& entity);

struct GranularityCounts {
  std::size_t countries = 0;
  std::size_t admin1 = 0;
  std::size_t cities = 0;
  std::size_t total() const { return countries + admin1 + cities; }
};
GranularityCounts count_granularities(const std::vector<LocationEntity>& entities);

// Filtered-database TSV. The first eight header columns are fixed; admin2 and
// entity_id trail so a round trip loses nothing.
void write_database(std::ostream& out, const std::vector<LocationEntity>& entities);
std::vector<LocationEntity> read_database(std::istream& in);

}  // namespace geolink

#endif  // GEOLINK_GAZETTEER_HPP_
