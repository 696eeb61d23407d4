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

#include "geolink/gazetteer.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "geolink/error.hpp"
#include "geolink/text.hpp"

namespace geolink {
namespace {

constexpr std::size_t kMinDumpFields = 15;

enum DumpField {
  kId = 0,
  kName = 1,
  kAsciiName = 2,
  kLatitude = 4,
  kLongitude = 5,
  kFeatureClass = 6,
  kFeatureCode = 7,
  kCountryCode = 8,
  kAdmin1 = 10,
  kAdmin2 = 11,
  kPopulation = 14,
};

bool is_country_code(std::string_view code) {
  return code.size() == 2 && code[0] >= 'A' && code[0] <= 'Z' &&
         code[1] >= 'A' && code[1] <= 'Z';
}

void require_readable(std::istream& in, const char* what) {
  if (!in.good()) throw InputError(std::string("cannot read ") + what);
}

// "key<TAB>name..." tables: admin1CodesASCII.txt / admin2Codes.txt.
std::unordered_map<std::string, std::string> read_code_table(std::istream& in) {
  std::unordered_map<std::string, std::string> table;
  std::string line;
  while (std::getline(in, line)) {
    auto view = chomp(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split(view, '\t');
    if (fields.size() < 2 || fields[0].empty()) continue;
    table.emplace(std::string(fields[0]), std::string(fields[1]));
  }
  if (in.bad()) throw InputError("read error in code table");
  return table;
}

std::unordered_map<std::string, std::string> read_country_info(std::istream& in) {
  std::unordered_map<std::string, std::string> table;
  std::string line;
  while (std::getline(in, line)) {
    auto view = chomp(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split(view, '\t');
    if (fields.size() < 5 || !is_country_code(fields[0])) continue;
    table.emplace(std::string(fields[0]), std::string(fields[4]));
  }
  if (in.bad()) throw InputError("read error in country info table");
  return table;
}

std::string join_nonempty(std::initializer_list<std::string_view> parts,
                          std::string_view sep) {
  std::string out;
  for (auto part : parts) {
    if (part.empty()) continue;
    if (!out.empty()) out += sep;
    out += part;
  }
  return out;
}

}  // namespace

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::Country: return "country";
    case Granularity::Admin1: return "admin1";
    case Granularity::City: return "city";
  }
  return "city";
}

Granularity granularity_from_string(std::string_view name) {
  if (name == "country") return Granularity::Country;
  if (name == "admin1") return Granularity::Admin1;
  if (name == "city") return Granularity::City;
  throw InputError("unknown granularity '" + std::string(name) + "'");
}

LocationTriple::LocationTriple(std::string_view city, std::string_view admin1,
                               std::string_view country)
    : city_(normalize_name(city)),
      admin1_(normalize_name(admin1)),
      country_(normalize_name(country)) {
  if ((!city_.empty() && admin1_.empty()) ||
      (!admin1_.empty() && country_.empty())) {
    throw InputError("location triple has a hierarchy gap: (" + city_ + ", " +
                     admin1_ + ", " + country_ + ")");
  }
}

LocationTriple triple_of(const LocationEntity& entity) {
  switch (entity.granularity) {
    case Granularity::Country:
      return {"", "", entity.country_code};
    case Granularity::Admin1:
      return {"", entity.admin1_name, entity.country_code};
    case Granularity::City:
      break;
  }
  return {entity.name, entity.admin1_name, entity.country_code};
}

ParseReport parse_gazetteer(std::istream& dump, std::istream& admin1_codes,
                            std::istream& country_info,
                            const GazetteerConfig& config,
                            std::istream* admin2_codes) {
  require_readable(dump, "gazetteer dump");
  require_readable(admin1_codes, "admin1 code table");
  require_readable(country_info, "country info table");
  if (config.min_population < 0) {
    throw InputError("min_population must be non-negative");
  }

  const auto admin1_names = read_code_table(admin1_codes);
  const auto countries = read_country_info(country_info);
  std::unordered_map<std::string, std::string> admin2_names;
  if (admin2_codes != nullptr) {
    require_readable(*admin2_codes, "admin2 code table");
    admin2_names = read_code_table(*admin2_codes);
  }
  const FeatureCodeMap& codes = config.feature_codes;

  ParseReport report;
  std::string line;
  while (std::getline(dump, line)) {
    ++report.lines_read;
    auto view = chomp(line);
    if (view.empty()) {
      ++report.malformed;
      continue;
    }
    auto f = split(view, '\t');
    if (f.size() < kMinDumpFields || f[kName].empty() ||
        !is_country_code(f[kCountryCode])) {
      ++report.malformed;
      continue;
    }

    LocationEntity e;
    try {
      e.entity_id = parse_int(f[kId]);
      e.latitude = parse_double(f[kLatitude]);
      e.longitude = parse_double(f[kLongitude]);
      e.population = f[kPopulation].empty() ? 0 : parse_int(f[kPopulation]);
    } catch (const InputError&) {
      ++report.malformed;
      continue;
    }
    if (e.latitude < -90.0 || e.latitude > 90.0 || e.longitude < -180.0 ||
        e.longitude > 180.0 || e.population < 0) {
      ++report.malformed;
      continue;
    }

    const std::string feature_class(f[kFeatureClass]);
    const std::string feature_code(f[kFeatureCode]);
    if (feature_class == codes.country_class &&
        codes.country_codes.contains(feature_code)) {
      e.granularity = Granularity::Country;
    } else if (feature_class == codes.admin1_class &&
               codes.admin1_codes.contains(feature_code)) {
      e.granularity = Granularity::Admin1;
    } else if (codes.city_classes.contains(feature_class)) {
      e.granularity = Granularity::City;
    } else {
      ++report.unclassified;
      continue;
    }

    e.name = std::string(f[kName]);
    e.ascii_name = std::string(f[kAsciiName]);
    e.country_code = std::string(f[kCountryCode]);
    if (auto it = countries.find(e.country_code); it != countries.end()) {
      e.country_name = it->second;
    } else {
      ++report.unresolved_country;
      e.country_name = e.granularity == Granularity::Country ? e.name
                                                             : e.country_code;
    }

    if (e.granularity != Granularity::Country) {
      e.admin1_code = std::string(f[kAdmin1]);
      const std::string key = e.country_code + "." + e.admin1_code;
      if (auto it = admin1_names.find(key); it != admin1_names.end()) {
        e.admin1_name = it->second;
      } else {
        ++report.unresolved_admin1;
        e.admin1_name =
            e.granularity == Granularity::Admin1 ? e.name : e.admin1_code;
      }
      if (e.admin1_name.empty()) {
        // A city with no first-level region cannot form a valid triple.
        ++report.malformed;
        continue;
      }
    }
    if (e.granularity == Granularity::City && !f[kAdmin2].empty()) {
      const std::string key = e.country_code + "." + e.admin1_code + "." +
                              std::string(f[kAdmin2]);
      if (auto it = admin2_names.find(key); it != admin2_names.end()) {
        e.admin2_name = it->second;
      }
    }
    report.entities.push_back(std::move(e));
  }
  if (dump.bad()) throw InputError("read error in gazetteer dump");
  return report;
}

std::vector<LocationEntity> filter_entities(std::vector<LocationEntity> entities,
                                            const GazetteerConfig& config) {
  std::map<LocationTriple, LocationEntity> best;
  for (auto& e : entities) {
    if (e.granularity == Granularity::City &&
        e.population < config.min_population) {
      continue;
    }
    LocationTriple key = triple_of(e);
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(std::move(key), std::move(e));
      continue;
    }
    const LocationEntity& kept = it->second;
    if (e.population > kept.population ||
        (e.population == kept.population && e.entity_id < kept.entity_id)) {
      it->second = std::move(e);
    }
  }
  std::vector<LocationEntity> out;
  out.reserve(best.size());
  for (auto& [key, e] : best) out.push_back(std::move(e));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.entity_id < b.entity_id;
  });
  return out;
}

std::string canonical_string(const LocationEntity& e) {
  switch (e.granularity) {
    case Granularity::Country:
      return join_nonempty({e.country_name, e.country_code}, ", ");
    case Granularity::Admin1:
      return join_nonempty({e.admin1_name, e.country_name, e.country_code},
                           ", ");
    case Granularity::City:
      break;
  }
  return join_nonempty(
      {e.name, e.admin2_name, e.admin1_name, e.country_name, e.country_code},
      ", ");
}

std::vector<std::string> name_variants(const LocationEntity& e) {
  std::vector<std::string> candidates{canonical_string(e)};
  switch (e.granularity) {
    case Granularity::Country:
      candidates.push_back(e.country_name);
      break;
    case Granularity::Admin1:
      candidates.push_back(e.admin1_name);
      candidates.push_back(join_nonempty({e.admin1_name, e.country_name}, " in "));
      candidates.push_back(join_nonempty({e.country_name, e.admin1_name}, " / "));
      break;
    case Granularity::City:
      candidates.push_back(e.name);
      candidates.push_back(join_nonempty(
          {e.name, e.admin2_name, e.admin1_name, e.country_name}, " in "));
      candidates.push_back(join_nonempty({e.admin1_name, e.name}, " / "));
      candidates.push_back(join_nonempty({e.country_name, e.name}, " / "));
      break;
  }
  std::vector<std::string> out;
  for (auto& c : candidates) {
    if (c.empty() || std::find(out.begin(), out.end(), c) != out.end()) continue;
    out.push_back(std::move(c));
  }
  return out;
}

GranularityCounts count_granularities(const std::vector<LocationEntity>& entities) {
  GranularityCounts counts;
  for (const auto& e : entities) {
    switch (e.granularity) {
      case Granularity::Country: ++counts.countries; break;
      case Granularity::Admin1: ++counts.admin1; break;
      case Granularity::City: ++counts.cities; break;
    }
  }
  return counts;
}

namespace {
constexpr std::string_view kDatabaseHeader =
    "city\tadmin1\tcountry\tcountry_code\tlat\tlon\tpopulation\tgranularity";
constexpr std::string_view kDatabaseExtraColumns = "\tadmin2\tentity_id";
}  // namespace

void write_database(std::ostream& out, const std::vector<LocationEntity>& entities) {
  out << kDatabaseHeader << kDatabaseExtraColumns << '\n';
  for (const auto& e : entities) {
    const bool city = e.granularity == Granularity::City;
    const bool admin = e.granularity != Granularity::Country;
    out << escape_field(city ? e.name : "") << '\t'
        << escape_field(admin ? e.admin1_name : "") << '\t'
        << escape_field(e.country_name) << '\t' << e.country_code << '\t'
        << format_double(e.latitude) << '\t' << format_double(e.longitude)
        << '\t' << e.population << '\t' << to_string(e.granularity) << '\t'
        << escape_field(city ? e.admin2_name : "") << '\t' << e.entity_id
        << '\n';
  }
}

std::vector<LocationEntity> read_database(std::istream& in) {
  require_readable(in, "location database");
  std::string line;
  if (!std::getline(in, line) ||
      !chomp(line).starts_with(kDatabaseHeader)) {
    throw InputError("location database: missing or unexpected header");
  }
  std::vector<LocationEntity> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = chomp(line);
    if (view.empty()) continue;
    auto f = split(view, '\t');
    if (f.size() < 8) {
      throw InputError("location database line " + std::to_string(line_no) +
                       ": expected at least 8 fields");
    }
    LocationEntity e;
    e.granularity = granularity_from_string(f[7]);
    e.country_name = unescape_field(f[2]);
    e.country_code = std::string(f[3]);
    if (!is_country_code(e.country_code)) {
      throw InputError("location database line " + std::to_string(line_no) +
                       ": bad country code");
    }
    e.latitude = parse_double(f[4]);
    e.longitude = parse_double(f[5]);
    e.population = parse_int(f[6]);
    e.admin1_name = unescape_field(f[1]);
    switch (e.granularity) {
      case Granularity::Country: e.name = e.country_name; break;
      case Granularity::Admin1: e.name = e.admin1_name; break;
      case Granularity::City: e.name = unescape_field(f[0]); break;
    }
    e.ascii_name = e.name;
    if (f.size() > 8) e.admin2_name = unescape_field(f[8]);
    e.entity_id = f.size() > 9 ? parse_int(f[9])
                               : static_cast<std::int64_t>(out.size());
    out.push_back(std::move(e));
  }
  if (in.bad()) throw InputError("read error in location database");
  return out;
}

}  // namespace geolink
