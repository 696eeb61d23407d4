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

#include "geolink/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "geolink/error.hpp"
#include "geolink/text.hpp"

namespace geolink {
namespace {

constexpr const char* kOnsets[] = {"b",  "d",  "f",  "g",  "k",  "l",  "m",
                                   "n",  "p",  "r",  "s",  "t",  "v",  "z",
                                   "br", "kr", "st", "tr", "sh", "ch", "gl"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ia", "ou", "ei"};
constexpr const char* kCodas[] = {"", "", "", "n", "r", "s", "l", "k", "m"};

constexpr const char* kPrefixes[] = {"📍 ", "i ❤ ", "born in ", "living in ",
                                     "the ", "#", "~ "};
constexpr const char* kSuffixes[] = {" 🌍", "!!", " baby", " forever",
                                     " ✈", " <3", "."};
constexpr const char* kSeparators[] = {", ", " / ", " | ", " - ", "/", " "};
constexpr const char* kOffTopic[] = {
    "worldwide",          "where the wild things are", "somewhere over the rainbow",
    "in my head",         "planet earth",              "the internet",
    "your heart",         "follow me",                 "dreamland",
    "between the lines",  "on the road",               "everywhere and nowhere"};

// Deterministic helpers over mt19937_64; the standard distributions are not
// reproducible across library implementations.
class Dice {
 public:
  explicit Dice(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = rng_();
    } while (x >= limit);
    return x % bound;
  }
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  template <typename T, std::size_t N>
  const T& pick(const T (&items)[N]) {
    return items[below(N)];
  }

 private:
  std::mt19937_64 rng_;
};

std::string capitalize(std::string word) {
  if (!word.empty() && word[0] >= 'a' && word[0] <= 'z') word[0] -= 32;
  return word;
}

class NameMaker {
 public:
  explicit NameMaker(Dice& dice) : dice_(dice) {}

  std::string next(int min_syllables, int max_syllables) {
    while (true) {
      const int syllables =
          min_syllables + static_cast<int>(dice_.below(max_syllables - min_syllables + 1));
      std::string word;
      for (int s = 0; s < syllables; ++s) {
        word += dice_.pick(kOnsets);
        word += dice_.pick(kVowels);
        if (s + 1 == syllables) word += dice_.pick(kCodas);
      }
      word = capitalize(word);
      if (used_.insert(word).second) return word;
    }
  }

 private:
  Dice& dice_;
  std::set<std::string> used_;
};

struct Place {
  LabeledMention identity;  // truth triple
  Granularity granularity;
  std::string city;
  std::string admin1;
  std::string country;
  std::string code;
  std::string alias;
};

std::string swap_case(const std::string& s, bool upper) {
  std::string out = s;
  for (char& c : out) {
    if (upper && c >= 'a' && c <= 'z') c -= 32;
    if (!upper && c >= 'A' && c <= 'Z') c += 32;
  }
  return out;
}

std::string typo(Dice& dice, std::string s) {
  std::vector<std::size_t> letters;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) letters.push_back(i);
  }
  if (letters.size() < 4) return s;
  const std::size_t at = letters[dice.below(letters.size() - 1)];
  if (dice.chance(0.5)) {
    s.erase(at, 1);
  } else if (at + 1 < s.size()) {
    std::swap(s[at], s[at + 1]);
  }
  return s;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

std::string mention_for(Dice& dice, const Place& p, double alias_fraction) {
  std::vector<std::string> parts;
  if (dice.chance(alias_fraction)) {
    parts.push_back(p.alias);
    if (dice.chance(0.3)) parts.push_back(p.country);
  } else {
    switch (p.granularity) {
      case Granularity::Country:
        parts.push_back(dice.chance(0.2) ? p.code : p.country);
        break;
      case Granularity::Admin1:
        switch (dice.below(4)) {
          case 0: parts = {p.admin1}; break;
          case 1: parts = {p.admin1, p.country}; break;
          case 2: parts = {p.country, p.admin1}; break;
          default: parts = {p.admin1, p.code};
        }
        break;
      case Granularity::City:
        switch (dice.below(7)) {
          case 0: parts = {p.city}; break;
          case 1: parts = {p.city, p.admin1}; break;
          case 2: parts = {p.city, p.country}; break;
          case 3: parts = {p.city, p.code}; break;
          case 4: parts = {p.admin1, p.city}; break;
          case 5: parts = {p.country, p.city}; break;
          default: parts = {p.city, p.admin1, p.country};
        }
        break;
    }
  }
  std::string text = join(parts, dice.pick(kSeparators));
  if (dice.chance(0.3)) text = swap_case(text, true);
  else if (dice.chance(0.3)) text = swap_case(text, false);
  if (dice.chance(0.2)) text = typo(dice, text);
  if (dice.chance(0.3)) text = dice.pick(kPrefixes) + text;
  if (dice.chance(0.3)) text += dice.pick(kSuffixes);
  return text;
}

std::string off_topic(Dice& dice, NameMaker& names) {
  if (dice.chance(0.6)) return dice.pick(kOffTopic);
  return swap_case(names.next(2, 4), false) + " " + swap_case(names.next(1, 3), false);
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config) {
  if (config.countries < 1 || config.admin1_per_country < 1 ||
      config.cities < 1 || config.mentions < 0 || config.noise_fraction < 0.0 ||
      config.noise_fraction > 1.0) {
    throw InputError("invalid synthetic corpus configuration");
  }
  Dice dice(config.seed);
  NameMaker names(dice);
  SyntheticCorpus corpus;
  std::ostringstream dump;
  std::ostringstream admin1;
  std::ostringstream info;
  info << "#ISO\tISO3\tISO-Numeric\tfips\tCountry\tCapital\n";

  std::vector<Place> places;
  std::set<std::string> codes;
  std::int64_t next_id = 1000;
  auto emit = [&](const std::string& name, double lat, double lon,
                  const char* fclass, const char* fcode, const std::string& cc,
                  const std::string& a1, std::int64_t population) {
    dump << next_id++ << '\t' << name << '\t' << name << "\t\t"
         << format_double(std::round(lat * 1e5) / 1e5) << '\t'
         << format_double(std::round(lon * 1e5) / 1e5) << '\t' << fclass
         << '\t' << fcode << '\t' << cc << "\t\t" << a1 << "\t\t\t\t"
         << population << "\t\t0\tEtc/UTC\t2024-01-01\n";
  };

  struct AdminRef {
    std::size_t place;
    double lat, lon;
    std::string a1code;
  };
  std::vector<AdminRef> admins;
  for (int c = 0; c < config.countries; ++c) {
    std::string code;
    do {
      code = {static_cast<char>('A' + dice.below(26)),
              static_cast<char>('A' + dice.below(26))};
    } while (!codes.insert(code).second);
    const std::string country = names.next(2, 3);
    const double lat = dice.range(-55.0, 65.0);
    const double lon = dice.range(-170.0, 170.0);
    info << code << "\tX" << code << '\t' << c << "\t" << code << '\t'
         << country << "\tCapital\n";
    emit(country, lat, lon, "A", "PCLI", code, "00",
         static_cast<std::int64_t>(dice.range(1e6, 9e7)));
    Place cp{{"", LocationTriple("", "", code)}, Granularity::Country, "", "",
             country, code, names.next(2, 3)};
    places.push_back(cp);

    for (int a = 0; a < config.admin1_per_country; ++a) {
      const std::string a1code = (a < 9 ? "0" : "") + std::to_string(a + 1);
      const std::string region = names.next(2, 3);
      const double alat = std::clamp(lat + dice.range(-3.0, 3.0), -89.0, 89.0);
      const double alon = std::clamp(lon + dice.range(-3.0, 3.0), -179.0, 179.0);
      admin1 << code << '.' << a1code << '\t' << region << '\t' << region
             << '\t' << next_id << '\n';
      emit(region, alat, alon, "A", "ADM1", code, a1code, 0);
      places.push_back({{"", LocationTriple("", region, code)},
                        Granularity::Admin1, "", region, country, code,
                        names.next(2, 3)});
      admins.push_back({places.size() - 1, alat, alon, a1code});
    }
  }

  auto add_city = [&](bool keep) {
    const AdminRef& a = admins[dice.below(admins.size())];
    const Place& region = places[a.place];
    const std::string city = names.next(2, 4);
    const double lat = std::clamp(a.lat + dice.range(-1.0, 1.0), -89.9, 89.9);
    const double lon = std::clamp(a.lon + dice.range(-1.0, 1.0), -179.9, 179.9);
    const auto population = keep
        ? static_cast<std::int64_t>(15000 + dice.below(2000000))
        : static_cast<std::int64_t>(dice.below(15000));
    emit(city, lat, lon, "P", "PPL", region.code, a.a1code, population);
    if (keep) {
      places.push_back({{"", LocationTriple(city, region.admin1, region.code)},
                        Granularity::City, city, region.admin1, region.country,
                        region.code, names.next(2, 3)});
    }
  };
  for (int i = 0; i < config.cities; ++i) add_city(true);
  for (int i = 0; i < config.small_cities; ++i) add_city(false);

  // Zipf-like popularity over a shuffled order of places.
  std::vector<std::size_t> order(places.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[dice.below(i + 1)]);
  }
  std::vector<double> cumulative(places.size());
  double total = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), 0.9);
    cumulative[r] = total;
  }
  for (int m = 0; m < config.mentions; ++m) {
    const double u = dice.unit() * total;
    const auto rank = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), u) -
        cumulative.begin());
    const Place& p = places[order[std::min(rank, order.size() - 1)]];
    LabeledMention mention{"", p.identity.truth};
    if (dice.chance(config.noise_fraction)) {
      mention.user_input = off_topic(dice, names);
      ++corpus.noisy_mentions;
    } else {
      mention.user_input = mention_for(dice, p, config.alias_fraction);
    }
    corpus.mentions.push_back(std::move(mention));
  }

  corpus.dump = dump.str();
  corpus.admin1_codes = admin1.str();
  corpus.country_info = info.str();
  return corpus;
}

}  // namespace geolink
