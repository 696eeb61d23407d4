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

// geolink command-line driver. Every subcommand reads the same TOML config
// (--config); command-line flags override values from the file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geolink/error.hpp"
#include "geolink/eval.hpp"
#include "geolink/gazetteer.hpp"
#include "geolink/index.hpp"
#include "geolink/linker.hpp"
#include "geolink/reverse_geocode.hpp"
#include "geolink/service_client.hpp"
#include "geolink/synthetic.hpp"
#include "geolink/text.hpp"

namespace fs = std::filesystem;
using namespace geolink;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

struct RunConfig {
  // build-db
  std::string gazetteer, admin1_codes, admin2_codes, country_info;
  long long min_population = 15000;
  // shared
  std::string database, mentions, index, provider = "hash:dim=256,seed=0";
  std::string out;
  int threads = 0;
  // build-index
  std::string method = "usergeo";
  bool variants = false;
  bool prune = false;
  double prune_multiplier = 1.0;
  bool prune_exempt_supplemental = true;
  // link
  std::string input, input_format = "lines";
  double threshold = 0.0;
  // evaluate / curve
  std::string predictions, truth;
  std::vector<double> thresholds = kDefaultThresholds;
  long long min_country_examples = 1000;
  // split
  double test_fraction = 0.1;
  long long seed = 0;
  std::string train_out, test_out;
  // synth
  std::string out_dir;
  double noise_fraction = 0.0;
};

std::ifstream open_in(const std::string& path, const char* what) {
  if (path.empty()) throw InputError(std::string("missing path for ") + what);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(std::string("cannot open ") + what + " '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path, const char* what) {
  if (path.empty()) throw InputError(std::string("missing output path for ") + what);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(std::string("cannot write ") + what + " '" + path + "'");
  return out;
}

std::string config_hash(const CLI::App& sub) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(sub.get_name() + "\n" + sub.config_to_str(true, false))));
  return buf;
}

// Sidecar next to plain-text outputs recording how they were produced.
void write_meta(const std::string& output, const CLI::App& sub) {
  nlohmann::json meta = {{"command", sub.get_name()},
                         {"config_hash", config_hash(sub)},
                         {"config", sub.config_to_str(true, false)}};
  auto out = open_out(output + ".meta.json", "metadata sidecar");
  out << meta.dump(2) << '\n';
}

std::vector<LocationEntity> load_database(const std::string& path) {
  auto in = open_in(path, "location database");
  return read_database(in);
}

std::vector<LabeledMention> load_mentions(const std::string& path) {
  auto in = open_in(path, "mentions file");
  return read_mentions(in);
}

void finish(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw InputError("failed writing '" + path + "'");
}

int cmd_build_db(const RunConfig& cfg, const CLI::App& sub) {
  auto dump = open_in(cfg.gazetteer, "gazetteer dump");
  auto admin1 = open_in(cfg.admin1_codes, "admin1 code table");
  auto countries = open_in(cfg.country_info, "country info table");
  std::ifstream admin2;
  if (!cfg.admin2_codes.empty()) admin2 = open_in(cfg.admin2_codes, "admin2 code table");

  GazetteerConfig gconf;
  gconf.min_population = cfg.min_population;
  ParseReport report = parse_gazetteer(dump, admin1, countries, gconf,
                                       cfg.admin2_codes.empty() ? nullptr : &admin2);
  if (report.entities.empty()) {
    throw InputError("gazetteer dump yielded no usable entities");
  }
  const auto entities = filter_entities(std::move(report.entities), gconf);
  auto out = open_out(cfg.out, "location database");
  write_database(out, entities);
  finish(out, cfg.out);
  write_meta(cfg.out, sub);

  const auto counts = count_granularities(entities);
  std::cout << "countries\t" << counts.countries << "\n"
            << "admin1\t" << counts.admin1 << "\n"
            << "cities\t" << counts.cities << "\n"
            << "total\t" << counts.total() << "\n"
            << "lines_read\t" << report.lines_read << "\n"
            << "malformed\t" << report.malformed << "\n"
            << "unclassified\t" << report.unclassified << "\n"
            << "unresolved_admin1\t" << report.unresolved_admin1 << "\n"
            << "unresolved_country\t" << report.unresolved_country << "\n";
  return kExitOk;
}

int cmd_build_index(const RunConfig& cfg, const CLI::App& sub) {
  const auto entities = load_database(cfg.database);
  const auto provider = make_provider(cfg.provider);
  BuildReport report;
  LocationIndex index = [&] {
    if (cfg.method == "namegeo") {
      return build_name_index(entities, *provider, cfg.variants, cfg.threads);
    }
    if (cfg.mentions.empty()) {
      throw InputError("usergeo index needs --mentions");
    }
    PruneConfig prune{cfg.prune, cfg.prune_multiplier, cfg.prune_exempt_supplemental};
    return build_user_index(entities, load_mentions(cfg.mentions), *provider,
                            cfg.variants, prune, cfg.threads, &report);
  }();
  index.set_config_hash(config_hash(sub));
  auto out = open_out(cfg.out, "index");
  index.save(out);
  finish(out, cfg.out);

  std::cout << "entries\t" << index.size() << "\n"
            << "dropped_mentions\t" << report.dropped_mentions << "\n"
            << "prune_clusters\t" << report.prune.clusters << "\n"
            << "prune_candidates\t" << report.prune.non_exempt_members << "\n"
            << "pruned\t" << report.prune.pruned << "\n"
            << "pruned_fraction\t" << format_double(report.prune.pruned_fraction()) << "\n"
            << "mean_cluster_pruned_fraction\t"
            << format_double(report.prune.mean_cluster_fraction) << "\n";
  if (report.dropped_mentions > 0) {
    std::cerr << "warning: dropped " << report.dropped_mentions
              << " mentions whose location is not in the database\n";
  }
  return kExitOk;
}

std::vector<std::string> read_inputs(const RunConfig& cfg) {
  if (cfg.input_format == "mentions") {
    std::vector<std::string> inputs;
    for (auto& m : load_mentions(cfg.input)) inputs.push_back(std::move(m.user_input));
    return inputs;
  }
  auto in = open_in(cfg.input, "input file");
  std::vector<std::string> inputs;
  std::string line;
  while (std::getline(in, line)) inputs.emplace_back(chomp(line));
  return inputs;
}

LocationIndex load_index(const std::string& path) {
  auto in = open_in(path, "index");
  return LocationIndex::load(in);
}

int cmd_link(const RunConfig& cfg, const CLI::App& sub) {
  const LocationIndex index = load_index(cfg.index);
  const auto provider = make_provider(cfg.provider);
  const auto inputs = read_inputs(cfg);
  const auto predictions =
      link_batch(index, *provider, inputs, cfg.threshold, cfg.threads);
  auto out = open_out(cfg.out, "predictions");
  write_predictions(out, inputs, predictions);
  finish(out, cfg.out);
  write_meta(cfg.out, sub);
  std::size_t accepted = 0;
  for (const auto& p : predictions) accepted += p.accepted ? 1 : 0;
  std::cout << "inputs\t" << inputs.size() << "\naccepted\t" << accepted << "\n";
  return kExitOk;
}

struct Aligned {
  std::vector<Prediction> predictions;
  std::vector<LocationTriple> truths;
};

Aligned load_aligned(const RunConfig& cfg) {
  auto pin = open_in(cfg.predictions, "predictions file");
  auto records = read_predictions(pin);
  auto truths = load_mentions(cfg.truth);
  if (records.size() != truths.size()) {
    throw InputError("predictions (" + std::to_string(records.size()) +
                     ") and truth mentions (" + std::to_string(truths.size()) +
                     ") differ in length");
  }
  Aligned a;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].input != truths[i].user_input) {
      throw InputError("predictions and truth disagree at line " +
                       std::to_string(i + 1) + ": '" + records[i].input +
                       "' vs '" + truths[i].user_input + "'");
    }
    a.predictions.push_back(std::move(records[i].prediction));
    a.truths.push_back(std::move(truths[i].truth));
  }
  if (a.predictions.empty()) throw InputError("no predictions to evaluate");
  return a;
}

int cmd_evaluate(const RunConfig& cfg, const CLI::App& sub) {
  const Aligned a = load_aligned(cfg);
  std::optional<LocationIndex> index;
  if (!cfg.index.empty()) index = load_index(cfg.index);
  nlohmann::json report = evaluation_report(
      a.predictions, a.truths, static_cast<std::size_t>(cfg.min_country_examples),
      cfg.thresholds, index ? &*index : nullptr);
  report["config_hash"] = config_hash(sub);
  auto out = open_out(cfg.out, "report");
  out << report.dump(2) << '\n';
  finish(out, cfg.out);
  for (Level level : kAllLevels) {
    const auto& m = report["metrics"][std::string(to_string(level))];
    std::cout << to_string(level) << "\taccuracy=" << m["accuracy"].dump()
              << "\tcoverage=" << m["coverage"].dump()
              << "\tprecision=" << m["precision"].dump() << "\n";
  }
  return kExitOk;
}

int cmd_curve(const RunConfig& cfg, const CLI::App& sub) {
  const Aligned a = load_aligned(cfg);
  std::map<Level, std::vector<CurvePoint>> curves;
  for (Level level : kAllLevels) {
    curves[level] =
        precision_coverage_curve(a.predictions, a.truths, level, cfg.thresholds);
  }
  auto out = open_out(cfg.out, "curve");
  write_curve_csv(out, curves);
  finish(out, cfg.out);
  write_meta(cfg.out, sub);
  return kExitOk;
}

int cmd_reverse_geocode(const RunConfig& cfg, const CLI::App& sub) {
  std::vector<LocationEntity> cities;
  for (auto& e : load_database(cfg.database)) {
    if (e.granularity == Granularity::City) cities.push_back(std::move(e));
  }
  const CityLocator locator(std::move(cities));
  auto in = open_in(cfg.input, "coordinate file");
  auto out = open_out(cfg.out, "reverse-geocode output");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = chomp(line);
    if (view.empty()) continue;
    auto f = split(view, '\t');
    if (f.size() < 2) {
      throw InputError("coordinate line " + std::to_string(line_no) +
                       ": expected lat<TAB>lon");
    }
    const GeoPoint p{parse_double(f[0]), parse_double(f[1])};
    const LocationEntity& city = locator.nearest(p);
    out << f[0] << '\t' << f[1] << '\t' << escape_field(city.name) << '\t'
        << escape_field(city.admin1_name) << '\t' << city.country_code << '\n';
  }
  finish(out, cfg.out);
  write_meta(cfg.out, sub);
  return kExitOk;
}

int cmd_split(const RunConfig& cfg, const CLI::App& sub) {
  auto [train, test] = split_train_test(load_mentions(cfg.mentions),
                                        cfg.test_fraction,
                                        static_cast<std::uint64_t>(cfg.seed));
  auto train_out = open_out(cfg.train_out, "train split");
  write_mentions(train_out, train);
  finish(train_out, cfg.train_out);
  auto test_out = open_out(cfg.test_out, "test split");
  write_mentions(test_out, test);
  finish(test_out, cfg.test_out);
  write_meta(cfg.train_out, sub);
  write_meta(cfg.test_out, sub);
  std::cout << "train\t" << train.size() << "\ntest\t" << test.size() << "\n";
  return kExitOk;
}

int cmd_synth(const RunConfig& cfg, const CLI::App& sub) {
  SyntheticConfig sconf;
  sconf.seed = static_cast<std::uint64_t>(cfg.seed);
  sconf.noise_fraction = cfg.noise_fraction;
  const auto corpus = generate_synthetic_corpus(sconf);
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  auto write = [&](const char* name, const std::string& body) {
    const std::string path = (dir / name).string();
    auto out = open_out(path, name);
    out << body;
    finish(out, path);
  };
  write("geonames.txt", corpus.dump);
  write("admin1CodesASCII.txt", corpus.admin1_codes);
  write("countryInfo.txt", corpus.country_info);
  std::ostringstream mentions;
  write_mentions(mentions, corpus.mentions);
  write("mentions.tsv", mentions.str());
  write_meta((dir / "mentions.tsv").string(), sub);
  std::cout << "mentions\t" << corpus.mentions.size() << "\nnoisy\t"
            << corpus.noisy_mentions << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geo-entity linking over location embeddings"};
  app.set_config("--config", "", "TOML config file; flags override its values");
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;

  auto* build_db = app.add_subcommand("build-db", "Filter a GeoNames dump into a location database");
  build_db->add_option("--gazetteer", cfg.gazetteer, "GeoNames main dump")->required();
  build_db->add_option("--admin1", cfg.admin1_codes, "admin1CodesASCII table")->required();
  build_db->add_option("--admin2", cfg.admin2_codes, "admin2Codes table");
  build_db->add_option("--country-info", cfg.country_info, "countryInfo table")->required();
  build_db->add_option("--min-population", cfg.min_population, "Smallest city kept")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  build_db->add_option("--out", cfg.out, "Output database TSV")->required();

  auto* build_index = app.add_subcommand("build-index", "Embed locations into an index");
  build_index->add_option("--db", cfg.database, "Location database TSV")->required();
  build_index->add_option("--provider", cfg.provider, "Embedding provider spec")->capture_default_str();
  build_index->add_option("--method", cfg.method, "namegeo or usergeo")
      ->capture_default_str()->check(CLI::IsMember({"namegeo", "usergeo"}));
  build_index->add_option("--mentions", cfg.mentions, "Labeled mentions TSV (usergeo)");
  build_index->add_flag("--variants,!--no-variants", cfg.variants, "Add name variants");
  build_index->add_flag("--prune,!--no-prune", cfg.prune, "Drop outlier mentions");
  build_index->add_option("--prune-multiplier", cfg.prune_multiplier,
                          "Prune beyond this multiple of the mean squared distance")
      ->capture_default_str()->check(CLI::PositiveNumber);
  build_index->add_flag("--prune-exempt-supplemental,!--prune-supplemental",
                        cfg.prune_exempt_supplemental,
                        "Never prune canonical/variant strings");
  build_index->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
  build_index->add_option("--out", cfg.out, "Output index file")->required();

  auto* link_cmd = app.add_subcommand("link", "Link user inputs to locations");
  link_cmd->add_option("--index", cfg.index, "Index file")->required();
  link_cmd->add_option("--provider", cfg.provider, "Embedding provider spec")->capture_default_str();
  link_cmd->add_option("--input", cfg.input, "One user input per line")->required();
  link_cmd->add_option("--input-format", cfg.input_format, "lines or mentions")
      ->capture_default_str()->check(CLI::IsMember({"lines", "mentions"}));
  link_cmd->add_option("--threshold", cfg.threshold, "Minimum cosine similarity")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  link_cmd->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
  link_cmd->add_option("--out", cfg.out, "Predictions TSV")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against truth");
  evaluate->add_option("--predictions", cfg.predictions, "Predictions TSV")->required();
  evaluate->add_option("--truth", cfg.truth, "Labeled mentions TSV aligned with predictions")->required();
  evaluate->add_option("--index", cfg.index, "Index for mention-bucket analysis");
  evaluate->add_option("--thresholds", cfg.thresholds, "Curve thresholds")->capture_default_str();
  evaluate->add_option("--min-country-examples", cfg.min_country_examples,
                       "Countries with fewer truth examples are left out of F1")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  evaluate->add_option("--out", cfg.out, "Report JSON")->required();

  auto* curve = app.add_subcommand("curve", "Precision-coverage curve as CSV");
  curve->add_option("--predictions", cfg.predictions, "Predictions TSV (threshold 0)")->required();
  curve->add_option("--truth", cfg.truth, "Labeled mentions TSV aligned with predictions")->required();
  curve->add_option("--thresholds", cfg.thresholds, "Thresholds")->capture_default_str();
  curve->add_option("--out", cfg.out, "Curve CSV")->required();

  auto* reverse = app.add_subcommand("reverse-geocode", "Nearest city for lat/lon pairs");
  reverse->add_option("--db", cfg.database, "Location database TSV")->required();
  reverse->add_option("--input", cfg.input, "lat<TAB>lon per line")->required();
  reverse->add_option("--out", cfg.out, "Output TSV")->required();

  auto* split_cmd = app.add_subcommand("split", "Seeded train/test split of mentions");
  split_cmd->add_option("--mentions", cfg.mentions, "Labeled mentions TSV")->required();
  split_cmd->add_option("--test-fraction", cfg.test_fraction, "Share held out")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--seed", cfg.seed, "Shuffle seed")->capture_default_str();
  split_cmd->add_option("--train-out", cfg.train_out, "Train mentions TSV")->required();
  split_cmd->add_option("--test-out", cfg.test_out, "Test mentions TSV")->required();

  auto* synth = app.add_subcommand("synth", "Write the synthetic demo corpus");
  synth->add_option("--out-dir", cfg.out_dir, "Directory for the corpus files")->required();
  synth->add_option("--seed", cfg.seed, "Generator seed")->default_val(2024);
  synth->add_option("--noise-fraction", cfg.noise_fraction, "Share of off-topic mentions")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*build_db) return cmd_build_db(cfg, *build_db);
    if (*build_index) return cmd_build_index(cfg, *build_index);
    if (*link_cmd) return cmd_link(cfg, *link_cmd);
    if (*evaluate) return cmd_evaluate(cfg, *evaluate);
    if (*curve) return cmd_curve(cfg, *curve);
    if (*reverse) return cmd_reverse_geocode(cfg, *reverse);
    if (*split_cmd) return cmd_split(cfg, *split_cmd);
    if (*synth) return cmd_synth(cfg, *synth);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ProviderError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
