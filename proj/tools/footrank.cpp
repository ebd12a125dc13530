// footrank: rate soccer teams, forecast outcomes, and backtest forecasters
// on promotion/relegation league data.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "footrank/backtest.hpp"
#include "footrank/config.hpp"
#include "footrank/csv.hpp"
#include "footrank/dataset.hpp"
#include "footrank/error.hpp"
#include "footrank/mathx.hpp"
#include "footrank/probit.hpp"
#include "footrank/ratings.hpp"
#include "footrank/report.hpp"
#include "footrank/valuation.hpp"

namespace fs = std::filesystem;
using namespace footrank;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;       // usage or data error
constexpr int kExitInfeasible = 3;  // experiment cannot run on this data

ExperimentConfig load_config_or_default(const std::string& path,
                                        const MatchStore* store) {
  if (!path.empty()) return ExperimentConfig::load(path);
  // Default: every league and season found in the store, all models.
  ExperimentConfig cfg;
  if (store) {
    for (const auto& code : store->leagues())
      cfg.leagues.push_back({code, 1, ""});
    int lo = 0, hi = 0;
    bool first = true;
    for (const auto& code : store->leagues())
      for (int s : store->seasons_of(code)) {
        if (first || s < lo) lo = s;
        if (first || s > hi) hi = s;
        first = false;
      }
    cfg.first_season = lo;
    cfg.last_season = hi;
  }
  return cfg;
}

// Every command that writes artifacts also leaves a manifest naming its
// exact inputs, so a run can be reproduced from the manifest alone.
void write_cli_manifest(const fs::path& out_dir, const std::string& command,
                        nlohmann::json inputs) {
  nlohmann::json doc;
  doc["artifact_version"] = kArtifactVersion;
  doc["command"] = command;
  doc["inputs"] = std::move(inputs);
  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  if (!out)
    throw Error("cannot write manifest in '" + out_dir.string() + "'");
  out << doc.dump(2) << "\n";
}

std::string checksum_hex(const fs::path& path) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(file_checksum(path)));
  return buf;
}

std::vector<std::string> read_team_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open exclude file '" + path.string() + "'");
  std::vector<std::string> teams;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) teams.push_back(line);
  }
  return teams;
}

// <league>_<season>.csv lets files without league/season columns declare
// them through the name.
std::optional<std::pair<std::string, int>> parse_file_name(
    const fs::path& path) {
  std::string stem = path.stem().string();
  auto sep = stem.rfind('_');
  if (sep == std::string::npos || sep + 1 >= stem.size()) return std::nullopt;
  std::string tail = stem.substr(sep + 1);
  if (tail.size() != 4 ||
      !std::all_of(tail.begin(), tail.end(),
                   [](char c) { return c >= '0' && c <= '9'; }))
    return std::nullopt;
  return std::make_pair(stem.substr(0, sep), std::stoi(tail));
}

int cmd_ingest(const std::string& data_dir, const std::string& out_dir,
               const std::string& config_path) {
  ExperimentConfig cfg = load_config_or_default(config_path, nullptr);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(data_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw Error("no .csv files in '" + data_dir + "'");

  MatchStore store;
  std::map<std::string, std::string> id_sources;
  for (const auto& file : files) {
    std::vector<MatchRecord> records;
    if (auto named = parse_file_name(file))
      records = ingest_matches(file, named->first, named->second, cfg.csv);
    else
      records = ingest_file(file, cfg.csv);
    for (const auto& m : records) {
      auto [it, fresh] = id_sources.emplace(m.match_id, file.string());
      if (!fresh)
        throw Error("duplicate match_id '" + m.match_id + "' in '" +
                    file.string() + "' and '" + it->second + "'");
    }
    store.add(std::move(records));
  }

  fs::create_directories(out_dir);
  save_store(store, fs::path(out_dir) / "store.csv");

  nlohmann::json inputs;
  inputs["config"] = config_path.empty()
                         ? nlohmann::json()
                         : nlohmann::json::parse(cfg.to_json_text());
  nlohmann::json file_list = nlohmann::json::array();
  for (const auto& file : files)
    file_list.push_back({{"path", file.string()},
                         {"checksum_fnv1a", checksum_hex(file)}});
  inputs["files"] = file_list;
  inputs["store_checksum_fnv1a"] =
      checksum_hex(fs::path(out_dir) / "store.csv");
  write_cli_manifest(out_dir, "ingest", inputs);

  auto rows = dataset_summary(store);
  std::cout << summary_csv(rows);
  std::cerr << "wrote " << (fs::path(out_dir) / "store.csv").string() << " ("
            << store.size() << " matches)\n";
  return kExitOk;
}

int cmd_summary(const std::string& store_path,
                const std::string& transform_check) {
  MatchStore store = load_store(store_path);
  if (transform_check.empty()) {
    auto rows = dataset_summary(store);
    std::cout << summary_csv(rows);
    return kExitOk;
  }

  // Diagnostic: compare candidate normalizing transforms on one
  // league-season's team mean lineup values.
  auto sep = transform_check.rfind(':');
  if (sep == std::string::npos)
    throw Error("--transform-check expects LEAGUE:SEASON");
  std::string league = transform_check.substr(0, sep);
  int season = parse_int(transform_check.substr(sep + 1));

  auto matches = store.league_season(league, season);
  if (matches.empty())
    throw Error("no matches for " + league + " season " +
                std::to_string(season));
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& m : matches) {
    if (m.home_lineup_value) {
      sums[m.home_team].first += *m.home_lineup_value;
      sums[m.home_team].second++;
    }
    if (m.away_lineup_value) {
      sums[m.away_team].first += *m.away_lineup_value;
      sums[m.away_team].second++;
    }
  }
  std::vector<double> means;
  for (const auto& [team, sum] : sums)
    means.push_back(sum.first / static_cast<double>(sum.second));
  if (means.size() < 3)
    throw Error("not enough valued teams for a transform check");

  auto fitted = fit_boxcox(means);
  struct Candidate {
    const char* name;
    double lambda;
  } candidates[] = {{"identity", 1.0},
                    {"sqrt", 0.5},
                    {"log", 0.0},
                    {"boxcox", fitted.lambda}};
  std::cout << "transform,lambda,skewness,profile_loglik\n";
  for (const auto& c : candidates) {
    BoxCoxTransform t{c.lambda, 0.0, 1.0};
    std::vector<double> transformed;
    for (double v : means) transformed.push_back(t(v));
    std::cout << c.name << ',' << format_double(c.lambda) << ','
              << format_double(skewness(transformed)) << ','
              << format_double(boxcox_profile_loglik(means, c.lambda)) << '\n';
  }
  return kExitOk;
}

int cmd_rate(const std::string& store_path, const std::string& config_path,
             const std::string& method, const std::string& cutoff_str,
             int season, const std::string& out_dir) {
  static const std::vector<std::string> kMethods = {"colley", "massey",
                                                    "time-colley",
                                                    "tm-massey"};
  if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end()) {
    std::string valid;
    for (const auto& name : kMethods) valid += " " + name;
    throw Error("unknown method '" + method + "'; valid methods:" + valid);
  }

  MatchStore store = load_store(store_path);
  ExperimentConfig cfg = load_config_or_default(config_path, &store);

  // Training window: everything before --cutoff, or before the named
  // season's first fixture, or the whole store.
  std::optional<Date> cutoff;
  if (!cutoff_str.empty()) cutoff = Date::parse(cutoff_str);
  if (season > 0 && !cutoff) {
    std::optional<Date> start;
    for (const auto& code : store.leagues())
      for (const auto& m : store.league_season(code, season))
        if (!start || m.date < *start) start = m.date;
    if (!start)
      throw Error("season " + std::to_string(season) + " not in store");
    cutoff = start;
  }
  MatchFilter filter;
  filter.before_date = cutoff;
  auto training = store.query(filter);
  if (training.empty()) throw Error("no matches before the cutoff");

  RatingVector ratings;
  if (method == "colley") {
    ratings = colley_rate(training, {{}, cfg.colley_draws});
  } else if (method == "massey") {
    ratings = massey_rate(training, {});
  } else if (method == "time-colley") {
    auto weights = time_weights(training);
    ratings = colley_rate(training, {weights, cfg.colley_draws});
  } else {  // tm-massey
    auto weights = time_weights(training);
    auto hat = massey_rate(training, {weights, true});
    if (season <= 0)
      throw Error("tm-massey needs --season to pick the market-value year");
    RatingVector combined;
    combined.method = "tm-massey";
    combined.default_rating = 0.0;
    for (const auto& code : store.leagues()) {
      auto members = store.league_season(code, season);
      if (members.empty()) continue;
      auto market = season_market_vector(store, code, season);
      for (const auto& [team, value] : market)
        combined.values[team] =
            hat.at_or_default(team) + cfg.market_mix * value;
    }
    if (combined.values.empty())
      throw Error("tm-massey: no market values for season " +
                  std::to_string(season));
    ratings = std::move(combined);
    ratings.method = "tm-massey";
  }
  ratings.method = method;
  if (cutoff) ratings.cutoff = *cutoff;

  // League assignment: season membership when given, otherwise each team's
  // most recent appearance in the window.
  std::map<std::string, std::string> league_of;
  if (season > 0) {
    for (const auto& code : store.leagues())
      for (const auto& m : store.league_season(code, season)) {
        league_of[m.home_team] = code;
        league_of[m.away_team] = code;
      }
  } else {
    for (const auto& m : training) {
      league_of[m.home_team] = m.league;
      league_of[m.away_team] = m.league;
    }
  }
  if (method == "tm-massey") {
    // Rank only teams with a combined rating.
    for (auto it = league_of.begin(); it != league_of.end();)
      it = ratings.values.count(it->first) ? std::next(it)
                                           : league_of.erase(it);
  }

  std::string csv = ratings_csv(ratings, league_of);
  std::cout << csv;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "ratings.csv", std::ios::binary);
    out << csv;
    write_cli_manifest(out_dir, "rate",
                       {{"store", store_path},
                        {"store_checksum_fnv1a", checksum_hex(store_path)},
                        {"method", method},
                        {"cutoff", cutoff_str},
                        {"season", season},
                        {"config", nlohmann::json::parse(cfg.to_json_text())}});
    std::cerr << "wrote " << (fs::path(out_dir) / "ratings.csv").string()
              << "\n";
  }
  return kExitOk;
}

int cmd_forecast(const std::string& store_path, const std::string& config_path,
                 int season, const std::string& out_dir) {
  MatchStore store = load_store(store_path);
  ExperimentConfig cfg = load_config_or_default(config_path, &store);
  if (season > 0) {
    cfg.first_season = season;
    cfg.last_season = season;
  }
  BacktestReport report = run_out_of_season(store, cfg);
  report.store_checksum = file_checksum(store_path);
  std::string csv = records_csv(report);
  std::cout << csv;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "forecasts.csv", std::ios::binary);
    out << csv;
    write_cli_manifest(out_dir, "forecast",
                       {{"store", store_path},
                        {"store_checksum_fnv1a", checksum_hex(store_path)},
                        {"season", season},
                        {"config", nlohmann::json::parse(cfg.to_json_text())}});
    std::cerr << "wrote " << (fs::path(out_dir) / "forecasts.csv").string()
              << "\n";
  }
  return kExitOk;
}

int cmd_backtest(const std::string& store_path, const std::string& config_path,
                 const std::string& protocol, const std::string& out_dir,
                 std::uint64_t seed, bool seed_set,
                 const std::string& exclude_file) {
  MatchStore store = load_store(store_path);
  ExperimentConfig cfg = load_config_or_default(config_path, &store);
  if (seed_set) cfg.rng_seed = seed;

  fs::path out_root = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  if (protocol == "exclusion") {
    std::vector<std::string> excluded = cfg.excluded_teams;
    if (!exclude_file.empty()) excluded = read_team_file(exclude_file);
    ExclusionResult result = run_exclusion(store, cfg, excluded);
    result.before.store_checksum = file_checksum(store_path);
    result.after.store_checksum = result.before.store_checksum;
    emit_exclusion(result, out_root / "exclusion");
    std::cout << exclusion_csv(result);
    std::cerr << "wrote " << (out_root / "exclusion").string() << "\n";
    return kExitOk;
  }

  BacktestReport report = run_protocol(protocol, store, cfg);
  report.store_checksum = file_checksum(store_path);
  emit_report(report, out_root / protocol);
  std::cout << metrics_csv(report);
  std::cerr << "wrote " << (out_root / protocol).string() << "\n";
  return kExitOk;
}

int cmd_compare(const std::string& records_path, const std::string& pair_list,
                const std::string& out_dir) {
  std::ifstream in(records_path, std::ios::binary);
  if (!in) throw Error("cannot open records '" + records_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto records = parse_records_csv(buf.str());

  std::vector<std::pair<std::string, std::string>> pairs;
  if (!pair_list.empty()) {
    std::istringstream ss(pair_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto sep = item.find(':');
      if (sep == std::string::npos)
        throw Error("--pairs expects A:B[,C:D...]");
      pairs.emplace_back(item.substr(0, sep), item.substr(sep + 1));
    }
  }

  auto cells = pairwise_tests(records, pairs);
  std::string csv = ttest_csv(cells);
  std::cout << csv;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream csv_out(fs::path(out_dir) / "ttests.csv", std::ios::binary);
    csv_out << csv;
    std::ofstream md_out(fs::path(out_dir) / "ttests.md", std::ios::binary);
    md_out << ttest_markdown(cells);
    write_cli_manifest(
        out_dir, "compare",
        {{"records", records_path},
         {"records_checksum_fnv1a", checksum_hex(records_path)},
         {"pairs", pair_list}});
    std::cerr << "wrote " << (fs::path(out_dir) / "ttests.csv").string()
              << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rating and forecasting toolkit for promotion/relegation "
               "soccer leagues"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, store_path;
  std::string protocol, method, exclude_file, cutoff, records_path, pair_list;
  std::string transform_check;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int season = 0;

  auto* ingest = app.add_subcommand("ingest", "Build a store from CSV files");
  ingest->add_option("--data-dir", data_dir, "Directory of match CSV files")
      ->required();
  ingest->add_option("--out-dir", out_dir, "Output directory")->required();
  ingest->add_option("--config", config_path, "Config JSON");

  auto* summary = app.add_subcommand("summary", "Per-league dataset summary");
  summary->add_option("--store", store_path, "Store CSV path")->required();
  summary->add_option("--transform-check", transform_check,
                      "LEAGUE:SEASON market-value transform diagnostic");

  auto* rate = app.add_subcommand("rate", "Compute and rank team ratings");
  rate->add_option("--store", store_path)->required();
  rate->add_option("--method", method,
                   "colley | massey | time-colley | tm-massey")
      ->required();
  rate->add_option("--config", config_path);
  rate->add_option("--cutoff", cutoff, "Train on matches before this date");
  rate->add_option("--season", season,
                   "Target season (sets cutoff and membership)");
  rate->add_option("--out-dir", out_dir);

  auto* forecast =
      app.add_subcommand("forecast", "Per-match forecasts for one season");
  forecast->add_option("--store", store_path)->required();
  forecast->add_option("--config", config_path);
  forecast->add_option("--season", season)->required();
  forecast->add_option("--out-dir", out_dir);

  auto* backtest = app.add_subcommand("backtest", "Run a backtest protocol");
  backtest->add_option("--store", store_path)->required();
  backtest->add_option("--config", config_path);
  backtest
      ->add_option("--protocol", protocol,
                   "eos | in-season | out-of-season | exclusion")
      ->required();
  backtest->add_option("--out-dir", out_dir);
  backtest->add_option("--seed", seed, "Override config rng_seed")
      ->each([&](const std::string&) { seed_set = true; });
  backtest->add_option("--exclude-file", exclude_file,
                       "Team list for the exclusion protocol");

  auto* compare =
      app.add_subcommand("compare", "Pairwise t-tests from saved records");
  compare->add_option("--records", records_path, "records.csv from a backtest")
      ->required();
  compare->add_option("--pairs", pair_list, "A:B[,C:D...] model pairs");
  compare->add_option("--out-dir", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(data_dir, out_dir, config_path);
    if (summary->parsed()) return cmd_summary(store_path, transform_check);
    if (rate->parsed())
      return cmd_rate(store_path, config_path, method, cutoff, season,
                      out_dir);
    if (forecast->parsed())
      return cmd_forecast(store_path, config_path, season, out_dir);
    if (backtest->parsed())
      return cmd_backtest(store_path, config_path, protocol, out_dir, seed,
                          seed_set, exclude_file);
    if (compare->parsed())
      return cmd_compare(records_path, pair_list, out_dir);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
