#include "footrank/config.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "footrank/error.hpp"

namespace footrank {

using nlohmann::json;

const std::vector<std::string> kAllModels = {
    "null",      "colley",        "massey",      "time-colley",
    "tm-massey", "tm-regression", "betting-odds"};

const std::vector<std::string> kRatingModels = {"colley", "massey",
                                                "time-colley", "tm-massey"};

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("config '" + path.string() + "': " + e.what());
  }

  ExperimentConfig cfg;
  try {
    for (const auto& lg : doc.at("leagues")) {
      LeagueSpec spec;
      spec.code = lg.at("code").get<std::string>();
      spec.tier = lg.value("tier", 1);
      spec.country = lg.value("country", "");
      cfg.leagues.push_back(std::move(spec));
    }
    cfg.first_season = doc.at("seasons").at("first").get<int>();
    cfg.last_season = doc.at("seasons").at("last").get<int>();
    cfg.split_fraction = doc.value("split_fraction", 0.8);
    if (doc.contains("excluded_teams"))
      cfg.excluded_teams =
          doc["excluded_teams"].get<std::vector<std::string>>();
    cfg.rng_seed = doc.value("rng_seed", std::uint64_t{1});
    if (doc.contains("models"))
      cfg.models = doc["models"].get<std::vector<std::string>>();
    std::string draws = doc.value("colley_draws", "drop");
    if (draws == "drop")
      cfg.colley_draws = DrawPolicy::Drop;
    else if (draws == "half-win")
      cfg.colley_draws = DrawPolicy::HalfWin;
    else
      throw Error("colley_draws must be 'drop' or 'half-win'");
    cfg.market_mix = doc.value("market_mix", 1.0);
    cfg.exclusion_protocol =
        doc.value("exclusion_protocol", std::string("out-of-season"));
    cfg.threads = doc.value("threads", 0);
    if (doc.contains("csv")) {
      const auto& csv = doc["csv"];
      if (csv.contains("column_map"))
        for (auto it = csv["column_map"].begin(); it != csv["column_map"].end();
             ++it)
          cfg.csv.column_map[it.key()] = it.value().get<std::string>();
      cfg.csv.date_format = csv.value("date_format", std::string("%Y-%m-%d"));
    }
  } catch (const json::exception& e) {
    throw Error("config '" + path.string() + "': " + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string ExperimentConfig::to_json_text() const {
  json doc;
  json leagues_json = json::array();
  for (const auto& lg : leagues)
    leagues_json.push_back(
        {{"code", lg.code}, {"tier", lg.tier}, {"country", lg.country}});
  doc["leagues"] = leagues_json;
  doc["seasons"] = {{"first", first_season}, {"last", last_season}};
  doc["split_fraction"] = split_fraction;
  doc["excluded_teams"] = excluded_teams;
  doc["rng_seed"] = rng_seed;
  doc["models"] = models.empty() ? kAllModels : models;
  doc["colley_draws"] =
      colley_draws == DrawPolicy::Drop ? "drop" : "half-win";
  doc["market_mix"] = market_mix;
  doc["exclusion_protocol"] = exclusion_protocol;
  doc["threads"] = threads;
  json csv_json;
  csv_json["column_map"] = csv.column_map;
  csv_json["date_format"] = csv.date_format;
  doc["csv"] = csv_json;
  return doc.dump(2);
}

void ExperimentConfig::validate() const {
  if (leagues.empty()) throw Error("config: at least one league required");
  if (first_season > last_season)
    throw Error("config: empty season range");
  if (!(split_fraction > 0.0 && split_fraction < 1.0))
    throw Error("config: split_fraction must lie in (0,1)");
  for (const auto& model : models)
    if (std::find(kAllModels.begin(), kAllModels.end(), model) ==
        kAllModels.end())
      throw Error("config: unknown model '" + model + "'");
}

void ExperimentConfig::validate_against(const MatchStore& store) const {
  for (const auto& lg : leagues)
    if (!store.has_league(lg.code))
      throw Error("config league '" + lg.code + "' is not in the store");
  auto known = store.teams();
  for (const auto& team : excluded_teams)
    if (!known.count(team))
      throw Error("excluded team '" + team + "' is not in the store");
}

std::vector<std::string> ExperimentConfig::league_codes() const {
  std::vector<std::string> out;
  for (const auto& lg : leagues) out.push_back(lg.code);
  return out;
}

std::vector<std::string> ExperimentConfig::active_models() const {
  return models.empty() ? kAllModels : models;
}

}  // namespace footrank
