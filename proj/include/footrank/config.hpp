#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "footrank/dataset.hpp"

namespace footrank {

struct LeagueSpec {
  std::string code;
  int tier = 1;
  std::string country;
};

enum class DrawPolicy { Drop, HalfWin };

/// Experiment configuration, loaded from a JSON document (schema documented
/// in the README). A config plus a store reproduces a run bit-for-bit.
struct ExperimentConfig {
  std::vector<LeagueSpec> leagues;
  int first_season = 0;
  int last_season = 0;
  double split_fraction = 0.8;
  std::vector<std::string> excluded_teams;
  std::uint64_t rng_seed = 1;

  /// Which forecasters to run; empty means all seven.
  std::vector<std::string> models;
  DrawPolicy colley_draws = DrawPolicy::Drop;
  /// Weight on the market term in the combined Massey rating (1 = the plain
  /// sum r_hat + market).
  double market_mix = 1.0;
  std::string exclusion_protocol = "out-of-season";
  int threads = 0;  // 0 = runtime default

  CsvAdapter csv;

  static ExperimentConfig load(const std::filesystem::path& path);
  std::string to_json_text() const;  // deterministic (sorted keys)
  void validate() const;
  /// Checks that configured leagues and excluded teams exist in the store.
  void validate_against(const MatchStore& store) const;

  std::vector<std::string> league_codes() const;
  std::vector<std::string> active_models() const;
};

/// Canonical model tags, in report order.
extern const std::vector<std::string> kAllModels;
extern const std::vector<std::string> kRatingModels;

}  // namespace footrank
