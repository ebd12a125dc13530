#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "footrank/date.hpp"

namespace footrank {

/// Decimal odds for home win / draw / away win. Each must exceed 1 and the
/// implied probabilities must sum to at least 1 (the bookmaker overround);
/// books summing below 1 are rejected as corrupt.
struct OddsTriple {
  double home = 0.0;
  double draw = 0.0;
  double away = 0.0;

  void validate() const;  // throws Error
};

enum class Outcome { HomeWin, Draw, AwayWin };

Outcome outcome_of(int home_goals, int away_goals);
const char* outcome_name(Outcome o);
Outcome outcome_from_name(const std::string& name);

/// One fixture. Lineup values are total squad market values in euros and are
/// absent (not zero) when the source had no valuation.
struct MatchRecord {
  std::string match_id;
  std::string league;
  int season = 0;  // season start year
  Date date;
  std::string home_team;
  std::string away_team;
  int home_goals = 0;
  int away_goals = 0;
  std::optional<OddsTriple> odds;
  std::optional<double> home_lineup_value;
  std::optional<double> away_lineup_value;

  Outcome outcome() const { return outcome_of(home_goals, away_goals); }
  bool involves(const std::string& team) const {
    return home_team == team || away_team == team;
  }
};

/// Column-name remapping for source files that do not use the canonical
/// header (e.g. raw Football-Data exports). Keys are canonical column names,
/// values are the names found in the source file. Columns absent from the
/// map keep their canonical name. The odds mapping doubles as the place
/// where one bookmaker's columns are chosen explicitly.
struct CsvAdapter {
  std::map<std::string, std::string> column_map;
  std::string date_format = "%Y-%m-%d";

  std::string source_column(const std::string& canonical) const;
};

/// Reads one league-season file in the canonical match CSV schema
///   league,season,date,home_team,away_team,home_goals,away_goals,
///   odds_home,odds_draw,odds_away,home_lineup_value,away_lineup_value
/// (adapted through `adapter` if given). Rows are returned in ascending
/// (date, match_id) order with ids assigned as `<league>:<season>:<seq>`.
/// Errors carry the file name, line number, and column.
std::vector<MatchRecord> ingest_matches(const std::filesystem::path& path,
                                        const std::string& league, int season,
                                        const CsvAdapter& adapter = {});

/// Same, but league and season are taken from the file's own columns, which
/// must be present and constant within the file.
std::vector<MatchRecord> ingest_file(const std::filesystem::path& path,
                                     const CsvAdapter& adapter = {});

struct MatchFilter {
  std::optional<std::vector<std::string>> leagues;
  std::optional<std::pair<int, int>> season_range;  // inclusive
  std::optional<Date> before_date;                  // exclusive
  std::vector<std::string> exclude_teams;
};

/// Immutable after ingestion; concurrent reads are safe.
class MatchStore {
 public:
  /// Merges records in; rejects duplicate match ids.
  void add(std::vector<MatchRecord> records);

  /// All matches, ascending by (date, match_id).
  const std::vector<MatchRecord>& matches() const { return matches_; }

  std::vector<MatchRecord> query(const MatchFilter& filter) const;

  std::vector<std::string> leagues() const;
  std::set<std::string> teams() const;
  bool has_league(const std::string& league) const;
  std::vector<int> seasons_of(const std::string& league) const;
  std::vector<MatchRecord> league_season(const std::string& league,
                                         int season) const;
  std::size_t size() const { return matches_.size(); }
  bool empty() const { return matches_.empty(); }

 private:
  std::vector<MatchRecord> matches_;
  std::set<std::string> ids_;
};

struct LeagueSummary {
  std::string league;
  std::size_t match_count = 0;
  std::size_t team_count = 0;
  double mean_home_goals = 0.0;
  double mean_away_goals = 0.0;
  double mean_odds_home = 0.0;
  double mean_odds_draw = 0.0;
  double mean_odds_away = 0.0;
  double draw_rate = 0.0;
  std::size_t with_odds = 0;
  std::size_t with_values = 0;
};

/// Per-league counts and means; means are over non-missing fields only.
std::vector<LeagueSummary> dataset_summary(const MatchStore& store);
std::string summary_csv(std::span<const LeagueSummary> rows);

/// Serializes one record to the canonical CSV columns (no match_id).
std::string match_csv_row(const MatchRecord& m);

/// Store file: canonical columns prefixed with match_id, plus an FNV-1a
/// checksum sidecar (`<file>.fnv1a`) written alongside.
void save_store(const MatchStore& store, const std::filesystem::path& path);
MatchStore load_store(const std::filesystem::path& path,
                      bool verify_checksum = true);
std::uint64_t file_checksum(const std::filesystem::path& path);

}  // namespace footrank
