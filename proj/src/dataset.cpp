#include "footrank/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "footrank/csv.hpp"
#include "footrank/error.hpp"
#include "footrank/rng.hpp"

namespace footrank {

void OddsTriple::validate() const {
  if (!(home > 1.0 && draw > 1.0 && away > 1.0))
    throw Error("decimal odds must each exceed 1.0");
  double book = 1.0 / home + 1.0 / draw + 1.0 / away;
  if (book < 1.0)
    throw Error("corrupt odds: implied probabilities sum to " +
                format_double(book) + " < 1");
}

Outcome outcome_of(int home_goals, int away_goals) {
  if (home_goals > away_goals) return Outcome::HomeWin;
  if (home_goals < away_goals) return Outcome::AwayWin;
  return Outcome::Draw;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::HomeWin: return "home";
    case Outcome::Draw: return "draw";
    case Outcome::AwayWin: return "away";
  }
  return "?";
}

Outcome outcome_from_name(const std::string& name) {
  if (name == "home") return Outcome::HomeWin;
  if (name == "draw") return Outcome::Draw;
  if (name == "away") return Outcome::AwayWin;
  throw Error("unknown outcome '" + name + "'");
}

std::string CsvAdapter::source_column(const std::string& canonical) const {
  auto it = column_map.find(canonical);
  return it == column_map.end() ? canonical : it->second;
}

namespace {

constexpr const char* kCanonicalColumns[] = {
    "league",       "season",       "date",
    "home_team",    "away_team",    "home_goals",
    "away_goals",   "odds_home",    "odds_draw",
    "odds_away",    "home_lineup_value", "away_lineup_value"};

struct HeaderIndex {
  // canonical column -> field position, -1 if the column is absent
  std::map<std::string, int> pos;

  int at(const std::string& canonical) const {
    auto it = pos.find(canonical);
    return it == pos.end() ? -1 : it->second;
  }
};

HeaderIndex index_header(const std::vector<std::string>& header,
                         const CsvAdapter& adapter,
                         const std::filesystem::path& path) {
  HeaderIndex idx;
  for (const char* canonical : kCanonicalColumns) {
    std::string want = adapter.source_column(canonical);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == want) {
        idx.pos[canonical] = static_cast<int>(i);
        break;
      }
    }
  }
  // Required columns. league/season may be supplied externally.
  for (const char* req : {"date", "home_team", "away_team", "home_goals",
                          "away_goals"}) {
    if (idx.at(req) < 0)
      throw Error(path.string() + ": header is missing column '" +
                  adapter.source_column(req) + "'");
  }
  return idx;
}

std::string cell(const std::vector<std::string>& fields, int pos) {
  if (pos < 0 || pos >= static_cast<int>(fields.size())) return {};
  return fields[static_cast<std::size_t>(pos)];
}

struct RowContext {
  const std::filesystem::path& path;
  std::size_t line_no;

  [[noreturn]] void fail(const std::string& column,
                         const std::string& what) const {
    throw Error(path.string() + ":" + std::to_string(line_no) + ": column '" +
                column + "': " + what);
  }
};

std::vector<MatchRecord> parse_rows(const std::filesystem::path& path,
                                    const CsvAdapter& adapter,
                                    std::optional<std::string> league,
                                    std::optional<int> season) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line))
    throw Error(path.string() + ": empty file, header required");
  HeaderIndex idx = index_header(split_csv_line(line), adapter, path);

  std::vector<MatchRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    RowContext ctx{path, line_no};
    auto fields = split_csv_line(line);
    MatchRecord m;

    std::string row_league = cell(fields, idx.at("league"));
    if (row_league.empty()) {
      if (!league) ctx.fail("league", "value missing and none supplied");
      row_league = *league;
    } else if (league && row_league != *league) {
      ctx.fail("league", "row declares '" + row_league +
                             "' but file was ingested as '" + *league + "'");
    }
    m.league = row_league;

    std::string row_season = cell(fields, idx.at("season"));
    if (row_season.empty()) {
      if (!season) ctx.fail("season", "value missing and none supplied");
      m.season = *season;
    } else {
      try {
        m.season = parse_int(row_season);
      } catch (const Error& e) {
        ctx.fail("season", e.what());
      }
      if (season && m.season != *season)
        ctx.fail("season", "row declares " + row_season +
                               " but file was ingested as " +
                               std::to_string(*season));
    }

    try {
      m.date = Date::parse(cell(fields, idx.at("date")), adapter.date_format);
    } catch (const Error& e) {
      ctx.fail("date", e.what());
    }

    m.home_team = cell(fields, idx.at("home_team"));
    m.away_team = cell(fields, idx.at("away_team"));
    if (m.home_team.empty()) ctx.fail("home_team", "empty team id");
    if (m.away_team.empty()) ctx.fail("away_team", "empty team id");
    if (m.home_team == m.away_team)
      ctx.fail("away_team", "team cannot play itself ('" + m.home_team + "')");

    try {
      m.home_goals = parse_int(cell(fields, idx.at("home_goals")));
      m.away_goals = parse_int(cell(fields, idx.at("away_goals")));
    } catch (const Error& e) {
      ctx.fail("home_goals/away_goals", e.what());
    }
    if (m.home_goals < 0 || m.away_goals < 0)
      ctx.fail("home_goals/away_goals", "goals must be non-negative");

    std::string oh = cell(fields, idx.at("odds_home"));
    std::string od = cell(fields, idx.at("odds_draw"));
    std::string oa = cell(fields, idx.at("odds_away"));
    bool any_odds = !oh.empty() || !od.empty() || !oa.empty();
    bool all_odds = !oh.empty() && !od.empty() && !oa.empty();
    if (any_odds && !all_odds)
      ctx.fail("odds_home", "odds must be all present or all missing");
    if (all_odds) {
      OddsTriple odds;
      try {
        odds = {parse_double(oh), parse_double(od), parse_double(oa)};
        odds.validate();
      } catch (const Error& e) {
        ctx.fail("odds_home", e.what());
      }
      m.odds = odds;
    }

    auto optional_value = [&](const char* col) -> std::optional<double> {
      std::string s = cell(fields, idx.at(col));
      if (s.empty()) return std::nullopt;
      double v = 0;
      try {
        v = parse_double(s);
      } catch (const Error& e) {
        ctx.fail(col, e.what());
      }
      if (!(v > 0.0)) ctx.fail(col, "lineup value must be positive");
      return v;
    };
    m.home_lineup_value = optional_value("home_lineup_value");
    m.away_lineup_value = optional_value("away_lineup_value");

    out.push_back(std::move(m));
  }

  // Ids follow (date, input order), so re-reading a saved store or a sorted
  // file reproduces them.
  std::stable_sort(out.begin(), out.end(),
                   [](const MatchRecord& a, const MatchRecord& b) {
                     return a.date < b.date;
                   });
  for (std::size_t i = 0; i < out.size(); ++i) {
    char seq[16];
    std::snprintf(seq, sizeof seq, "%04zu", i + 1);
    out[i].match_id =
        out[i].league + ":" + std::to_string(out[i].season) + ":" + seq;
  }
  return out;
}

}  // namespace

std::vector<MatchRecord> ingest_matches(const std::filesystem::path& path,
                                        const std::string& league, int season,
                                        const CsvAdapter& adapter) {
  return parse_rows(path, adapter, league, season);
}

std::vector<MatchRecord> ingest_file(const std::filesystem::path& path,
                                     const CsvAdapter& adapter) {
  auto rows = parse_rows(path, adapter, std::nullopt, std::nullopt);
  for (const auto& m : rows) {
    if (m.league != rows.front().league || m.season != rows.front().season)
      throw Error(path.string() +
                  ": file mixes league-seasons; ingest them separately");
  }
  return rows;
}

void MatchStore::add(std::vector<MatchRecord> records) {
  for (auto& m : records) {
    if (!ids_.insert(m.match_id).second)
      throw Error("duplicate match_id '" + m.match_id + "'");
    matches_.push_back(std::move(m));
  }
  std::sort(matches_.begin(), matches_.end(),
            [](const MatchRecord& a, const MatchRecord& b) {
              if (a.date != b.date) return a.date < b.date;
              return a.match_id < b.match_id;
            });
}

std::vector<MatchRecord> MatchStore::query(const MatchFilter& filter) const {
  if (filter.leagues) {
    for (const auto& lg : *filter.leagues)
      if (!has_league(lg)) throw Error("unknown league code '" + lg + "'");
  }
  std::vector<MatchRecord> out;
  for (const auto& m : matches_) {
    if (filter.leagues &&
        std::find(filter.leagues->begin(), filter.leagues->end(), m.league) ==
            filter.leagues->end())
      continue;
    if (filter.season_range && (m.season < filter.season_range->first ||
                                m.season > filter.season_range->second))
      continue;
    if (filter.before_date && !(m.date < *filter.before_date)) continue;
    bool excluded = false;
    for (const auto& team : filter.exclude_teams)
      if (m.involves(team)) excluded = true;
    if (excluded) continue;
    out.push_back(m);
  }
  return out;  // matches_ is already (date, match_id)-sorted
}

std::vector<std::string> MatchStore::leagues() const {
  std::set<std::string> seen;
  for (const auto& m : matches_) seen.insert(m.league);
  return {seen.begin(), seen.end()};
}

std::set<std::string> MatchStore::teams() const {
  std::set<std::string> out;
  for (const auto& m : matches_) {
    out.insert(m.home_team);
    out.insert(m.away_team);
  }
  return out;
}

bool MatchStore::has_league(const std::string& league) const {
  for (const auto& m : matches_)
    if (m.league == league) return true;
  return false;
}

std::vector<int> MatchStore::seasons_of(const std::string& league) const {
  std::set<int> seen;
  for (const auto& m : matches_)
    if (m.league == league) seen.insert(m.season);
  return {seen.begin(), seen.end()};
}

std::vector<MatchRecord> MatchStore::league_season(const std::string& league,
                                                   int season) const {
  std::vector<MatchRecord> out;
  for (const auto& m : matches_)
    if (m.league == league && m.season == season) out.push_back(m);
  return out;
}

std::vector<LeagueSummary> dataset_summary(const MatchStore& store) {
  std::map<std::string, LeagueSummary> rows;
  std::map<std::string, std::set<std::string>> teams;
  std::map<std::string, std::size_t> draws;
  std::map<std::string, double> hg, ag, oh, od, oa;
  for (const auto& m : store.matches()) {
    auto& row = rows[m.league];
    row.league = m.league;
    row.match_count++;
    teams[m.league].insert(m.home_team);
    teams[m.league].insert(m.away_team);
    hg[m.league] += m.home_goals;
    ag[m.league] += m.away_goals;
    if (m.outcome() == Outcome::Draw) draws[m.league]++;
    if (m.odds) {
      row.with_odds++;
      oh[m.league] += m.odds->home;
      od[m.league] += m.odds->draw;
      oa[m.league] += m.odds->away;
    }
    if (m.home_lineup_value && m.away_lineup_value) row.with_values++;
  }
  std::vector<LeagueSummary> out;
  for (auto& [league, row] : rows) {
    double n = static_cast<double>(row.match_count);
    row.team_count = teams[league].size();
    row.mean_home_goals = hg[league] / n;
    row.mean_away_goals = ag[league] / n;
    row.draw_rate = static_cast<double>(draws[league]) / n;
    if (row.with_odds > 0) {
      double k = static_cast<double>(row.with_odds);
      row.mean_odds_home = oh[league] / k;
      row.mean_odds_draw = od[league] / k;
      row.mean_odds_away = oa[league] / k;
    }
    out.push_back(row);
  }
  return out;
}

std::string summary_csv(std::span<const LeagueSummary> rows) {
  std::ostringstream out;
  out << "league,matches,teams,mean_home_goals,mean_away_goals,"
         "mean_odds_home,mean_odds_draw,mean_odds_away,draw_rate,"
         "with_odds,with_values\n";
  for (const auto& r : rows) {
    out << csv_escape(r.league) << ',' << r.match_count << ',' << r.team_count
        << ',' << format_double(r.mean_home_goals) << ','
        << format_double(r.mean_away_goals) << ','
        << format_double(r.mean_odds_home) << ','
        << format_double(r.mean_odds_draw) << ','
        << format_double(r.mean_odds_away) << ','
        << format_double(r.draw_rate) << ',' << r.with_odds << ','
        << r.with_values << '\n';
  }
  return out.str();
}

std::string match_csv_row(const MatchRecord& m) {
  std::ostringstream out;
  out << csv_escape(m.league) << ',' << m.season << ',' << m.date.to_string()
      << ',' << csv_escape(m.home_team) << ',' << csv_escape(m.away_team)
      << ',' << m.home_goals << ',' << m.away_goals << ',';
  if (m.odds)
    out << format_double(m.odds->home) << ',' << format_double(m.odds->draw)
        << ',' << format_double(m.odds->away);
  else
    out << ",,";
  out << ',';
  if (m.home_lineup_value) out << format_double(*m.home_lineup_value);
  out << ',';
  if (m.away_lineup_value) out << format_double(*m.away_lineup_value);
  return out.str();
}

namespace {
constexpr const char* kStoreHeader =
    "match_id,league,season,date,home_team,away_team,home_goals,away_goals,"
    "odds_home,odds_draw,odds_away,home_lineup_value,away_lineup_value";
}

void save_store(const MatchStore& store, const std::filesystem::path& path) {
  std::ostringstream body;
  body << kStoreHeader << '\n';
  for (const auto& m : store.matches())
    body << csv_escape(m.match_id) << ',' << match_csv_row(m) << '\n';
  std::string text = body.str();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  out.close();

  std::ofstream side(path.string() + ".fnv1a", std::ios::binary);
  if (!side) throw Error("cannot write checksum sidecar for " + path.string());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(text)));
  side << buf << '\n';
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a(buf.str());
}

MatchStore load_store(const std::filesystem::path& path,
                      bool verify_checksum) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open store '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  if (verify_checksum) {
    std::ifstream side(path.string() + ".fnv1a");
    if (side) {
      std::string recorded;
      side >> recorded;
      char buf2[32];
      std::snprintf(buf2, sizeof buf2, "%016llx",
                    static_cast<unsigned long long>(fnv1a(text)));
      if (recorded != buf2)
        throw Error("store checksum mismatch for '" + path.string() +
                    "' (expected " + recorded + ", got " + buf2 + ")");
    }
  }

  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line) ||
      split_csv_line(line) != split_csv_line(kStoreHeader))
    throw Error(path.string() + ": not a store file (bad header)");

  std::vector<MatchRecord> records;
  std::size_t line_no = 1;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != 13)
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": expected 13 fields, got " + std::to_string(f.size()));
    MatchRecord m;
    m.match_id = f[0];
    m.league = f[1];
    m.season = parse_int(f[2]);
    m.date = Date::parse(f[3]);
    m.home_team = f[4];
    m.away_team = f[5];
    m.home_goals = parse_int(f[6]);
    m.away_goals = parse_int(f[7]);
    if (!f[8].empty()) {
      OddsTriple odds{parse_double(f[8]), parse_double(f[9]),
                      parse_double(f[10])};
      odds.validate();
      m.odds = odds;
    }
    if (!f[11].empty()) m.home_lineup_value = parse_double(f[11]);
    if (!f[12].empty()) m.away_lineup_value = parse_double(f[12]);
    records.push_back(std::move(m));
  }
  MatchStore store;
  store.add(std::move(records));
  return store;
}

}  // namespace footrank
