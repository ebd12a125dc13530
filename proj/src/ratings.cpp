#include "footrank/ratings.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "footrank/csv.hpp"
#include "footrank/error.hpp"

namespace footrank {

double time_weight(const Date& t_k, const Date& t0, const Date& tf) {
  if (t_k < t0 || tf < t_k)
    throw Error("time_weight: match date " + t_k.to_string() +
                " outside window [" + t0.to_string() + ", " + tf.to_string() +
                "]");
  std::int64_t span = tf - t0;
  if (span == 0) return 1.0;
  return std::exp(static_cast<double>(t_k - t0) / static_cast<double>(span));
}

std::vector<double> time_weights(std::span<const MatchRecord> matches) {
  if (matches.empty()) return {};
  Date t0 = matches.front().date, tf = matches.front().date;
  for (const auto& m : matches) {
    t0 = std::min(t0, m.date);
    tf = std::max(tf, m.date);
  }
  std::vector<double> out;
  out.reserve(matches.size());
  for (const auto& m : matches) out.push_back(time_weight(m.date, t0, tf));
  return out;
}

namespace {

std::vector<std::string> team_index(std::span<const MatchRecord> matches) {
  std::set<std::string> teams;
  for (const auto& m : matches) {
    teams.insert(m.home_team);
    teams.insert(m.away_team);
  }
  return {teams.begin(), teams.end()};
}

std::size_t index_of(const std::vector<std::string>& teams,
                     const std::string& team) {
  return static_cast<std::size_t>(
      std::lower_bound(teams.begin(), teams.end(), team) - teams.begin());
}

void check_weights(std::span<const MatchRecord> matches,
                   std::span<const double> weights) {
  if (weights.empty()) return;
  if (weights.size() != matches.size())
    throw Error("weights must align 1:1 with matches");
  for (double w : weights)
    if (!(w > 0.0)) throw Error("match weights must be positive");
}

// Connected components of the undirected match graph, as team-id lists.
std::vector<std::vector<std::string>> components(
    const std::vector<std::string>& teams,
    std::span<const MatchRecord> matches) {
  std::vector<std::size_t> parent(teams.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& m : matches) {
    auto a = find(index_of(teams, m.home_team));
    auto b = find(index_of(teams, m.away_team));
    parent[a] = b;
  }
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < teams.size(); ++i)
    groups[find(i)].push_back(teams[i]);
  std::vector<std::vector<std::string>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

}  // namespace

ColleySystem build_colley_system(std::span<const MatchRecord> matches,
                                 const ColleyOptions& options) {
  check_weights(matches, options.weights);
  ColleySystem sys;
  sys.teams = team_index(matches);
  const std::size_t n = sys.teams.size();
  sys.c = Matrix(n, n, 0.0);
  sys.b.assign(n, 1.0);
  sys.wins.assign(n, 0.0);
  sys.losses.assign(n, 0.0);
  sys.played.assign(n, 0.0);

  for (std::size_t k = 0; k < matches.size(); ++k) {
    const auto& m = matches[k];
    const double w = options.weights.empty() ? 1.0 : options.weights[k];
    const auto h = index_of(sys.teams, m.home_team);
    const auto a = index_of(sys.teams, m.away_team);
    const Outcome res = m.outcome();
    if (res == Outcome::Draw) {
      if (options.draws == DrawPolicy::Drop) continue;
      // Half-win alternative: the game counts, merit splits evenly.
      sys.wins[h] += 0.5 * w;
      sys.losses[h] += 0.5 * w;
      sys.wins[a] += 0.5 * w;
      sys.losses[a] += 0.5 * w;
    } else {
      const auto winner = res == Outcome::HomeWin ? h : a;
      const auto loser = res == Outcome::HomeWin ? a : h;
      sys.wins[winner] += w;
      sys.losses[loser] += w;
    }
    sys.played[h] += w;
    sys.played[a] += w;
    sys.c(h, a) -= w;
    sys.c(a, h) -= w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    sys.c(i, i) = 2.0 + sys.played[i];
    sys.b[i] = 1.0 + 0.5 * (sys.wins[i] - sys.losses[i]);
  }
  return sys;
}

RatingVector colley_rate(std::span<const MatchRecord> matches,
                         const ColleyOptions& options) {
  ColleySystem sys = build_colley_system(matches, options);
  if (sys.teams.empty()) throw Error("colley_rate: no teams");
  auto solution = lu_solve(sys.c, sys.b);

  RatingVector out;
  out.method = options.weights.empty() ? "colley" : "time-colley";
  out.default_rating = 0.5;
  out.weight_scheme = options.weights.empty() ? "uniform" : "per-match";
  for (std::size_t i = 0; i < sys.teams.size(); ++i)
    out.values[sys.teams[i]] = solution[i];
  return out;
}

MasseySystem build_massey_system(std::span<const MatchRecord> matches,
                                 const MasseyOptions& options) {
  check_weights(matches, options.weights);
  MasseySystem sys;
  sys.teams = team_index(matches);
  sys.home_advantage = options.home_advantage;
  const std::size_t n = sys.teams.size();
  const std::size_t dim = n + (options.home_advantage ? 1 : 0);
  sys.normal = Matrix(dim, dim, 0.0);
  sys.rhs.assign(dim, 0.0);

  // Accumulate X^T W X and X^T W y directly; row k of X is +1 at the home
  // team, -1 at the away team, and (with home advantage) +1 in the home
  // column, with y_k the home-oriented goal margin.
  for (std::size_t k = 0; k < matches.size(); ++k) {
    const auto& m = matches[k];
    const double w = options.weights.empty() ? 1.0 : options.weights[k];
    const auto h = index_of(sys.teams, m.home_team);
    const auto a = index_of(sys.teams, m.away_team);
    const double margin = static_cast<double>(m.home_goals - m.away_goals);
    sys.normal(h, h) += w;
    sys.normal(a, a) += w;
    sys.normal(h, a) -= w;
    sys.normal(a, h) -= w;
    sys.rhs[h] += w * margin;
    sys.rhs[a] -= w * margin;
    if (options.home_advantage) {
      sys.normal(h, n) += w;
      sys.normal(n, h) += w;
      sys.normal(a, n) -= w;
      sys.normal(n, a) -= w;
      sys.normal(n, n) += w;
      sys.rhs[n] += w * margin;
    }
  }
  return sys;
}

RatingVector massey_rate(std::span<const MatchRecord> matches,
                         const MasseyOptions& options) {
  MasseySystem sys = build_massey_system(matches, options);
  const std::size_t n = sys.teams.size();
  if (n < 2) throw Error("massey_rate: need at least 2 teams");

  auto groups = components(sys.teams, matches);
  if (groups.size() > 1) {
    std::ostringstream msg;
    msg << "massey_rate: match graph is disconnected (" << groups.size()
        << " components:";
    for (const auto& g : groups) {
      msg << " {";
      for (std::size_t i = 0; i < g.size(); ++i)
        msg << (i ? "," : "") << g[i];
      msg << "}";
    }
    msg << ")";
    throw Error(msg.str());
  }

  // Constraint row: ratings sum to zero (home column excluded).
  Matrix a = sys.normal;
  std::vector<double> b = sys.rhs;
  for (std::size_t j = 0; j < a.cols(); ++j) a(n - 1, j) = j < n ? 1.0 : 0.0;
  b[n - 1] = 0.0;

  std::vector<double> solution;
  try {
    solution = lu_solve(a, b);
  } catch (const Error&) {
    throw Error(
        "massey_rate: system is singular after the constraint row "
        "(degenerate schedule)");
  }

  RatingVector out;
  out.method = options.home_advantage ? "massey-home" : "massey";
  out.default_rating = 0.0;
  out.weight_scheme = options.weights.empty() ? "uniform" : "per-match";
  for (std::size_t i = 0; i < n; ++i) out.values[sys.teams[i]] = solution[i];
  if (options.home_advantage) out.home_advantage = solution[n];
  return out;
}

RatingVector combine_with_market(const RatingVector& r_hat,
                                 const std::map<std::string, double>& market,
                                 double market_weight) {
  std::vector<std::string> missing;
  for (const auto& [team, rating] : r_hat.values)
    if (!market.count(team)) missing.push_back(team);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "combine_with_market: no market value for";
    for (const auto& team : missing) msg << " '" << team << "'";
    throw Error(msg.str());
  }
  RatingVector out;
  out.method = r_hat.method + "+market";
  out.default_rating = r_hat.default_rating;
  out.cutoff = r_hat.cutoff;
  out.weight_scheme = r_hat.weight_scheme;
  out.home_advantage = r_hat.home_advantage;
  for (const auto& [team, rating] : r_hat.values)
    out.values[team] = rating + market_weight * market.at(team);
  return out;
}

std::map<std::string, std::vector<RankedTeam>> rank_teams(
    const RatingVector& ratings,
    const std::map<std::string, std::string>& league_of) {
  std::map<std::string, std::vector<RankedTeam>> out;
  for (const auto& [team, league] : league_of)
    out[league].push_back({0, team, ratings.at_or_default(team)});
  for (auto& [league, table] : out) {
    std::sort(table.begin(), table.end(),
              [](const RankedTeam& x, const RankedTeam& y) {
                if (x.rating != y.rating) return x.rating > y.rating;
                return x.team < y.team;
              });
    for (std::size_t i = 0; i < table.size(); ++i)
      table[i].rank = static_cast<int>(i) + 1;
  }
  return out;
}

std::string ratings_csv(const RatingVector& ratings,
                        const std::map<std::string, std::string>& league_of) {
  auto ranked = rank_teams(ratings, league_of);
  std::ostringstream out;
  out << "team,rating,rank,league,method\n";
  for (const auto& [league, table] : ranked)
    for (const auto& row : table)
      out << csv_escape(row.team) << ',' << format_double(row.rating) << ','
          << row.rank << ',' << csv_escape(league) << ','
          << csv_escape(ratings.method) << '\n';
  return out.str();
}

}  // namespace footrank
