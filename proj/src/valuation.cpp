#include "footrank/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "footrank/error.hpp"

namespace footrank {

ImpliedProbabilities implied_probabilities(const OddsTriple& odds) {
  if (!(odds.home > 1.0 && odds.draw > 1.0 && odds.away > 1.0))
    throw Error("implied_probabilities: decimal odds must exceed 1");
  double rw = 1.0 / odds.home, rd = 1.0 / odds.draw, rl = 1.0 / odds.away;
  double book = rw + rd + rl;
  return {rw / book, rd / book, rl / book};
}

double log_lineup_value(double euros) {
  if (!(euros > 0.0))
    throw Error("log_lineup_value: value must be positive");
  return std::log(euros);
}

double BoxCoxTransform::operator()(double x) const {
  if (!(x > 0.0)) throw Error("Box-Cox input must be positive");
  if (lambda == 0.0) return std::log(x);
  return (std::pow(x, lambda) - 1.0) / lambda;
}

double BoxCoxTransform::scaled(double x) const {
  return ((*this)(x)-fitted_min) / (fitted_max - fitted_min);
}

double boxcox_profile_loglik(std::span<const double> values, double lambda) {
  const double n = static_cast<double>(values.size());
  BoxCoxTransform t{lambda, 0.0, 1.0};
  double sum = 0.0, sum_sq = 0.0, sum_log = 0.0;
  for (double x : values) {
    double y = t(x);
    sum += y;
    sum_sq += y * y;
    sum_log += std::log(x);
  }
  double var = sum_sq / n - (sum / n) * (sum / n);
  if (var <= 0.0) return -1e300;
  return -0.5 * n * std::log(var) + (lambda - 1.0) * sum_log;
}

BoxCoxTransform fit_boxcox(std::span<const double> values) {
  if (values.size() < 3)
    throw Error("fit_boxcox: need at least 3 values");
  for (double x : values)
    if (!(x > 0.0)) throw Error("fit_boxcox: values must be positive");
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (lo == hi) throw Error("fit_boxcox: all values equal");

  double best_lambda = 0.0, best_ll = -1e301;
  for (int step = -300; step <= 300; ++step) {
    double lambda = static_cast<double>(step) / 100.0;
    double ll = boxcox_profile_loglik(values, lambda);
    if (ll > best_ll) {
      best_ll = ll;
      best_lambda = lambda;
    }
  }

  BoxCoxTransform out{best_lambda, 0.0, 1.0};
  double tmin = out(lo), tmax = out(lo);
  for (double x : values) {
    double y = out(x);
    tmin = std::min(tmin, y);
    tmax = std::max(tmax, y);
  }
  out.fitted_min = tmin;
  out.fitted_max = tmax;
  return out;
}

std::vector<double> scale_to_unit(std::span<const double> values) {
  if (values.size() < 2) throw Error("scale_to_unit: need at least 2 values");
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (!(hi > lo)) throw Error("scale_to_unit: max must exceed min");
  std::vector<double> out;
  out.reserve(values.size());
  for (double x : values) out.push_back((x - lo) / (hi - lo));
  return out;
}

std::map<std::string, double> market_vector(
    std::span<const MatchRecord> matches) {
  std::map<std::string, double> sums;
  std::map<std::string, std::size_t> counts;
  std::set<std::string> all_teams;
  for (const auto& m : matches) {
    all_teams.insert(m.home_team);
    all_teams.insert(m.away_team);
    if (m.home_lineup_value) {
      sums[m.home_team] += *m.home_lineup_value;
      counts[m.home_team]++;
    }
    if (m.away_lineup_value) {
      sums[m.away_team] += *m.away_lineup_value;
      counts[m.away_team]++;
    }
  }

  std::vector<std::string> missing;
  for (const auto& team : all_teams)
    if (!counts.count(team)) missing.push_back(team);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "market_vector: no lineup values for";
    for (const auto& team : missing) msg << " '" << team << "'";
    throw Error(msg.str());
  }
  if (all_teams.empty()) throw Error("market_vector: no matches");

  std::vector<std::string> teams(all_teams.begin(), all_teams.end());
  std::vector<double> means;
  means.reserve(teams.size());
  for (const auto& team : teams)
    means.push_back(sums[team] / static_cast<double>(counts[team]));

  std::map<std::string, double> out;
  if (teams.size() < 3) {
    // Two points land on 0 and 1 under any monotone transform, so the
    // Box-Cox step is vacuous there.
    auto scaled = scale_to_unit(means);
    for (std::size_t i = 0; i < teams.size(); ++i) out[teams[i]] = scaled[i];
    return out;
  }
  BoxCoxTransform t = fit_boxcox(means);
  for (std::size_t i = 0; i < teams.size(); ++i)
    out[teams[i]] = t.scaled(means[i]);
  return out;
}

std::map<std::string, double> season_market_vector(const MatchStore& store,
                                                   const std::string& league,
                                                   int season) {
  auto matches = store.league_season(league, season);
  if (matches.empty())
    throw Error("season_market_vector: no matches for " + league + " season " +
                std::to_string(season));
  return market_vector(matches);
}

}  // namespace footrank
