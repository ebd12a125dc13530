#pragma once

// Test-side oracles and fixture builders. The solvers here are written
// independently of the library paths they check (Gauss-Jordan with full
// pivoting instead of LU, explicit design matrices instead of accumulated
// normal equations, quadrature instead of continued fractions).

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "footrank/dataset.hpp"
#include "footrank/mathx.hpp"
#include "footrank/probit.hpp"
#include "footrank/rng.hpp"

namespace testutil {

using footrank::Date;
using footrank::MatchRecord;
using footrank::MatchStore;
using footrank::OddsTriple;

// --------------------------------------------------------------------------
// filesystem
// --------------------------------------------------------------------------

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    auto base = std::filesystem::temp_directory_path();
    path_ = base / ("footrank-test-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// --------------------------------------------------------------------------
// dense solve oracle: Gauss-Jordan with full pivoting
// --------------------------------------------------------------------------

inline std::vector<double> gauss_jordan(std::vector<std::vector<double>> a,
                                        std::vector<double> b) {
  const std::size_t n = a.size();
  std::vector<std::size_t> col_of(n);
  for (std::size_t i = 0; i < n; ++i) col_of[i] = i;

  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pr = step, pc = step;
    double best = 0.0;
    for (std::size_t i = step; i < n; ++i)
      for (std::size_t j = step; j < n; ++j)
        if (std::fabs(a[i][j]) > best) {
          best = std::fabs(a[i][j]);
          pr = i;
          pc = j;
        }
    if (best == 0.0) throw std::runtime_error("gauss_jordan: singular");
    std::swap(a[step], a[pr]);
    std::swap(b[step], b[pr]);
    for (std::size_t i = 0; i < n; ++i) std::swap(a[i][step], a[i][pc]);
    std::swap(col_of[step], col_of[pc]);

    double pivot = a[step][step];
    for (std::size_t j = 0; j < n; ++j) a[step][j] /= pivot;
    b[step] /= pivot;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == step) continue;
      double f = a[i][step];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) a[i][j] -= f * a[step][j];
      b[i] -= f * b[step];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[col_of[i]] = b[i];
  return x;
}

// --------------------------------------------------------------------------
// Colley oracle: re-derive the tallies straight from the match list and
// solve with the oracle solver.
// --------------------------------------------------------------------------

inline std::map<std::string, double> colley_oracle(
    std::span<const MatchRecord> matches, std::span<const double> weights,
    bool drop_draws = true) {
  std::set<std::string> team_set;
  for (const auto& m : matches) {
    team_set.insert(m.home_team);
    team_set.insert(m.away_team);
  }
  std::vector<std::string> teams(team_set.begin(), team_set.end());
  const std::size_t n = teams.size();
  auto idx = [&](const std::string& t) {
    return static_cast<std::size_t>(
        std::lower_bound(teams.begin(), teams.end(), t) - teams.begin());
  };

  std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
  std::vector<double> wins(n, 0.0), losses(n, 0.0), games(n, 0.0);
  for (std::size_t k = 0; k < matches.size(); ++k) {
    const auto& m = matches[k];
    double w = weights.empty() ? 1.0 : weights[k];
    auto h = idx(m.home_team), a = idx(m.away_team);
    if (m.home_goals == m.away_goals) {
      if (drop_draws) continue;
      wins[h] += 0.5 * w;
      losses[h] += 0.5 * w;
      wins[a] += 0.5 * w;
      losses[a] += 0.5 * w;
    } else if (m.home_goals > m.away_goals) {
      wins[h] += w;
      losses[a] += w;
    } else {
      wins[a] += w;
      losses[h] += w;
    }
    games[h] += w;
    games[a] += w;
    c[h][a] -= w;
    c[a][h] -= w;
  }
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i][i] = 2.0 + games[i];
    b[i] = 1.0 + 0.5 * (wins[i] - losses[i]);
  }
  auto x = gauss_jordan(c, b);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < n; ++i) out[teams[i]] = x[i];
  return out;
}

// --------------------------------------------------------------------------
// Massey oracle: explicit design matrix, weighted constrained least squares
// via the KKT system  [2 X^T W X, 1; 1^T, 0] [r; mu] = [2 X^T W y; 0].
// --------------------------------------------------------------------------

inline std::map<std::string, double> massey_kkt_oracle(
    std::span<const MatchRecord> matches, std::span<const double> weights) {
  std::set<std::string> team_set;
  for (const auto& m : matches) {
    team_set.insert(m.home_team);
    team_set.insert(m.away_team);
  }
  std::vector<std::string> teams(team_set.begin(), team_set.end());
  const std::size_t n = teams.size();
  const std::size_t m_rows = matches.size();
  auto idx = [&](const std::string& t) {
    return static_cast<std::size_t>(
        std::lower_bound(teams.begin(), teams.end(), t) - teams.begin());
  };

  std::vector<std::vector<double>> x(m_rows, std::vector<double>(n, 0.0));
  std::vector<double> y(m_rows), w(m_rows, 1.0);
  for (std::size_t k = 0; k < m_rows; ++k) {
    const auto& m = matches[k];
    x[k][idx(m.home_team)] = 1.0;
    x[k][idx(m.away_team)] = -1.0;
    y[k] = m.home_goals - m.away_goals;
    if (!weights.empty()) w[k] = weights[k];
  }

  std::vector<std::vector<double>> kkt(n + 1, std::vector<double>(n + 1, 0.0));
  std::vector<double> rhs(n + 1, 0.0);
  for (std::size_t k = 0; k < m_rows; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      rhs[i] += 2.0 * w[k] * x[k][i] * y[k];
      for (std::size_t j = 0; j < n; ++j)
        kkt[i][j] += 2.0 * w[k] * x[k][i] * x[k][j];
    }
  for (std::size_t i = 0; i < n; ++i) kkt[i][n] = kkt[n][i] = 1.0;

  auto sol = gauss_jordan(kkt, rhs);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < n; ++i) out[teams[i]] = sol[i];
  return out;
}

// --------------------------------------------------------------------------
// Student-t CDF by Simpson quadrature of the density.
// --------------------------------------------------------------------------

inline double simpson_t_cdf(double t, double df) {
  auto density = [df](double u) {
    double ln = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                0.5 * std::log(df * 3.14159265358979323846) -
                0.5 * (df + 1.0) * std::log1p(u * u / df);
    return std::exp(ln);
  };
  double lo = 0.0, hi = std::fabs(t);
  const int steps = 20000;  // even
  double h = (hi - lo) / steps;
  double sum = density(lo) + density(hi);
  for (int i = 1; i < steps; ++i)
    sum += density(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  double integral = sum * h / 3.0;
  return t >= 0.0 ? 0.5 + integral : 0.5 - integral;
}

// --------------------------------------------------------------------------
// O(n^2) Kendall tau oracle.
// --------------------------------------------------------------------------

inline double kendall_oracle(const std::vector<std::string>& predicted,
                             const std::vector<std::string>& actual) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < predicted.size(); ++i) pos[predicted[i]] = i;
  long long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < actual.size(); ++i)
    for (std::size_t j = i + 1; j < actual.size(); ++j) {
      if (pos.at(actual[i]) < pos.at(actual[j]))
        ++concordant;
      else
        ++discordant;
    }
  return static_cast<double>(concordant - discordant) /
         static_cast<double>(concordant + discordant);
}

// --------------------------------------------------------------------------
// match fixtures
// --------------------------------------------------------------------------

inline MatchRecord mk(const std::string& league, int season,
                      const std::string& date, const std::string& home,
                      const std::string& away, int hg, int ag,
                      std::optional<OddsTriple> odds = std::nullopt,
                      std::optional<double> home_value = std::nullopt,
                      std::optional<double> away_value = std::nullopt) {
  static int counter = 0;
  MatchRecord m;
  m.match_id = league + ":" + std::to_string(season) + ":t" +
               std::to_string(counter++);
  m.league = league;
  m.season = season;
  m.date = Date::parse(date);
  m.home_team = home;
  m.away_team = away;
  m.home_goals = hg;
  m.away_goals = ag;
  m.odds = odds;
  m.home_lineup_value = home_value;
  m.away_lineup_value = away_value;
  return m;
}

// Synthetic promotion-free league whose outcomes follow a known ordered-
// probit generator, so true match probabilities are computable from the
// construction. Margins grow with the latent gap, so score-based methods
// see more information than win/loss tallies.
struct SynthLeague {
  std::string league = "SYN";
  int first_season = 2000;
  int n_seasons = 2;
  int n_teams = 12;
  double home_adv = 0.25;
  double cut = 0.45;
  double strength_sd = 0.8;
  double dominant_strength = 0.0;  // if nonzero, team 0 gets this strength
  bool with_odds = true;
  bool with_values = true;
  std::uint64_t seed = 1;

  std::map<std::string, double> strengths;
  MatchStore store;

  void generate() {
    footrank::Rng rng(seed);
    strengths.clear();
    std::vector<std::string> teams;
    for (int i = 0; i < n_teams; ++i) {
      std::string name =
          "T" + std::string(i < 10 ? "0" : "") + std::to_string(i);
      teams.push_back(name);
      strengths[name] = strength_sd * rng.normal();
    }
    if (dominant_strength != 0.0) strengths[teams[0]] = dominant_strength;

    std::vector<MatchRecord> records;
    int counter = 0;
    for (int s = 0; s < n_seasons; ++s) {
      int season = first_season + s;
      int day = 0;
      for (int round = 0; round < 2; ++round)
        for (int i = 0; i < n_teams; ++i)
          for (int j = i + 1; j < n_teams; ++j) {
            int hi = round == 0 ? i : j;
            int ai = round == 0 ? j : i;
            MatchRecord m;
            m.league = league;
            m.season = season;
            int serial = day++;
            m.date = Date{season, 1 + (serial / 28) % 12, 1 + serial % 28};
            char id[32];
            std::snprintf(id, sizeof id, "%s:%d:%05d", league.c_str(), season,
                          counter++);
            m.match_id = id;
            m.home_team = teams[static_cast<std::size_t>(hi)];
            m.away_team = teams[static_cast<std::size_t>(ai)];

            double mu = strengths[m.home_team] - strengths[m.away_team] +
                        home_adv;
            double z = mu + rng.normal();
            int base = rng.poisson(0.9);
            if (z < -cut) {
              int margin = 1 + rng.poisson(0.6 * (-z - cut));
              m.home_goals = base;
              m.away_goals = base + margin;
            } else if (z <= cut) {
              m.home_goals = m.away_goals = base;
            } else {
              int margin = 1 + rng.poisson(0.6 * (z - cut));
              m.home_goals = base + margin;
              m.away_goals = base;
            }

            if (with_odds) {
              // Bookmaker view: the true probabilities squeezed away from
              // the extremes and marked up with a light overround, keeping
              // every decimal odd above 1.
              auto p = true_forecast(m);
              double pw = std::clamp(p.win, 0.03, 0.85);
              double pd = std::clamp(p.draw, 0.03, 0.85);
              double pl = std::clamp(p.loss, 0.03, 0.85);
              double norm = (pw + pd + pl) / 1.05;
              m.odds = OddsTriple{norm / pw, norm / pd, norm / pl};
            }
            if (with_values) {
              m.home_lineup_value =
                  1e6 * std::exp(2.0 * strengths[m.home_team] +
                                 0.1 * rng.normal());
              m.away_lineup_value =
                  1e6 * std::exp(2.0 * strengths[m.away_team] +
                                 0.1 * rng.normal());
            }
            records.push_back(std::move(m));
          }
    }
    store = MatchStore();
    store.add(std::move(records));
  }

  // Exact outcome probabilities under the generator.
  footrank::OutcomeForecast true_forecast(const MatchRecord& m) const {
    double mu = strengths.at(m.home_team) - strengths.at(m.away_team) +
                home_adv;
    double p_loss = footrank::norm_cdf(-cut - mu);
    double p_draw = footrank::norm_cdf(cut - mu) - p_loss;
    return {1.0 - p_loss - p_draw, p_draw, p_loss};
  }
};

}  // namespace testutil
