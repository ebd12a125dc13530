#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "footrank/config.hpp"
#include "footrank/dataset.hpp"
#include "footrank/linalg.hpp"

namespace footrank {

/// Ratings from one method. Teams absent from the training matches resolve
/// to `default_rating` (0.5 for Colley's prior, 0 for Massey's constrained
/// mean), which is what newly promoted clubs with no history receive.
struct RatingVector {
  std::string method;
  std::map<std::string, double> values;
  std::optional<double> home_advantage;
  double default_rating = 0.0;
  std::optional<Date> cutoff;
  std::string weight_scheme;

  double at_or_default(const std::string& team) const {
    auto it = values.find(team);
    return it == values.end() ? default_rating : it->second;
  }
  std::optional<double> find(const std::string& team) const {
    auto it = values.find(team);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }
};

/// exp((t_k - t_0) / (t_f - t_0)); a zero-length span degenerates to
/// constant weight 1, which reduces to the unweighted method.
double time_weight(const Date& t_k, const Date& t0, const Date& tf);

/// Weights for a whole training window, using its global first/last dates.
std::vector<double> time_weights(std::span<const MatchRecord> matches);

// ---------------------------------------------------------------------------
// Colley: (2 + t_i) r_i = 1 + (w_i - l_i)/2 + S, solved as C r = b with
// C_ii = 2 + t_i, C_ij = -(games i vs j), b_i = 1 + (w_i - l_i)/2.
// The weighted variant replaces every count by the sum of match weights.
// ---------------------------------------------------------------------------

struct ColleyOptions {
  std::span<const double> weights = {};  // per match, aligned 1:1
  DrawPolicy draws = DrawPolicy::Drop;
};

struct ColleySystem {
  std::vector<std::string> teams;  // index -> team id, sorted
  Matrix c;
  std::vector<double> b;
  std::vector<double> wins, losses, played;  // weighted tallies per team
};

ColleySystem build_colley_system(std::span<const MatchRecord> matches,
                                 const ColleyOptions& options = {});
RatingVector colley_rate(std::span<const MatchRecord> matches,
                         const ColleyOptions& options = {});

// ---------------------------------------------------------------------------
// Massey: X r = y least squares via normal equations X^T W X r = X^T W y,
// optionally augmented with a universal home-advantage column. Uniqueness
// comes from replacing the last team row by the all-ones row with zero on
// the right-hand side, so ratings sum to zero.
// ---------------------------------------------------------------------------

struct MasseyOptions {
  std::span<const double> weights = {};
  bool home_advantage = false;
};

struct MasseySystem {
  std::vector<std::string> teams;
  bool home_advantage = false;
  Matrix normal;            // before the constraint row is applied
  std::vector<double> rhs;  // before the constraint row is applied
};

MasseySystem build_massey_system(std::span<const MatchRecord> matches,
                                 const MasseyOptions& options = {});
RatingVector massey_rate(std::span<const MatchRecord> matches,
                         const MasseyOptions& options = {});

/// r = r_hat + market_weight * market, per team. Every team in r_hat must
/// have a market value; missing teams are reported in the error.
RatingVector combine_with_market(const RatingVector& r_hat,
                                 const std::map<std::string, double>& market,
                                 double market_weight = 1.0);

struct RankedTeam {
  int rank = 0;
  std::string team;
  double rating = 0.0;
};

/// Ranks every team in `league_of` within its league, descending by rating
/// (ties broken lexicographically by team id). Teams without a rating get
/// the vector's default.
std::map<std::string, std::vector<RankedTeam>> rank_teams(
    const RatingVector& ratings,
    const std::map<std::string, std::string>& league_of);

std::string ratings_csv(const RatingVector& ratings,
                        const std::map<std::string, std::string>& league_of);

}  // namespace footrank
