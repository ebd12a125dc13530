#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "footrank/dataset.hpp"

namespace footrank {

struct ImpliedProbabilities {
  double win = 0.0;
  double draw = 0.0;
  double loss = 0.0;
};

/// Proportional normalization of reciprocal decimal odds; the bookmaker
/// overround is removed multiplicatively.
ImpliedProbabilities implied_probabilities(const OddsTriple& odds);

/// Natural log of a positive euro amount; callers skip matches without one.
double log_lineup_value(double euros);

/// Box-Cox power transform y = (x^lambda - 1)/lambda (ln x at lambda = 0),
/// with the min/max of the transformed fitting values retained so fitted
/// data can be min-max scaled into [0, 1].
struct BoxCoxTransform {
  double lambda = 1.0;
  double fitted_min = 0.0;
  double fitted_max = 1.0;

  double operator()(double x) const;
  double scaled(double x) const;
};

/// Profile log-likelihood of lambda for the given positive sample.
double boxcox_profile_loglik(std::span<const double> values, double lambda);

/// Fits lambda by maximizing the profile log-likelihood over a grid on
/// [-3, 3] with step 0.01. Requires >= 3 positive, not-all-equal values.
BoxCoxTransform fit_boxcox(std::span<const double> values);

/// (x - min) / (max - min); requires max > min.
std::vector<double> scale_to_unit(std::span<const double> values);

/// Per-team mean lineup value over the given matches, Box-Cox transformed
/// and min-max scaled within the group. Teams with no valued matches are
/// reported in the error.
std::map<std::string, double> market_vector(
    std::span<const MatchRecord> matches);

/// market_vector over one league-season of the store.
std::map<std::string, double> season_market_vector(const MatchStore& store,
                                                   const std::string& league,
                                                   int season);

}  // namespace footrank
