#pragma once

#include <span>
#include <string>
#include <vector>

#include "footrank/dataset.hpp"
#include "footrank/probit.hpp"

namespace footrank {

/// One scored forecast. `substituted` marks games where the model could not
/// score the match itself and the Null forecast was imputed to keep paired
/// tests aligned; substituted rows are excluded from the model's own mean.
struct BrierRecord {
  std::string match_id;
  std::string model;
  OutcomeForecast forecast;
  Outcome outcome = Outcome::Draw;
  double score = 0.0;
  bool substituted = false;
};

/// B = ((p_w - w)^2 + (p_d - d)^2 + (p_l - l)^2) / 3, in [0, 2/3].
/// The forecast is home-oriented; the outcome indicators follow it.
double brier_score(const OutcomeForecast& forecast, Outcome outcome);

/// Arithmetic mean over non-substituted records; error when none qualify.
double mean_brier(std::span<const BrierRecord> records);

/// Kendall tau-a between two tie-free total orders of the same team set,
/// via merge-sort inversion counting.
double kendall_tau(const std::vector<std::string>& predicted,
                   const std::vector<std::string>& actual);

struct PairedTestResult {
  double mean_diff = 0.0;
  double se = 0.0;  // standard error of the mean difference
  double t = 0.0;
  std::size_t df = 0;
  double p = 1.0;
  std::size_t n = 0;
  bool degenerate = false;  // zero-variance differences
};

struct GameScore {
  std::string match_id;
  double score = 0.0;
};

/// Classic paired t-test on per-game score differences a - b; the two lists
/// must align by match_id. Two-sided p from the Student-t CDF.
PairedTestResult paired_t_test(std::span<const GameScore> a,
                               std::span<const GameScore> b);

}  // namespace footrank
