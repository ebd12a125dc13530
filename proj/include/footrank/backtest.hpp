#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "footrank/config.hpp"
#include "footrank/dataset.hpp"
#include "footrank/metrics.hpp"

namespace footrank {

/// One metric value for a (league, season, model) cell. season == 0 marks a
/// per-league aggregate over the evaluated seasons.
struct MetricCell {
  std::string league;
  int season = 0;
  std::string model;
  std::string metric;
  double value = 0.0;
  std::size_t n = 0;
};

/// One scored per-game forecast inside a report. Substituted rows carry the
/// Null forecast so paired tests stay aligned across models; they are
/// excluded from the owning model's mean.
struct GameBrierRow {
  std::string league;
  int season = 0;
  std::string match_id;
  Date date;
  std::string model;
  OutcomeForecast forecast;
  Outcome outcome = Outcome::Draw;
  double brier = 0.0;
  bool substituted = false;
};

struct BacktestReport {
  std::string protocol;
  ExperimentConfig config;
  std::uint64_t store_checksum = 0;
  std::vector<MetricCell> cells;             // sorted
  std::vector<GameBrierRow> records;         // sorted
  std::vector<std::pair<std::string, std::size_t>> counters;  // sorted
  std::size_t leakage_checks = 0;
};

/// End-of-season ranking protocol: rate on everything before each evaluated
/// season (one joint system across the configured tiers), rank within each
/// league's membership, score with Kendall's tau against the final table.
BacktestReport run_eos_ranking(const MatchStore& store,
                               const ExperimentConfig& cfg);

/// Chronological 80/20 split inside each league-season; Brier scores on the
/// held-out 20% for all configured forecasters.
BacktestReport run_in_season(const MatchStore& store,
                             const ExperimentConfig& cfg);

/// Ratings from all matches before each evaluated season; Brier scores over
/// every match of that season.
BacktestReport run_out_of_season(const MatchStore& store,
                                 const ExperimentConfig& cfg);

BacktestReport run_protocol(const std::string& protocol,
                            const MatchStore& store,
                            const ExperimentConfig& cfg);

struct PairwiseCell {
  std::string model_a;
  std::string model_b;
  std::string league;
  PairedTestResult test;
};

/// Per-league paired t-tests on per-game Briers pooled across seasons.
/// An empty pair list selects the standard comparison ladder.
std::vector<PairwiseCell> pairwise_tests(
    const BacktestReport& report,
    std::vector<std::pair<std::string, std::string>> pairs = {});
std::vector<PairwiseCell> pairwise_tests(
    std::span<const GameBrierRow> records,
    std::vector<std::pair<std::string, std::string>> pairs = {});

extern const std::vector<std::pair<std::string, std::string>> kDefaultPairs;

struct ExclusionDiffRow {
  std::string league;
  std::string model;  // compared against the Null model
  double diff_before = 0.0, ci_lo_before = 0.0, ci_hi_before = 0.0;
  double p_before = 1.0;
  std::size_t n_before = 0;
  bool have_after = false;
  double diff_after = 0.0, ci_lo_after = 0.0, ci_hi_after = 0.0;
  double p_after = 1.0;
  std::size_t n_after = 0;
};

struct ExclusionResult {
  BacktestReport before;
  BacktestReport after;
  std::vector<ExclusionDiffRow> diffs;  // sorted by (league, model)
};

/// Runs cfg.exclusion_protocol twice, on the full store and on the store
/// minus every match involving an excluded team, and tabulates model-minus-
/// Null Brier differences with 95% paired-t confidence intervals.
ExclusionResult run_exclusion(const MatchStore& store,
                              const ExperimentConfig& cfg,
                              const std::vector<std::string>& excluded);

/// Final league table for one league-season (3/1/0 points, goal difference,
/// goals for, then team id), best first.
std::vector<std::string> final_table(std::span<const MatchRecord> matches);

}  // namespace footrank
