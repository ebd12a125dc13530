#pragma once

#include <filesystem>
#include <string>

#include "footrank/backtest.hpp"

namespace footrank {

/// Metric table CSV: league,season,model,metric,value,n with full-precision
/// values (season 0 rows are per-league aggregates). Re-parsing reconstructs
/// every cell exactly.
std::string metrics_csv(const BacktestReport& report);
std::vector<MetricCell> parse_metrics_csv(const std::string& text);

/// Per-game forecast records CSV.
std::string records_csv(const BacktestReport& report);
std::vector<GameBrierRow> parse_records_csv(const std::string& text);

/// Pairwise t-test matrix CSV with significance codes.
std::string ttest_csv(const std::vector<PairwiseCell>& cells);

/// Markdown summary in a models-by-leagues grid.
std::string report_markdown(const BacktestReport& report);
std::string ttest_markdown(const std::vector<PairwiseCell>& cells);

/// Exclusion analysis: model-minus-Null differences before/after with 95%
/// confidence intervals (plot-ready).
std::string exclusion_csv(const ExclusionResult& result);
std::string exclusion_markdown(const ExclusionResult& result);

/// Run manifest: config snapshot, store checksum, counters, version.
std::string manifest_json(const BacktestReport& report);

/// Writes the full report bundle (metrics.csv, records.csv, ttests.csv,
/// report.md, manifest.json) into out_dir. Byte-deterministic for a given
/// report.
void emit_report(const BacktestReport& report,
                 const std::filesystem::path& out_dir);

void emit_exclusion(const ExclusionResult& result,
                    const std::filesystem::path& out_dir);

std::string significance_code(double p);

extern const char* kArtifactVersion;

}  // namespace footrank
