#include "footrank/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "footrank/csv.hpp"
#include "footrank/error.hpp"
#include "footrank/rng.hpp"

namespace footrank {

const char* kArtifactVersion = "0.1.0";

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::string significance_code(double p) {
  if (p < 0.01) return "p<0.01";
  if (p < 0.05) return "p<0.05";
  if (p < 0.1) return "p<0.1";
  return "ns";
}

std::string metrics_csv(const BacktestReport& report) {
  std::ostringstream out;
  out << "league,season,model,metric,value,n\n";
  for (const auto& c : report.cells)
    out << csv_escape(c.league) << ',' << c.season << ','
        << csv_escape(c.model) << ',' << csv_escape(c.metric) << ','
        << format_double(c.value) << ',' << c.n << '\n';
  return out.str();
}

std::vector<MetricCell> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "league,season,model,metric,value,n")
    throw Error("not a metrics CSV");
  std::vector<MetricCell> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 6) throw Error("bad metrics row: " + line);
    out.push_back({f[0], parse_int(f[1]), f[2], f[3], parse_double(f[4]),
                   static_cast<std::size_t>(parse_int(f[5]))});
  }
  return out;
}

std::string records_csv(const BacktestReport& report) {
  std::ostringstream out;
  out << "league,season,match_id,date,model,p_win,p_draw,p_loss,outcome,"
         "brier,substituted\n";
  for (const auto& r : report.records)
    out << csv_escape(r.league) << ',' << r.season << ','
        << csv_escape(r.match_id) << ',' << r.date.to_string() << ','
        << csv_escape(r.model) << ',' << format_double(r.forecast.win) << ','
        << format_double(r.forecast.draw) << ','
        << format_double(r.forecast.loss) << ',' << outcome_name(r.outcome)
        << ',' << format_double(r.brier) << ',' << (r.substituted ? 1 : 0)
        << '\n';
  return out.str();
}

std::vector<GameBrierRow> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line !=
          "league,season,match_id,date,model,p_win,p_draw,p_loss,outcome,"
          "brier,substituted")
    throw Error("not a records CSV");
  std::vector<GameBrierRow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 11) throw Error("bad records row: " + line);
    GameBrierRow r;
    r.league = f[0];
    r.season = parse_int(f[1]);
    r.match_id = f[2];
    r.date = Date::parse(f[3]);
    r.model = f[4];
    r.forecast = {parse_double(f[5]), parse_double(f[6]), parse_double(f[7])};
    r.outcome = outcome_from_name(f[8]);
    r.brier = parse_double(f[9]);
    r.substituted = f[10] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

std::string ttest_csv(const std::vector<PairwiseCell>& cells) {
  std::ostringstream out;
  out << "model_a,model_b,league,mean_diff,t,df,p,n,significance\n";
  for (const auto& c : cells)
    out << csv_escape(c.model_a) << ',' << csv_escape(c.model_b) << ','
        << csv_escape(c.league) << ',' << format_double(c.test.mean_diff)
        << ',' << format_double(c.test.t) << ',' << c.test.df << ','
        << format_double(c.test.p) << ',' << c.test.n << ','
        << (c.test.degenerate ? "degenerate" : significance_code(c.test.p))
        << '\n';
  return out.str();
}

namespace {

// models-by-leagues grid, one row per model, averaged-over-seasons values.
std::string metric_grid_markdown(const BacktestReport& report,
                                 const std::string& metric,
                                 const std::string& title) {
  std::vector<std::string> leagues;
  for (const auto& lg : report.config.leagues)
    leagues.push_back(lg.code);
  std::map<std::pair<std::string, std::string>, double> grid;
  std::set<std::string> models_present;
  for (const auto& c : report.cells) {
    if (c.metric != metric || c.season != 0) continue;
    grid[{c.model, c.league}] = c.value;
    models_present.insert(c.model);
  }
  if (grid.empty()) return {};

  // Keep the canonical model order, then any extras.
  std::vector<std::string> models;
  for (const auto& model : kAllModels)
    if (models_present.count(model)) models.push_back(model);
  for (const auto& model : models_present)
    if (std::find(models.begin(), models.end(), model) == models.end())
      models.push_back(model);

  std::ostringstream out;
  out << "## " << title << "\n\n";
  out << "| model |";
  for (const auto& lg : leagues) out << ' ' << lg << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < leagues.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& model : models) {
    out << "| " << model << " |";
    for (const auto& lg : leagues) {
      auto it = grid.find({model, lg});
      out << ' ' << (it == grid.end() ? std::string("-") : fixed4(it->second))
          << " |";
    }
    out << '\n';
  }
  out << '\n';
  return out.str();
}

}  // namespace

std::string report_markdown(const BacktestReport& report) {
  std::ostringstream out;
  out << "# Backtest report: " << report.protocol << "\n\n";
  out << "Seasons " << report.config.first_season << "-"
      << report.config.last_season << ", seed " << report.config.rng_seed
      << ", store checksum ";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(report.store_checksum));
  out << buf << ".\n\n";

  out << metric_grid_markdown(report, "kendall_tau_mean",
                              "Average Kendall tau by league");
  out << metric_grid_markdown(report, "brier_mean",
                              "Average Brier score by league");

  if (!report.counters.empty()) {
    out << "## Counters\n\n";
    for (const auto& [key, count] : report.counters)
      out << "- " << key << ": " << count << '\n';
    out << '\n';
  }
  return out.str();
}

std::string ttest_markdown(const std::vector<PairwiseCell>& cells) {
  std::vector<std::string> leagues;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& c : cells) {
    if (std::find(leagues.begin(), leagues.end(), c.league) == leagues.end())
      leagues.push_back(c.league);
    auto pair = std::make_pair(c.model_a, c.model_b);
    if (std::find(pairs.begin(), pairs.end(), pair) == pairs.end())
      pairs.push_back(pair);
  }
  std::sort(leagues.begin(), leagues.end());

  std::ostringstream out;
  out << "## Pairwise Brier differences (paired t-tests by game)\n\n";
  out << "| comparison |";
  for (const auto& lg : leagues) out << ' ' << lg << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < leagues.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& [a, b] : pairs) {
    out << "| " << a << " - " << b << " |";
    for (const auto& lg : leagues) {
      auto it = std::find_if(cells.begin(), cells.end(),
                             [&](const PairwiseCell& c) {
                               return c.model_a == a && c.model_b == b &&
                                      c.league == lg;
                             });
      if (it == cells.end()) {
        out << " - |";
      } else {
        out << ' ' << fixed4(it->test.mean_diff) << " ("
            << (it->test.degenerate ? "degenerate"
                                    : significance_code(it->test.p))
            << ") |";
      }
    }
    out << '\n';
  }
  out << '\n';
  return out.str();
}

std::string exclusion_csv(const ExclusionResult& result) {
  std::ostringstream out;
  out << "league,model,diff_before,ci_lo_before,ci_hi_before,p_before,"
         "n_before,diff_after,ci_lo_after,ci_hi_after,p_after,n_after\n";
  for (const auto& r : result.diffs) {
    out << csv_escape(r.league) << ',' << csv_escape(r.model) << ','
        << format_double(r.diff_before) << ',' << format_double(r.ci_lo_before)
        << ',' << format_double(r.ci_hi_before) << ','
        << format_double(r.p_before) << ',' << r.n_before << ',';
    if (r.have_after)
      out << format_double(r.diff_after) << ','
          << format_double(r.ci_lo_after) << ','
          << format_double(r.ci_hi_after) << ',' << format_double(r.p_after)
          << ',' << r.n_after;
    else
      out << ",,,,";
    out << '\n';
  }
  return out.str();
}

std::string exclusion_markdown(const ExclusionResult& result) {
  std::ostringstream out;
  out << "## Brier improvement over Null, before/after exclusion\n\n";
  out << "| league | model | before | after |\n|---|---|---|---|\n";
  for (const auto& r : result.diffs) {
    out << "| " << r.league << " | " << r.model << " | "
        << fixed4(r.diff_before) << " ("
        << significance_code(r.p_before) << ")" << " | ";
    if (r.have_after)
      out << fixed4(r.diff_after) << " (" << significance_code(r.p_after)
          << ")";
    else
      out << "-";
    out << " |\n";
  }
  out << '\n';
  return out.str();
}

std::string manifest_json(const BacktestReport& report) {
  nlohmann::json doc;
  doc["artifact_version"] = kArtifactVersion;
  doc["protocol"] = report.protocol;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(report.store_checksum));
  doc["store_checksum_fnv1a"] = buf;
  doc["config"] = nlohmann::json::parse(report.config.to_json_text());
  doc["leakage_checks"] = report.leakage_checks;
  nlohmann::json counters = nlohmann::json::object();
  for (const auto& [key, count] : report.counters) counters[key] = count;
  doc["counters"] = counters;
  doc["cells"] = report.cells.size();
  doc["records"] = report.records.size();
  return doc.dump(2) + "\n";
}

void emit_report(const BacktestReport& report,
                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "metrics.csv", metrics_csv(report));
  write_file(out_dir / "records.csv", records_csv(report));
  auto tests = pairwise_tests(report);
  write_file(out_dir / "ttests.csv", ttest_csv(tests));
  std::string md = report_markdown(report);
  if (!tests.empty()) md += ttest_markdown(tests);
  write_file(out_dir / "report.md", md);
  write_file(out_dir / "manifest.json", manifest_json(report));
}

void emit_exclusion(const ExclusionResult& result,
                    const std::filesystem::path& out_dir) {
  emit_report(result.before, out_dir / "before");
  if (!result.after.config.leagues.empty() || !result.after.cells.empty())
    emit_report(result.after, out_dir / "after");
  write_file(out_dir / "exclusion.csv", exclusion_csv(result));
  write_file(out_dir / "exclusion.md", exclusion_markdown(result));
}

}  // namespace footrank
