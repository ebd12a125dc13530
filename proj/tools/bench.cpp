// Times the OpenMP-parallel kernels against their serial references:
// the ordered-probit likelihood accumulation and the backtest cell loop.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "footrank/backtest.hpp"
#include "footrank/config.hpp"
#include "footrank/mathx.hpp"
#include "footrank/probit.hpp"
#include "footrank/rng.hpp"

using namespace footrank;

namespace {

double seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

PackedDesign synthetic_design(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ProbitDesignRow> rows;
  rows.reserve(n);
  const double beta[2] = {0.3, 0.8};
  for (std::size_t i = 0; i < n; ++i) {
    ProbitDesignRow row;
    row.x = {rng.coin() ? 1.0 : -1.0, rng.normal()};
    double latent = beta[0] * row.x[0] + beta[1] * row.x[1] + rng.normal();
    row.y = latent < -0.4 ? Ordinal::Loss
            : latent < 0.4 ? Ordinal::Draw
                           : Ordinal::Win;
    rows.push_back(std::move(row));
  }
  return PackedDesign::from_rows(rows);
}

// One league, round-robin double fixtures with probit-generated outcomes.
MatchStore synthetic_store(int teams, int seasons, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> strength(teams);
  for (auto& s : strength) s = rng.normal();

  std::vector<MatchRecord> records;
  int counter = 0;
  for (int season = 0; season < seasons; ++season) {
    int day = 0;
    for (int round = 0; round < 2; ++round)
      for (int i = 0; i < teams; ++i)
        for (int j = 0; j < teams; ++j) {
          if (i == j) continue;
          int home = round == 0 ? i : j;
          int away = round == 0 ? j : i;
          MatchRecord m;
          m.league = "SYN";
          m.season = 2000 + season;
          int serial = day++;
          m.date = Date{2000 + season, 1 + (serial / 28) % 12,
                        1 + serial % 28};
          m.match_id = "SYN:" + std::to_string(m.season) + ":" +
                       std::to_string(counter++);
          m.home_team = "T" + std::to_string(home);
          m.away_team = "T" + std::to_string(away);
          double z = strength[home] - strength[away] + 0.3 + rng.normal();
          if (z < -0.4) {
            m.home_goals = 0;
            m.away_goals = 1 + rng.uniform_int(0, 2);
          } else if (z < 0.4) {
            m.home_goals = m.away_goals = rng.uniform_int(0, 2);
          } else {
            m.home_goals = 1 + rng.uniform_int(0, 2);
            m.away_goals = 0;
          }
          double ph = norm_cdf(strength[home] - strength[away] + 0.3 - 0.4);
          m.odds = OddsTriple{1.0 / std::max(ph, 0.05), 3.5,
                              1.0 / std::max(0.9 - ph, 0.05)};
          m.home_lineup_value = 1e6 * std::exp(strength[home]);
          m.away_lineup_value = 1e6 * std::exp(strength[away]);
          records.push_back(std::move(m));
        }
  }
  MatchStore store;
  store.add(std::move(records));
  return store;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 500000;
  int reps = 20;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--rows" && i + 1 < argc) n = std::stoul(argv[++i]);
    if (arg == "--reps" && i + 1 < argc) reps = std::stoi(argv[++i]);
  }

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP: disabled at build time\n");
#endif

  // --- likelihood kernel ---------------------------------------------------
  PackedDesign design = synthetic_design(n, 42);
  const double beta[2] = {0.25, 0.7};
  std::span<const double> beta_span(beta, 2);

  auto t0 = std::chrono::steady_clock::now();
  double sink = 0.0;
  for (int r = 0; r < reps; ++r)
    sink += ordered_probit_loglik_serial(design, beta_span, -0.4, 0.4).loglik;
  double serial_time = seconds(t0) / reps;

  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r)
    sink += ordered_probit_loglik(design, beta_span, -0.4, 0.4, false).loglik;
  double chunked_time = seconds(t0) / reps;

  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r)
    sink += ordered_probit_loglik(design, beta_span, -0.4, 0.4, true).loglik;
  double parallel_time = seconds(t0) / reps;

  std::printf("\nordered-probit loglik, n=%zu, mean of %d reps\n", n, reps);
  std::printf("  %-28s %10.3f ms\n", "serial reference", serial_time * 1e3);
  std::printf("  %-28s %10.3f ms\n", "chunked, 1 thread", chunked_time * 1e3);
  std::printf("  %-28s %10.3f ms  (x%.2f vs serial)\n", "chunked, OpenMP",
              parallel_time * 1e3, serial_time / parallel_time);

  // --- full fit ------------------------------------------------------------
  {
    std::vector<ProbitDesignRow> rows;
    rows.reserve(design.n);
    for (std::size_t i = 0; i < design.n; ++i) {
      ProbitDesignRow row;
      row.x = {design.x[2 * i], design.x[2 * i + 1]};
      row.y = static_cast<Ordinal>(design.y[i]);
      rows.push_back(std::move(row));
    }
    ProbitFitOptions serial_opts;
    serial_opts.parallel = false;
    t0 = std::chrono::steady_clock::now();
    auto m1 = fit_ordered_probit(rows, serial_opts);
    double fit_serial = seconds(t0);
    t0 = std::chrono::steady_clock::now();
    auto m2 = fit_ordered_probit(rows, {});
    double fit_parallel = seconds(t0);
    std::printf("\nfull fit, n=%zu (%d / %d iterations)\n", design.n,
                m1.iterations, m2.iterations);
    std::printf("  %-28s %10.3f ms\n", "1 thread", fit_serial * 1e3);
    std::printf("  %-28s %10.3f ms  (x%.2f)\n", "OpenMP", fit_parallel * 1e3,
                fit_serial / fit_parallel);
  }

  // --- backtest cells --------------------------------------------------
  {
    MatchStore store = synthetic_store(16, 6, 7);
    ExperimentConfig cfg;
    cfg.leagues.push_back({"SYN", 1, ""});
    cfg.first_season = 2002;
    cfg.last_season = 2005;
    cfg.rng_seed = 11;

    cfg.threads = 1;
    t0 = std::chrono::steady_clock::now();
    auto serial_report = run_in_season(store, cfg);
    double bt_serial = seconds(t0);

    cfg.threads = 0;
    t0 = std::chrono::steady_clock::now();
    auto parallel_report = run_in_season(store, cfg);
    double bt_parallel = seconds(t0);

    bool identical = serial_report.cells.size() == parallel_report.cells.size();
    for (std::size_t i = 0; identical && i < serial_report.cells.size(); ++i)
      identical = serial_report.cells[i].value == parallel_report.cells[i].value;

    std::printf("\nin-season backtest, %zu records\n",
                serial_report.records.size());
    std::printf("  %-28s %10.3f ms\n", "cells serial", bt_serial * 1e3);
    std::printf("  %-28s %10.3f ms  (x%.2f, results %s)\n", "cells OpenMP",
                bt_parallel * 1e3, bt_serial / bt_parallel,
                identical ? "identical" : "DIFFER");
    if (!identical) return 1;
  }

  return sink == 12345.0 ? 2 : 0;  // keep the optimizer honest
}
