#include "footrank/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "footrank/error.hpp"
#include "footrank/mathx.hpp"
#include "footrank/probit.hpp"
#include "footrank/ratings.hpp"
#include "footrank/rng.hpp"
#include "footrank/valuation.hpp"

namespace footrank {

const std::vector<std::pair<std::string, std::string>> kDefaultPairs = {
    {"colley", "null"},           {"massey", "colley"},
    {"time-colley", "colley"},    {"tm-massey", "massey"},
    {"tm-regression", "tm-massey"}, {"betting-odds", "tm-regression"},
    {"betting-odds", "null"}};

std::vector<std::string> final_table(std::span<const MatchRecord> matches) {
  struct Row {
    int points = 0, gf = 0, ga = 0;
  };
  std::map<std::string, Row> table;
  for (const auto& m : matches) {
    auto& home = table[m.home_team];
    auto& away = table[m.away_team];
    home.gf += m.home_goals;
    home.ga += m.away_goals;
    away.gf += m.away_goals;
    away.ga += m.home_goals;
    switch (m.outcome()) {
      case Outcome::HomeWin: home.points += 3; break;
      case Outcome::AwayWin: away.points += 3; break;
      case Outcome::Draw:
        home.points += 1;
        away.points += 1;
        break;
    }
  }
  std::vector<std::pair<std::string, Row>> rows(table.begin(), table.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    const Row &x = a.second, &y = b.second;
    if (x.points != y.points) return x.points > y.points;
    if (x.gf - x.ga != y.gf - y.ga) return x.gf - x.ga > y.gf - y.ga;
    if (x.gf != y.gf) return x.gf > y.gf;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& [team, row] : rows) out.push_back(team);
  return out;
}

namespace {

using OrderKey = std::pair<Date, std::string>;

OrderKey order_key(const MatchRecord& m) { return {m.date, m.match_id}; }

std::uint64_t derive_seed(std::uint64_t root, const std::string& name) {
  return fnv1a(name) ^ root;
}

#ifdef _OPENMP
class ThreadScope {
 public:
  explicit ThreadScope(int threads) {
    if (threads > 0) {
      saved_ = omp_get_max_threads();
      omp_set_num_threads(threads);
    }
  }
  ~ThreadScope() {
    if (saved_ > 0) omp_set_num_threads(saved_);
  }

 private:
  int saved_ = 0;
};
#else
class ThreadScope {
 public:
  explicit ThreadScope(int) {}
};
#endif

struct CellOutput {
  std::vector<MetricCell> cells;
  std::vector<GameBrierRow> records;
  std::map<std::string, std::size_t> counters;
  std::size_t leakage_checks = 0;
};

// Season-indexed rating resolver. Plain methods ignore the season; the
// market-combined Massey adds the match season's scaled market value, since
// market vectors are fitted per league-season.
struct RatingModelCtx {
  std::string name;
  std::function<std::optional<double>(const std::string& team, int season)>
      lookup;
  std::optional<ProbitModel> probit;
};

struct MarketBook {
  std::map<std::pair<std::string, int>, std::map<std::string, double>> maps;

  const std::map<std::string, double>* find(const std::string& league,
                                            int season) const {
    auto it = maps.find({league, season});
    return it == maps.end() ? nullptr : &*&it->second;
  }
};

// Builds per-league-season market vectors for every season with usable
// valuations; failures (missing values, degenerate data) leave gaps that
// make the combined model unavailable there.
MarketBook build_market_book(const MatchStore& store,
                             const std::vector<std::string>& codes) {
  MarketBook book;
  for (const auto& code : codes)
    for (int season : store.seasons_of(code)) {
      try {
        book.maps[{code, season}] = season_market_vector(store, code, season);
      } catch (const Error&) {
        // left absent
      }
    }
  return book;
}

std::optional<ProbitModel> try_fit(std::span<const ProbitDesignRow> rows,
                                   bool parallel) {
  if (rows.size() < 30) return std::nullopt;
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& r : rows) counts[static_cast<std::size_t>(r.y)]++;
  if (counts[0] == 0 || counts[1] == 0 || counts[2] == 0) return std::nullopt;
  ProbitFitOptions opts;
  opts.parallel = parallel;
  try {
    return fit_ordered_probit(rows, opts);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<ProbitDesignRow> rating_rows_for(
    std::span<const MatchRecord> window, const RatingModelCtx& model,
    std::size_t& skipped) {
  std::vector<ProbitDesignRow> rows;
  rows.reserve(window.size());
  for (const auto& m : window) {
    auto rh = model.lookup(m.home_team, m.season);
    auto ra = model.lookup(m.away_team, m.season);
    if (!rh || !ra) {
      ++skipped;
      continue;
    }
    ProbitDesignRow row;
    row.x = {*rh - *ra};
    Outcome res = m.outcome();
    row.y = res == Outcome::Draw      ? Ordinal::Draw
            : res == Outcome::HomeWin ? Ordinal::Win
                                      : Ordinal::Loss;
    rows.push_back(std::move(row));
  }
  return rows;
}

// Scores every test match with every active model, imputing the Null
// forecast wherever a model cannot score a match. `boundary` is the latest
// (date, match_id) of any training match used in this cell.
void score_tests(const std::string& league, int season,
                 std::span<const MatchRecord> test,
                 const ProbitModel& null_model,
                 const std::optional<ProbitModel>& tm_model,
                 std::span<const RatingModelCtx> rating_models,
                 const std::set<std::string>& active, const OrderKey& boundary,
                 CellOutput& out) {
  const double plus_one[] = {1.0};
  const OutcomeForecast null_forecast =
      predict_outcome(null_model, std::span<const double>(plus_one, 1));

  auto emit = [&](const MatchRecord& m, const std::string& model,
                  const std::optional<OutcomeForecast>& forecast) {
    GameBrierRow row;
    row.league = league;
    row.season = season;
    row.match_id = m.match_id;
    row.date = m.date;
    row.model = model;
    row.substituted = !forecast.has_value();
    row.forecast = forecast.value_or(null_forecast);
    row.outcome = m.outcome();
    row.brier = brier_score(row.forecast, row.outcome);
    out.records.push_back(std::move(row));
    if (!forecast) out.counters["substituted/" + model]++;
  };

  for (const auto& m : test) {
    if (!(boundary < order_key(m)))
      throw Error("leakage: training window reaches " + boundary.second +
                  " at/after predicted match " + m.match_id);
    out.leakage_checks++;

    if (active.count("null")) emit(m, "null", null_forecast);

    if (active.count("betting-odds")) {
      std::optional<OutcomeForecast> f;
      if (m.odds) {
        auto p = implied_probabilities(*m.odds);
        f = OutcomeForecast{p.win, p.draw, p.loss};
      }
      emit(m, "betting-odds", f);
    }

    if (active.count("tm-regression")) {
      std::optional<OutcomeForecast> f;
      if (tm_model && m.home_lineup_value && m.away_lineup_value) {
        double x[2] = {1.0, log_lineup_value(*m.home_lineup_value) -
                                log_lineup_value(*m.away_lineup_value)};
        f = predict_outcome(*tm_model, std::span<const double>(x, 2));
      }
      emit(m, "tm-regression", f);
    }

    for (const auto& model : rating_models) {
      if (!active.count(model.name)) continue;
      std::optional<OutcomeForecast> f;
      if (model.probit) {
        auto rh = model.lookup(m.home_team, season);
        auto ra = model.lookup(m.away_team, season);
        if (rh && ra) {
          double x[1] = {*rh - *ra};
          f = predict_outcome(*model.probit, std::span<const double>(x, 1));
        }
      }
      emit(m, model.name, f);
    }
  }

  // Per-model league-season means over the rows this model truly scored.
  std::map<std::string, std::vector<BrierRecord>> by_model;
  for (const auto& r : out.records) {
    if (r.league != league || r.season != season) continue;
    by_model[r.model].push_back(
        {r.match_id, r.model, r.forecast, r.outcome, r.brier, r.substituted});
  }
  for (const auto& [model, records] : by_model) {
    std::size_t scored = 0;
    for (const auto& r : records)
      if (!r.substituted) ++scored;
    if (scored == 0) continue;  // cell absent
    out.cells.push_back(
        {league, season, model, "brier", mean_brier(records), scored});
  }
}

void merge_outputs(std::vector<CellOutput>& outs, BacktestReport& report) {
  std::map<std::string, std::size_t> counters;
  for (auto& out : outs) {
    report.cells.insert(report.cells.end(), out.cells.begin(),
                        out.cells.end());
    report.records.insert(report.records.end(), out.records.begin(),
                          out.records.end());
    for (const auto& [key, count] : out.counters) counters[key] += count;
    report.leakage_checks += out.leakage_checks;
  }
  report.counters.assign(counters.begin(), counters.end());
  std::sort(report.cells.begin(), report.cells.end(),
            [](const MetricCell& a, const MetricCell& b) {
              return std::tie(a.league, a.season, a.model, a.metric) <
                     std::tie(b.league, b.season, b.model, b.metric);
            });
  std::sort(report.records.begin(), report.records.end(),
            [](const GameBrierRow& a, const GameBrierRow& b) {
              return std::tie(a.league, a.season, a.match_id, a.model) <
                     std::tie(b.league, b.season, b.match_id, b.model);
            });
}

// Appends season==0 aggregate rows: the per-league mean of the per-season
// metric values, seasons weighted equally.
void append_aggregates(BacktestReport& report, const std::string& metric) {
  std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>>
      sums;
  for (const auto& cell : report.cells) {
    if (cell.metric != metric || cell.season == 0) continue;
    auto& slot = sums[{cell.league, cell.model}];
    slot.first += cell.value;
    slot.second++;
  }
  std::vector<MetricCell> aggregates;
  for (const auto& [key, sum] : sums)
    aggregates.push_back({key.first, 0, key.second, metric + "_mean",
                          sum.first / static_cast<double>(sum.second),
                          sum.second});
  report.cells.insert(report.cells.end(), aggregates.begin(),
                      aggregates.end());
  std::sort(report.cells.begin(), report.cells.end(),
            [](const MetricCell& a, const MetricCell& b) {
              return std::tie(a.league, a.season, a.model, a.metric) <
                     std::tie(b.league, b.season, b.model, b.metric);
            });
}

template <typename Fn>
void parallel_cells(std::size_t count, bool parallel, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel && count > 1)
#endif
  for (long long i = 0; i < static_cast<long long>(count); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
#ifndef _OPENMP
  (void)parallel;
#endif
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::set<std::string> active_model_set(const ExperimentConfig& cfg) {
  auto models = cfg.active_models();
  return {models.begin(), models.end()};
}

std::vector<int> evaluated_seasons(const MatchStore& store,
                                   const ExperimentConfig& cfg) {
  std::set<int> present;
  for (const auto& code : cfg.league_codes())
    for (int s : store.seasons_of(code)) present.insert(s);
  std::vector<int> out;
  for (int y = cfg.first_season; y <= cfg.last_season; ++y)
    if (present.count(y)) out.push_back(y);
  return out;
}

int count_prior_seasons(const MatchStore& store, const ExperimentConfig& cfg,
                        int season) {
  std::set<int> prior;
  for (const auto& code : cfg.league_codes())
    for (int s : store.seasons_of(code))
      if (s < season) prior.insert(s);
  return static_cast<int>(prior.size());
}

Date season_start(const MatchStore& store, const ExperimentConfig& cfg,
                  int season) {
  std::optional<Date> start;
  for (const auto& code : cfg.league_codes())
    for (const auto& m : store.league_season(code, season))
      if (!start || m.date < *start) start = m.date;
  if (!start)
    throw InfeasibleError("season " + std::to_string(season) +
                          " absent from store");
  return *start;
}

struct TrainedRatings {
  std::optional<RatingVector> colley;
  std::optional<RatingVector> massey;
  std::optional<RatingVector> time_colley;
  std::optional<RatingVector> massey_home_time;  // r_hat of the combined model
  std::vector<std::pair<std::string, std::string>> failures;  // method, why
};

// Only the methods in the active set are trained, so a disabled method can
// never fail a run. A method that cannot be trained on this window (e.g. a
// disconnected Massey graph) is recorded rather than thrown; the ranking
// protocol turns failures back into errors.
TrainedRatings train_ratings(std::span<const MatchRecord> training,
                             const ExperimentConfig& cfg,
                             const std::set<std::string>& active) {
  TrainedRatings out;
  auto attempt = [&](const char* name, auto&& fn,
                     std::optional<RatingVector>& slot) {
    if (!active.count(name)) return;
    try {
      slot = fn();
    } catch (const Error& e) {
      out.failures.emplace_back(name, e.what());
    }
  };
  attempt(
      "colley",
      [&] { return colley_rate(training, {{}, cfg.colley_draws}); },
      out.colley);
  attempt("massey", [&] { return massey_rate(training, {}); }, out.massey);
  attempt(
      "time-colley",
      [&] {
        auto weights = time_weights(training);
        return colley_rate(training, {weights, cfg.colley_draws});
      },
      out.time_colley);
  attempt(
      "tm-massey",
      [&] {
        auto weights = time_weights(training);
        return massey_rate(training, {weights, true});
      },
      out.massey_home_time);
  return out;
}

// The rating-based forecasters, sharing one training window. A model whose
// training failed (or whose market data is missing) resolves to nothing and
// ends up substituted per match, keeping the record set aligned.
std::vector<RatingModelCtx> make_rating_models(
    const TrainedRatings& ratings, const MarketBook* book,
    const std::string& league, double market_mix) {
  std::vector<RatingModelCtx> out;
  auto plain = [](const std::optional<RatingVector>* rv) {
    return [rv](const std::string& team, int) -> std::optional<double> {
      if (!rv->has_value()) return std::nullopt;
      return (*rv)->at_or_default(team);
    };
  };
  out.push_back({"colley", plain(&ratings.colley), std::nullopt});
  out.push_back({"massey", plain(&ratings.massey), std::nullopt});
  out.push_back({"time-colley", plain(&ratings.time_colley), std::nullopt});
  const std::optional<RatingVector>* hat = &ratings.massey_home_time;
  out.push_back(
      {"tm-massey",
       [hat, book, league, market_mix](
           const std::string& team, int season) -> std::optional<double> {
         if (!hat->has_value() || !book) return std::nullopt;
         const auto* market = book->find(league, season);
         if (!market) return std::nullopt;
         auto it = market->find(team);
         if (it == market->end()) return std::nullopt;
         return (*hat)->at_or_default(team) + market_mix * it->second;
       },
       std::nullopt});
  return out;
}

}  // namespace

BacktestReport run_eos_ranking(const MatchStore& store,
                               const ExperimentConfig& cfg) {
  cfg.validate();
  cfg.validate_against(store);
  ThreadScope threads(cfg.threads);

  BacktestReport report;
  report.protocol = "eos";
  report.config = cfg;

  auto seasons = evaluated_seasons(store, cfg);
  if (seasons.empty())
    throw InfeasibleError("no evaluated season has matches in the store");
  for (int y : seasons)
    if (count_prior_seasons(store, cfg, y) < 1) {
      int earliest = y + 1;
      throw InfeasibleError(
          "season " + std::to_string(y) +
          " has no prior data; earliest feasible season is " +
          std::to_string(earliest));
    }

  const auto codes = cfg.league_codes();
  const auto active = active_model_set(cfg);

  MarketBook book;
  bool want_market = active.count("tm-massey") != 0;
  if (want_market) book = build_market_book(store, codes);

  std::vector<CellOutput> outs(seasons.size());
  parallel_cells(seasons.size(), cfg.threads != 1, [&](std::size_t i) {
    const int year = seasons[i];
    CellOutput& out = outs[i];

    Date cutoff = season_start(store, cfg, year);
    MatchFilter filter;
    filter.leagues = codes;
    filter.before_date = cutoff;
    auto training = store.query(filter);
    if (training.empty())
      throw InfeasibleError("no training matches before season " +
                            std::to_string(year));
    TrainedRatings ratings = train_ratings(training, cfg, active);
    if (!ratings.failures.empty())
      throw Error("season " + std::to_string(year) + ": " +
                  ratings.failures.front().first + ": " +
                  ratings.failures.front().second);

    OrderKey boundary = order_key(training.front());
    for (const auto& m : training) boundary = std::max(boundary, order_key(m));

    for (const auto& code : codes) {
      auto season_matches = store.league_season(code, year);
      if (season_matches.empty()) {
        out.counters["absent/" + code + ":" + std::to_string(year)]++;
        continue;
      }
      // Ranking uses no per-game forecasts; the leakage check applies to
      // the training cutoff against the league's first fixture.
      if (!(boundary < order_key(season_matches.front())))
        throw Error("leakage: training window overlaps season " +
                    std::to_string(year));
      out.leakage_checks++;

      auto actual = final_table(season_matches);
      std::map<std::string, std::string> membership;
      for (const auto& team : actual) membership[team] = code;

      auto rating_models =
          make_rating_models(ratings, want_market ? &book : nullptr, code,
                             cfg.market_mix);
      for (const auto& model : rating_models) {
        if (!active.count(model.name)) continue;
        RatingVector view;
        view.method = model.name;
        bool complete = true;
        for (const auto& team : actual) {
          auto r = model.lookup(team, year);
          if (!r) {
            complete = false;
            break;
          }
          view.values[team] = *r;
        }
        if (!complete) {
          out.counters["unavailable/" + model.name + "/" + code + ":" +
                       std::to_string(year)]++;
          continue;
        }
        auto ranked = rank_teams(view, membership);
        std::vector<std::string> predicted;
        for (const auto& row : ranked.at(code)) predicted.push_back(row.team);
        double tau = kendall_tau(predicted, actual);
        out.cells.push_back(
            {code, year, model.name, "kendall_tau", tau, actual.size()});
      }
    }
  });

  merge_outputs(outs, report);
  append_aggregates(report, "kendall_tau");
  return report;
}

namespace {

// Shared by the in-season and out-of-season runners: fit the per-league
// Null / Transfermarkt probits on this league's earlier seasons.
struct LeaguePriorModels {
  std::optional<ProbitModel> null_model;
  std::optional<ProbitModel> tm_model;
  OrderKey boundary;  // latest (date, id) among prior matches
  bool has_prior = false;
  std::size_t tm_rows_skipped = 0;
};

LeaguePriorModels fit_prior_models(const MatchStore& store,
                                   const ExperimentConfig& cfg,
                                   const std::string& league, int season,
                                   bool parallel) {
  LeaguePriorModels out;
  std::vector<MatchRecord> prior;
  for (const auto& m : store.matches())
    if (m.league == league && m.season < season) prior.push_back(m);
  if (prior.empty()) return out;
  out.has_prior = true;
  out.boundary = order_key(prior.front());
  for (const auto& m : prior) out.boundary = std::max(out.boundary, order_key(m));

  std::uint64_t seed = derive_seed(
      cfg.rng_seed, "probit-orient/" + league + "/" + std::to_string(season));
  auto null_rows = build_null_rows(prior, seed);
  out.null_model = try_fit(null_rows, parallel);
  auto tm = build_tm_rows(prior, seed);
  out.tm_rows_skipped = tm.skipped;
  out.tm_model = try_fit(tm.rows, parallel);
  return out;
}

}  // namespace

BacktestReport run_in_season(const MatchStore& store,
                             const ExperimentConfig& cfg) {
  cfg.validate();
  cfg.validate_against(store);
  ThreadScope threads(cfg.threads);

  BacktestReport report;
  report.protocol = "in-season";
  report.config = cfg;

  const auto codes = cfg.league_codes();
  const auto active = active_model_set(cfg);

  struct Cell {
    std::string league;
    int season;
  };
  std::vector<Cell> cells;
  std::map<std::string, std::size_t> setup_counters;
  for (const auto& code : codes)
    for (int y = cfg.first_season; y <= cfg.last_season; ++y) {
      auto ms = store.league_season(code, y);
      if (ms.empty()) {
        setup_counters["absent/" + code + ":" + std::to_string(y)]++;
        continue;
      }
      if (ms.size() < 10) {
        setup_counters["skipped-small/" + code + ":" + std::to_string(y)]++;
        continue;
      }
      cells.push_back({code, y});
    }
  if (cells.empty())
    throw InfeasibleError("no league-season in the configured range has data");

  const bool cells_parallel = cfg.threads != 1;
  std::vector<CellOutput> outs(cells.size());
  parallel_cells(cells.size(), cells_parallel, [&](std::size_t i) {
    const auto& [code, year] = cells[i];
    CellOutput& out = outs[i];

    auto ms = store.league_season(code, year);
    const std::size_t n = ms.size();
    auto n_train = static_cast<std::size_t>(
        std::ceil(cfg.split_fraction * static_cast<double>(n) - 1e-9));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    std::span<const MatchRecord> train(ms.data(), n_train);
    std::span<const MatchRecord> test(ms.data() + n_train, n - n_train);

    auto prior = fit_prior_models(store, cfg, code, year, !cells_parallel);
    if (prior.tm_rows_skipped)
      out.counters["tm-train-rows-skipped/" + code + ":" +
                   std::to_string(year)] += prior.tm_rows_skipped;
    if (!prior.null_model) {
      out.counters["skipped-no-null/" + code + ":" + std::to_string(year)]++;
      return;
    }
    if (!prior.tm_model && active.count("tm-regression"))
      out.counters["unavailable/tm-regression/" + code + ":" +
                   std::to_string(year)]++;

    TrainedRatings ratings = train_ratings(train, cfg, active);
    for (const auto& [method, why] : ratings.failures)
      out.counters["rating-failed/" + method + "/" + code + ":" +
                   std::to_string(year)]++;

    // Market values for the combined model come from the training window
    // only, so the held-out fifth stays unseen.
    MarketBook window_book;
    bool have_market = false;
    if (active.count("tm-massey")) {
      try {
        window_book.maps[{code, year}] = market_vector(train);
        have_market = true;
      } catch (const Error&) {
        out.counters["no-market/" + code + ":" + std::to_string(year)]++;
      }
    }

    auto rating_models = make_rating_models(
        ratings, have_market ? &window_book : nullptr, code, cfg.market_mix);
    for (auto& model : rating_models) {
      if (!active.count(model.name)) continue;
      std::size_t skipped = 0;
      auto rows = rating_rows_for(train, model, skipped);
      model.probit = try_fit(rows, !cells_parallel);
      if (!model.probit)
        out.counters["unavailable/" + model.name + "/" + code + ":" +
                     std::to_string(year)]++;
    }

    OrderKey boundary = order_key(train.back());
    for (const auto& m : train) boundary = std::max(boundary, order_key(m));
    if (prior.has_prior) boundary = std::max(boundary, prior.boundary);

    score_tests(code, year, test, *prior.null_model, prior.tm_model,
                rating_models, active, boundary, out);
  });

  merge_outputs(outs, report);
  for (const auto& [key, count] : setup_counters) {
    report.counters.emplace_back(key, count);
  }
  std::sort(report.counters.begin(), report.counters.end());
  append_aggregates(report, "brier");
  return report;
}

BacktestReport run_out_of_season(const MatchStore& store,
                                 const ExperimentConfig& cfg) {
  cfg.validate();
  cfg.validate_against(store);
  ThreadScope threads(cfg.threads);

  BacktestReport report;
  report.protocol = "out-of-season";
  report.config = cfg;

  const auto codes = cfg.league_codes();
  const auto active = active_model_set(cfg);

  for (int y = cfg.first_season; y <= cfg.last_season; ++y) {
    bool present = false;
    for (const auto& code : codes)
      if (!store.league_season(code, y).empty()) present = true;
    if (!present)
      throw InfeasibleError("evaluated season " + std::to_string(y) +
                            " absent from store");
    if (count_prior_seasons(store, cfg, y) < 2) {
      std::set<int> all;
      for (const auto& code : codes)
        for (int s : store.seasons_of(code)) all.insert(s);
      int earliest = all.empty() ? y : *all.begin() + 2;
      throw InfeasibleError("season " + std::to_string(y) +
                            " has fewer than 2 prior seasons; earliest "
                            "feasible season is " +
                            std::to_string(earliest));
    }
  }

  auto seasons = evaluated_seasons(store, cfg);
  MarketBook book;
  bool want_market = active.count("tm-massey") != 0;
  if (want_market) book = build_market_book(store, codes);

  std::vector<CellOutput> outs(seasons.size());
  const bool cells_parallel = cfg.threads != 1;
  parallel_cells(seasons.size(), cells_parallel, [&](std::size_t i) {
    const int year = seasons[i];
    CellOutput& out = outs[i];

    Date cutoff = season_start(store, cfg, year);
    MatchFilter filter;
    filter.leagues = codes;
    filter.before_date = cutoff;
    auto training = store.query(filter);
    TrainedRatings ratings = train_ratings(training, cfg, active);
    for (const auto& [method, why] : ratings.failures)
      out.counters["rating-failed/" + method + "/" + std::to_string(year)]++;
    OrderKey boundary = order_key(training.front());
    for (const auto& m : training) boundary = std::max(boundary, order_key(m));

    for (const auto& code : codes) {
      auto test = store.league_season(code, year);
      if (test.empty()) {
        out.counters["absent/" + code + ":" + std::to_string(year)]++;
        continue;
      }

      auto prior = fit_prior_models(store, cfg, code, year, !cells_parallel);
      if (prior.tm_rows_skipped)
        out.counters["tm-train-rows-skipped/" + code + ":" +
                     std::to_string(year)] += prior.tm_rows_skipped;
      if (!prior.null_model) {
        out.counters["skipped-no-null/" + code + ":" + std::to_string(year)]++;
        continue;
      }
      if (!prior.tm_model && active.count("tm-regression"))
        out.counters["unavailable/tm-regression/" + code + ":" +
                     std::to_string(year)]++;

      // Rating-differential probits are calibrated per league on that
      // league's earlier matches, with covariates from the joint ratings.
      std::vector<MatchRecord> league_prior;
      for (const auto& m : training)
        if (m.league == code) league_prior.push_back(m);

      auto rating_models = make_rating_models(
          ratings, want_market ? &book : nullptr, code, cfg.market_mix);
      for (auto& model : rating_models) {
        if (!active.count(model.name)) continue;
        std::size_t skipped = 0;
        auto rows = rating_rows_for(league_prior, model, skipped);
        if (skipped)
          out.counters["rating-train-rows-skipped/" + model.name + "/" + code +
                       ":" + std::to_string(year)] += skipped;
        model.probit = try_fit(rows, !cells_parallel);
        if (!model.probit)
          out.counters["unavailable/" + model.name + "/" + code + ":" +
                       std::to_string(year)]++;
      }

      OrderKey league_boundary = std::max(boundary, prior.boundary);
      score_tests(code, year, test, *prior.null_model, prior.tm_model,
                  rating_models, active, league_boundary, out);
    }
  });

  merge_outputs(outs, report);
  append_aggregates(report, "brier");
  return report;
}

BacktestReport run_protocol(const std::string& protocol,
                            const MatchStore& store,
                            const ExperimentConfig& cfg) {
  if (protocol == "eos") return run_eos_ranking(store, cfg);
  if (protocol == "in-season") return run_in_season(store, cfg);
  if (protocol == "out-of-season") return run_out_of_season(store, cfg);
  throw Error("unknown protocol '" + protocol +
              "' (expected eos, in-season, out-of-season)");
}

std::vector<PairwiseCell> pairwise_tests(
    std::span<const GameBrierRow> records,
    std::vector<std::pair<std::string, std::string>> pairs) {
  if (pairs.empty()) pairs = kDefaultPairs;

  std::set<std::string> models;
  std::set<std::string> leagues;
  for (const auto& r : records) {
    models.insert(r.model);
    leagues.insert(r.league);
  }

  std::vector<PairwiseCell> out;
  for (const auto& [model_a, model_b] : pairs) {
    if (!models.count(model_a) || !models.count(model_b)) continue;
    for (const auto& league : leagues) {
      std::vector<GameScore> a, b;
      for (const auto& r : records) {
        if (r.league != league) continue;
        if (r.model == model_a) a.push_back({r.match_id, r.brier});
        if (r.model == model_b) b.push_back({r.match_id, r.brier});
      }
      if (a.size() < 2 || a.size() != b.size()) continue;
      out.push_back({model_a, model_b, league, paired_t_test(a, b)});
    }
  }
  return out;
}

std::vector<PairwiseCell> pairwise_tests(
    const BacktestReport& report,
    std::vector<std::pair<std::string, std::string>> pairs) {
  return pairwise_tests(std::span<const GameBrierRow>(report.records),
                        std::move(pairs));
}

ExclusionResult run_exclusion(const MatchStore& store,
                              const ExperimentConfig& cfg,
                              const std::vector<std::string>& excluded) {
  auto known = store.teams();
  for (const auto& team : excluded)
    if (!known.count(team))
      throw Error("excluded team '" + team + "' is not in the store");

  ExclusionResult result;
  result.before = run_protocol(cfg.exclusion_protocol, store, cfg);

  MatchStore filtered;
  {
    std::vector<MatchRecord> keep;
    for (const auto& m : store.matches()) {
      bool hit = false;
      for (const auto& team : excluded)
        if (m.involves(team)) hit = true;
      if (!hit) keep.push_back(m);
    }
    filtered.add(std::move(keep));
  }
  // Exclusion can empty a league entirely; such leagues drop out of the
  // after-run and their cells are simply absent.
  ExperimentConfig after_cfg = cfg;
  after_cfg.excluded_teams.clear();
  std::erase_if(after_cfg.leagues, [&](const LeagueSpec& lg) {
    return !filtered.has_league(lg.code);
  });
  if (after_cfg.leagues.empty()) {
    result.after.protocol = cfg.exclusion_protocol;
    result.after.config = after_cfg;
  } else {
    result.after = run_protocol(cfg.exclusion_protocol, filtered, after_cfg);
  }

  auto diff_table = [](const BacktestReport& report) {
    std::map<std::pair<std::string, std::string>, PairedTestResult> out;
    std::set<std::string> models;
    for (const auto& r : report.records) models.insert(r.model);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& model : models)
      if (model != "null") pairs.emplace_back(model, "null");
    for (const auto& cell : pairwise_tests(report, pairs))
      out[{cell.league, cell.model_a}] = cell.test;
    return out;
  };

  auto before_map = diff_table(result.before);
  auto after_map = diff_table(result.after);

  auto ci_half = [](const PairedTestResult& test) {
    if (test.degenerate) return 0.0;
    return student_t_ppf(0.975, static_cast<double>(test.df)) * test.se;
  };
  for (const auto& [key, test] : before_map) {
    ExclusionDiffRow row;
    row.league = key.first;
    row.model = key.second;
    row.diff_before = test.mean_diff;
    row.p_before = test.p;
    row.n_before = test.n;
    row.ci_lo_before = test.mean_diff - ci_half(test);
    row.ci_hi_before = test.mean_diff + ci_half(test);
    auto it = after_map.find(key);
    if (it != after_map.end()) {
      const auto& t2 = it->second;
      row.have_after = true;
      row.diff_after = t2.mean_diff;
      row.p_after = t2.p;
      row.n_after = t2.n;
      row.ci_lo_after = t2.mean_diff - ci_half(t2);
      row.ci_hi_after = t2.mean_diff + ci_half(t2);
    }
    result.diffs.push_back(std::move(row));
  }
  std::sort(result.diffs.begin(), result.diffs.end(),
            [](const ExclusionDiffRow& a, const ExclusionDiffRow& b) {
              return std::tie(a.league, a.model) < std::tie(b.league, b.model);
            });
  return result;
}

}  // namespace footrank
