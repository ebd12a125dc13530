#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "footrank/error.hpp"
#include "footrank/ratings.hpp"
#include "footrank/rng.hpp"
#include "helpers.hpp"

using namespace footrank;
using testutil::mk;

namespace {

// Random instance shared by the oracle comparisons.
std::vector<MatchRecord> random_matches(Rng& rng, int max_teams,
                                        int max_matches, bool allow_draws) {
  int n_teams = rng.uniform_int(2, max_teams);
  int n_matches = rng.uniform_int(1, max_matches);
  std::vector<MatchRecord> out;
  for (int k = 0; k < n_matches; ++k) {
    int home = rng.uniform_int(0, n_teams - 1);
    int away = rng.uniform_int(0, n_teams - 1);
    if (away == home) away = (away + 1) % n_teams;
    int hg = rng.uniform_int(0, 4);
    int ag = rng.uniform_int(0, 4);
    if (!allow_draws && hg == ag) hg++;
    out.push_back(mk("R", 2000, "2000-01-01", "T" + std::to_string(home),
                     "T" + std::to_string(away), hg, ag));
    out.back().date = Date{2000, 1 + k % 12, 1 + k % 28};
  }
  return out;
}

}  // namespace

TEST_CASE("time weight endpoints") {
  Date t0 = Date::parse("2010-08-01");
  Date tf = Date::parse("2010-08-31");
  CHECK(time_weight(t0, t0, tf) == 1.0);
  CHECK(time_weight(tf, t0, tf) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  // exact midpoint
  Date mid = Date::parse("2010-08-16");
  REQUIRE(mid - t0 == tf - mid);
  CHECK(time_weight(mid, t0, tf) ==
        doctest::Approx(std::exp(0.5)).epsilon(1e-12));
  CHECK(time_weight(t0, t0, t0) == 1.0);  // degenerate span
  CHECK_THROWS_AS(time_weight(Date::parse("2009-01-01"), t0, tf), Error);
  CHECK_THROWS_AS(time_weight(Date::parse("2012-01-01"), t0, tf), Error);
}

TEST_CASE("colley two-team hand example") {
  auto matches = std::vector<MatchRecord>{
      mk("E0", 2010, "2010-08-14", "A", "B", 1, 0)};
  auto r = colley_rate(matches);
  CHECK(std::fabs(r.values.at("A") - 0.625) < 1e-12);
  CHECK(std::fabs(r.values.at("B") - 0.375) < 1e-12);
}

TEST_CASE("colley degenerate cases") {
  SUBCASE("all draws leave the Laplace prior") {
    auto matches = std::vector<MatchRecord>{
        mk("E0", 2010, "2010-08-14", "A", "B", 1, 1),
        mk("E0", 2010, "2010-08-21", "B", "C", 0, 0)};
    auto r = colley_rate(matches);
    for (const auto& [team, rating] : r.values) CHECK(rating == 0.5);
  }
  SUBCASE("mirrored wins cancel") {
    auto matches = std::vector<MatchRecord>{
        mk("E0", 2010, "2010-08-14", "A", "B", 1, 0),
        mk("E0", 2010, "2010-08-21", "B", "A", 2, 0)};
    auto r = colley_rate(matches);
    CHECK(r.values.at("A") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.values.at("B") == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("weighted 3-vs-1 mirror favors the heavier win") {
    auto matches = std::vector<MatchRecord>{
        mk("E0", 2010, "2010-08-14", "A", "B", 1, 0),
        mk("E0", 2010, "2010-08-21", "B", "A", 2, 0)};
    std::vector<double> weights = {3.0, 1.0};
    auto r = colley_rate(matches, {weights, DrawPolicy::Drop});
    CHECK(r.values.at("A") == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r.values.at("B") == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(r.values.at("A") > 0.5);
    CHECK(0.5 > r.values.at("B"));
  }
  SUBCASE("unseen team resolves to the prior") {
    auto matches = std::vector<MatchRecord>{
        mk("E0", 2010, "2010-08-14", "A", "B", 1, 0)};
    auto r = colley_rate(matches);
    CHECK(r.at_or_default("Z") == 0.5);
  }
}

TEST_CASE("colley invariants on random instances") {
  Rng rng(2024);
  for (int rep = 0; rep < 60; ++rep) {
    auto matches = random_matches(rng, 8, 40, true);
    std::vector<double> weights;
    for (std::size_t k = 0; k < matches.size(); ++k)
      weights.push_back(0.1 + 3.0 * rng.uniform());
    auto opts = ColleyOptions{weights, DrawPolicy::Drop};
    auto sys = build_colley_system(matches, opts);
    for (std::size_t i = 0; i < sys.teams.size(); ++i) {
      double off_diag = 0.0;
      for (std::size_t j = 0; j < sys.teams.size(); ++j) {
        CHECK(sys.c(i, j) == sys.c(j, i));
        if (i != j) off_diag += std::fabs(sys.c(i, j));
      }
      CHECK(sys.c(i, i) == doctest::Approx(2.0 + off_diag).epsilon(1e-12));
      CHECK(sys.c(i, i) > off_diag);  // strict diagonal dominance
      CHECK(sys.b[i] ==
            doctest::Approx(1.0 + 0.5 * (sys.wins[i] - sys.losses[i]))
                .epsilon(1e-12));
    }
    auto r = colley_rate(matches, opts);

    double sum = 0.0;
    for (const auto& [team, rating] : r.values) {
      CHECK(rating > 0.0);
      CHECK(rating < 1.0);
      sum += rating;
    }
    CHECK(sum / static_cast<double>(r.values.size()) ==
          doctest::Approx(0.5).epsilon(1e-10));

    // label equivariance: renaming teams permutes ratings identically
    auto renamed = matches;
    for (auto& m : renamed) {
      m.home_team = "X" + m.home_team;
      m.away_team = "X" + m.away_team;
    }
    auto r2 = colley_rate(renamed, opts);
    for (const auto& [team, rating] : r.values)
      CHECK(r2.values.at("X" + team) == doctest::Approx(rating).epsilon(1e-12));

    // oracle equivalence
    auto oracle = testutil::colley_oracle(matches, weights);
    for (const auto& [team, rating] : r.values)
      CHECK(std::fabs(rating - oracle.at(team)) < 1e-8);
  }
}

TEST_CASE("colley residual stays tight on a 200-team instance") {
  Rng rng(5);
  std::vector<MatchRecord> matches;
  for (int k = 0; k < 2000; ++k) {
    int home = rng.uniform_int(0, 199);
    int away = (home + rng.uniform_int(1, 199)) % 200;
    matches.push_back(mk("R", 2000, "2000-06-15", "T" + std::to_string(home),
                         "T" + std::to_string(away), rng.uniform_int(0, 3),
                         rng.uniform_int(0, 3)));
  }
  auto sys = build_colley_system(matches);
  auto r = colley_rate(matches);
  std::vector<double> x;
  for (const auto& team : sys.teams) x.push_back(r.values.at(team));
  CHECK(residual_inf_norm(sys.c, x, sys.b) < 1e-10);
}

TEST_CASE("colley half-win draw policy keeps draws in the schedule") {
  auto matches = std::vector<MatchRecord>{
      mk("E0", 2010, "2010-08-14", "A", "B", 1, 0),
      mk("E0", 2010, "2010-08-21", "A", "C", 2, 2)};
  auto dropped = colley_rate(matches, {{}, DrawPolicy::Drop});
  auto half = colley_rate(matches, {{}, DrawPolicy::HalfWin});
  // With the draw dropped, C is untouched; half-win couples it to A, and
  // the strength-of-schedule term lifts it above the prior (hand solve:
  // r_A = 0.6, r_B = 1.1/3, r_C = 1.6/3).
  CHECK(dropped.values.at("C") == 0.5);
  CHECK(half.values.at("A") == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(half.values.at("B") == doctest::Approx(1.1 / 3.0).epsilon(1e-12));
  CHECK(half.values.at("C") == doctest::Approx(1.6 / 3.0).epsilon(1e-12));
  auto sys = build_colley_system(matches, {{}, DrawPolicy::HalfWin});
  CHECK(sys.played[0] == 2.0);  // A
}

TEST_CASE("massey two-team neutral example") {
  auto matches = std::vector<MatchRecord>{
      mk("E0", 2010, "2010-08-14", "A", "B", 3, 0)};
  auto r = massey_rate(matches);
  CHECK(r.values.at("A") == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(r.values.at("B") == doctest::Approx(-1.5).epsilon(1e-12));
}

TEST_CASE("massey symmetric home fixture isolates the home bonus") {
  auto matches = std::vector<MatchRecord>{
      mk("E0", 2010, "2010-08-14", "A", "B", 1, 0),
      mk("E0", 2010, "2010-12-14", "B", "A", 1, 0)};
  auto r = massey_rate(matches, {{}, true});
  REQUIRE(r.home_advantage.has_value());
  CHECK(std::fabs(r.values.at("A")) < 1e-10);
  CHECK(std::fabs(r.values.at("B")) < 1e-10);
  CHECK(*r.home_advantage == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("massey all-drawn season rates everyone level") {
  auto matches = std::vector<MatchRecord>{
      mk("E0", 2010, "2010-08-14", "A", "B", 0, 0),
      mk("E0", 2010, "2010-08-21", "B", "C", 0, 0),
      mk("E0", 2010, "2010-08-28", "C", "A", 0, 0)};
  auto r = massey_rate(matches);
  for (const auto& [team, rating] : r.values)
    CHECK(std::fabs(rating) < 1e-12);
}

TEST_CASE("massey invariants on random instances") {
  Rng rng(77);
  for (int rep = 0; rep < 60; ++rep) {
    auto matches = random_matches(rng, 5, 20, true);
    // ensure connectivity by chaining every team once
    std::set<std::string> teams;
    for (const auto& m : matches) {
      teams.insert(m.home_team);
      teams.insert(m.away_team);
    }
    std::vector<std::string> list(teams.begin(), teams.end());
    for (std::size_t i = 1; i < list.size(); ++i)
      matches.push_back(
          mk("R", 2000, "2000-12-28", list[i - 1], list[i], 1, 0));
    std::vector<double> weights;
    for (std::size_t k = 0; k < matches.size(); ++k)
      weights.push_back(0.2 + 2.0 * rng.uniform());

    auto sys = build_massey_system(matches, {weights, false});
    // row sums over team columns vanish before the constraint row
    for (std::size_t i = 0; i < sys.teams.size(); ++i) {
      double row_sum = 0.0;
      for (std::size_t j = 0; j < sys.teams.size(); ++j)
        row_sum += sys.normal(i, j);
      CHECK(std::fabs(row_sum) < 1e-9);
    }

    auto r = massey_rate(matches, {weights, false});
    double sum = 0.0;
    for (const auto& [team, rating] : r.values) sum += rating;
    CHECK(std::fabs(sum) < 1e-10);

    // KKT constrained least-squares oracle
    auto oracle = testutil::massey_kkt_oracle(matches, weights);
    for (const auto& [team, rating] : r.values)
      CHECK(std::fabs(rating - oracle.at(team)) < 1e-8);

    // shifting both scores leaves margins and ratings unchanged
    auto shifted = matches;
    for (auto& m : shifted) {
      m.home_goals += 2;
      m.away_goals += 2;
    }
    auto r2 = massey_rate(shifted, {weights, false});
    for (const auto& [team, rating] : r.values)
      CHECK(r2.values.at(team) == doctest::Approx(rating).epsilon(1e-9));

    // constant weights equal the unweighted solve
    std::vector<double> constant(matches.size(), 3.7);
    auto r3 = massey_rate(matches, {constant, false});
    auto r4 = massey_rate(matches, {});
    for (const auto& [team, rating] : r4.values)
      CHECK(std::fabs(r3.values.at(team) - rating) < 1e-10);
  }
}

TEST_CASE("massey rejects a disconnected schedule") {
  auto matches = std::vector<MatchRecord>{
      mk("E0", 2010, "2010-08-14", "A", "B", 1, 0),
      mk("E0", 2010, "2010-08-15", "C", "D", 2, 1)};
  CHECK_THROWS_WITH_AS(massey_rate(matches), doctest::Contains("disconnected"),
                       Error);
}

TEST_CASE("massey home column can make a degenerate schedule singular") {
  // One team always hosts: the home column coincides with its incidence
  // column, so the constraint row cannot restore full rank.
  auto matches = std::vector<MatchRecord>{
      mk("E0", 2010, "2010-08-14", "A", "B", 2, 0),
      mk("E0", 2010, "2010-09-14", "A", "B", 1, 0)};
  CHECK_THROWS_WITH_AS(massey_rate(matches, {{}, true}),
                       doctest::Contains("singular"), Error);
  // without the home column the same schedule is fine
  CHECK(massey_rate(matches).values.at("A") ==
        doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("combine_with_market") {
  RatingVector r_hat;
  r_hat.method = "massey-home";
  r_hat.values = {{"A", 0.4}, {"B", -0.4}};

  SUBCASE("zero market is the identity") {
    auto out = combine_with_market(r_hat, {{"A", 0.0}, {"B", 0.0}});
    CHECK(out.values.at("A") == 0.4);
    CHECK(out.values.at("B") == -0.4);
  }
  SUBCASE("zero ratings pass the market through") {
    RatingVector zero;
    zero.values = {{"A", 0.0}, {"B", 0.0}};
    auto out = combine_with_market(zero, {{"A", 1.0}, {"B", 0.25}});
    CHECK(out.values.at("A") == 1.0);
    CHECK(out.values.at("B") == 0.25);
  }
  SUBCASE("missing team is reported by name") {
    CHECK_THROWS_WITH_AS(combine_with_market(r_hat, {{"A", 1.0}}),
                         doctest::Contains("'B'"), Error);
  }
  SUBCASE("mixing coefficient scales the market term") {
    auto out = combine_with_market(r_hat, {{"A", 1.0}, {"B", 0.5}}, 0.5);
    CHECK(out.values.at("A") == doctest::Approx(0.9));
    CHECK(out.values.at("B") == doctest::Approx(-0.15));
  }
}

namespace {

// League One 2023 predictive ratings as published, keyed by team.
const std::vector<std::pair<const char*, double>> kLeagueOneMassey = {
    {"Barnsley", 0.465751477},        {"Blackpool", 0.468738141},
    {"Bolton Wanderers", 0.371369091}, {"Bristol Rovers", -0.104628922},
    {"Burton Albion", -0.073532264},  {"Cambridge United", -0.245390316},
    {"Carlisle United", -0.287612208}, {"Charlton Athletic", 0.306562569},
    {"Cheltenham Town", -0.186331949}, {"Derby County", 0.862484119},
    {"Exeter City", 0.019166283},     {"Fleetwood Town", 0.04559182},
    {"Leyton Orient", -0.121947198},  {"Lincoln City", 0.142115261},
    {"Northampton Town", -0.165362375}, {"Oxford United", 0.217674326},
    {"Peterborough United", 0.48397419}, {"Port Vale", -0.168985816},
    {"Portsmouth", 0.410939337},      {"Reading", 0.700048207},
    {"Shrewsbury Town", -0.041858943}, {"Stevenage", -0.255176713},
    {"Wigan Athletic", 0.582918513},  {"Wycombe Wanderers", 0.083994503}};

const std::vector<const char*> kExpectedMasseyOrder = {
    "Derby County",    "Reading",           "Wigan Athletic",
    "Peterborough United", "Blackpool",     "Barnsley",
    "Portsmouth",      "Bolton Wanderers",  "Charlton Athletic",
    "Oxford United",   "Lincoln City",      "Wycombe Wanderers",
    "Fleetwood Town",  "Exeter City",       "Shrewsbury Town",
    "Burton Albion",   "Bristol Rovers",    "Leyton Orient",
    "Northampton Town", "Port Vale",        "Cheltenham Town",
    "Cambridge United", "Stevenage",        "Carlisle United"};

const std::vector<std::pair<const char*, double>> kLeagueOneColley = {
    {"Barnsley", 10.81142992},       {"Blackpool", 10.78199041},
    {"Bolton Wanderers", 10.78576544}, {"Bristol Rovers", 10.66566011},
    {"Burton Albion", 10.72761681},  {"Cambridge United", 10.63263385},
    {"Carlisle United", 10.6719491}, {"Charlton Athletic", 10.80338532},
    {"Cheltenham Town", 10.66652252}, {"Derby County", 10.9013147},
    {"Exeter City", 10.70872262},    {"Fleetwood Town", 10.71850666},
    {"Leyton Orient", 10.66637537},  {"Lincoln City", 10.70848642},
    {"Northampton Town", 10.68197785}, {"Oxford United", 10.72990384},
    {"Peterborough United", 10.76550677}, {"Port Vale", 10.65510619},
    {"Portsmouth", 10.78575663},     {"Reading", 10.85541182},
    {"Shrewsbury Town", 10.70904011}, {"Stevenage", 10.64926415},
    {"Wigan Athletic", 10.83900958}, {"Wycombe Wanderers", 10.74005287}};

const std::vector<const char*> kExpectedColleyOrder = {
    "Derby County",   "Reading",          "Wigan Athletic",
    "Barnsley",       "Charlton Athletic", "Bolton Wanderers",
    "Portsmouth",     "Blackpool",        "Peterborough United",
    "Wycombe Wanderers", "Oxford United", "Burton Albion",
    "Fleetwood Town", "Shrewsbury Town",  "Exeter City",
    "Lincoln City",   "Northampton Town", "Carlisle United",
    "Cheltenham Town", "Leyton Orient",   "Bristol Rovers",
    "Port Vale",      "Stevenage",        "Cambridge United"};

}  // namespace

TEST_CASE("rank_teams") {
  SUBCASE("descending by rating") {
    RatingVector r;
    r.values = {{"A", 0.7}, {"B", 0.3}};
    auto ranked = rank_teams(r, {{"A", "E0"}, {"B", "E0"}});
    REQUIRE(ranked.at("E0").size() == 2);
    CHECK(ranked.at("E0")[0].team == "A");
    CHECK(ranked.at("E0")[0].rank == 1);
    CHECK(ranked.at("E0")[1].team == "B");
  }
  SUBCASE("ties break lexicographically") {
    RatingVector r;
    r.values = {{"B", 0.5}, {"A", 0.5}};
    auto ranked = rank_teams(r, {{"A", "E0"}, {"B", "E0"}});
    CHECK(ranked.at("E0")[0].team == "A");
  }
  SUBCASE("published League One ratings reproduce the published orders") {
    for (auto [published, expected] :
         {std::make_pair(&kLeagueOneMassey, &kExpectedMasseyOrder),
          std::make_pair(&kLeagueOneColley, &kExpectedColleyOrder)}) {
      RatingVector r;
      std::map<std::string, std::string> membership;
      for (const auto& [team, rating] : *published) {
        r.values[team] = rating;
        membership[team] = "EL1";
      }
      auto ranked = rank_teams(r, membership);
      REQUIRE(ranked.at("EL1").size() == expected->size());
      for (std::size_t i = 0; i < expected->size(); ++i)
        CHECK(ranked.at("EL1")[i].team == (*expected)[i]);
    }
  }
  SUBCASE("invariant under strictly increasing transforms") {
    Rng rng(3);
    RatingVector r;
    std::map<std::string, std::string> membership;
    for (int i = 0; i < 30; ++i) {
      std::string team = "T" + std::to_string(i);
      r.values[team] = rng.normal();
      membership[team] = "L";
    }
    RatingVector transformed = r;
    for (auto& [team, rating] : transformed.values)
      rating = std::exp(rating) + 3.0;
    auto a = rank_teams(r, membership);
    auto b = rank_teams(transformed, membership);
    for (std::size_t i = 0; i < a.at("L").size(); ++i)
      CHECK(a.at("L")[i].team == b.at("L")[i].team);
  }
}

TEST_CASE("ratings csv serialization") {
  RatingVector r;
  r.method = "colley";
  r.values = {{"A", 0.625}, {"B", 0.375}};
  auto csv = ratings_csv(r, {{"A", "E0"}, {"B", "E0"}});
  CHECK(csv.find("team,rating,rank,league,method") == 0);
  CHECK(csv.find("A,0.625,1,E0,colley") != std::string::npos);
  CHECK(csv.find("B,0.375,2,E0,colley") != std::string::npos);
}
