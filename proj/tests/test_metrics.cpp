#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "footrank/error.hpp"
#include "footrank/metrics.hpp"
#include "footrank/rng.hpp"
#include "helpers.hpp"

using namespace footrank;

TEST_CASE("brier score") {
  SUBCASE("perfect prescience scores zero") {
    CHECK(brier_score({1.0, 0.0, 0.0}, Outcome::HomeWin) == 0.0);
    CHECK(brier_score({0.0, 1.0, 0.0}, Outcome::Draw) == 0.0);
  }
  SUBCASE("uniform forecast scores 2/9 for every outcome") {
    OutcomeForecast uniform{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    for (Outcome o : {Outcome::HomeWin, Outcome::Draw, Outcome::AwayWin})
      CHECK(std::fabs(brier_score(uniform, o) - 2.0 / 9.0) < 1e-15);
  }
  SUBCASE("hand-computed example") {
    CHECK(brier_score({0.5, 0.3, 0.2}, Outcome::Draw) ==
          doctest::Approx(0.26).epsilon(1e-12));
  }
  SUBCASE("bounds and permutation invariance") {
    Rng rng(6);
    for (int i = 0; i < 300; ++i) {
      double a = rng.uniform(), b = rng.uniform() * (1.0 - a);
      OutcomeForecast f{a, b, 1.0 - a - b};
      for (Outcome o : {Outcome::HomeWin, Outcome::Draw, Outcome::AwayWin}) {
        double s = brier_score(f, o);
        CHECK(s >= 0.0);
        CHECK(s <= 2.0 / 3.0 + 1e-12);
      }
      // swapping win and loss components together with the outcome
      OutcomeForecast swapped{f.loss, f.draw, f.win};
      CHECK(brier_score(f, Outcome::HomeWin) ==
            doctest::Approx(brier_score(swapped, Outcome::AwayWin))
                .epsilon(1e-15));
    }
  }
}

TEST_CASE("mean brier") {
  std::vector<BrierRecord> records;
  CHECK_THROWS_AS(mean_brier(records), Error);

  records.push_back({"m1", "x", {}, Outcome::Draw, 0.0, false});
  records.push_back({"m2", "x", {}, Outcome::Draw, 2.0 / 3.0, false});
  CHECK(mean_brier(records) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  // substituted rows do not count toward the model's own mean
  records.push_back({"m3", "x", {}, Outcome::Draw, 0.6, true});
  CHECK(mean_brier(records) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("kendall tau") {
  std::vector<std::string> teams;
  for (int i = 0; i < 5; ++i) teams.push_back("T" + std::to_string(i));

  SUBCASE("identity and reversal") {
    CHECK(kendall_tau(teams, teams) == 1.0);
    auto reversed = teams;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(kendall_tau(teams, reversed) == -1.0);
  }
  SUBCASE("single swap on three items") {
    CHECK(kendall_tau({"1", "2", "3"}, {"2", "1", "3"}) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("team set mismatch") {
    CHECK_THROWS_AS(kendall_tau({"A", "B"}, {"A", "C"}), Error);
    CHECK_THROWS_AS(kendall_tau({"A", "B"}, {"A"}), Error);
    CHECK_THROWS_AS(kendall_tau({"A", "A"}, {"A", "A"}), Error);
  }
  SUBCASE("merge-sort path matches the quadratic oracle") {
    Rng rng(2718);
    for (int rep = 0; rep < 30; ++rep) {
      int n = rng.uniform_int(2, 200);
      std::vector<std::string> predicted, actual;
      for (int i = 0; i < n; ++i) predicted.push_back("T" + std::to_string(i));
      actual = predicted;
      // random shuffle via the deterministic rng
      for (int i = n - 1; i > 0; --i)
        std::swap(actual[static_cast<std::size_t>(i)],
                  actual[static_cast<std::size_t>(rng.uniform_int(0, i))]);
      double fast = kendall_tau(predicted, actual);
      double slow = testutil::kendall_oracle(predicted, actual);
      CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
      // symmetry
      CHECK(kendall_tau(actual, predicted) ==
            doctest::Approx(fast).epsilon(1e-12));
    }
  }
}

TEST_CASE("paired t test") {
  auto as_scores = [](std::vector<double> xs) {
    std::vector<GameScore> out;
    for (std::size_t i = 0; i < xs.size(); ++i)
      out.push_back({"m" + std::to_string(i), xs[i]});
    return out;
  };

  SUBCASE("identical vectors are degenerate with p = 1") {
    auto a = as_scores({0.2, 0.3, 0.4});
    auto result = paired_t_test(a, a);
    CHECK(result.degenerate);
    CHECK(result.p == 1.0);
    CHECK(result.mean_diff == 0.0);
  }
  SUBCASE("hand example: diffs 1,2,3") {
    auto a = as_scores({1.0, 2.0, 3.0});
    auto b = as_scores({0.0, 0.0, 0.0});
    auto result = paired_t_test(a, b);
    CHECK(result.mean_diff == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(result.df == 2);
    CHECK(result.t == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
    CHECK(std::fabs(result.t - 3.4641) < 1e-3);
    // two-sided p against the quadrature oracle
    double oracle_p = 2.0 * (1.0 - testutil::simpson_t_cdf(result.t, 2.0));
    CHECK(std::fabs(result.p - oracle_p) < 1e-9);
    CHECK(std::fabs(result.p - 0.0742) < 5e-4);
  }
  SUBCASE("antisymmetry") {
    Rng rng(12);
    std::vector<double> xs, ys;
    for (int i = 0; i < 40; ++i) {
      xs.push_back(rng.uniform());
      ys.push_back(rng.uniform());
    }
    auto r1 = paired_t_test(as_scores(xs), as_scores(ys));
    auto r2 = paired_t_test(as_scores(ys), as_scores(xs));
    CHECK(r1.t == doctest::Approx(-r2.t).epsilon(1e-12));
    CHECK(r1.p == doctest::Approx(r2.p).epsilon(1e-12));
  }
  SUBCASE("misaligned match ids") {
    auto a = as_scores({1.0, 2.0});
    auto b = a;
    b[1].match_id = "other";
    CHECK_THROWS_WITH_AS(paired_t_test(a, b), doctest::Contains("misaligned"),
                         Error);
  }
}

TEST_CASE("empirical-frequency forecaster beats the uniform forecaster") {
  Rng rng(31337);
  for (int rep = 0; rep < 20; ++rep) {
    // random outcome distribution, skewed away from uniform
    double pw = 0.2 + 0.6 * rng.uniform();
    double pd = (1.0 - pw) * rng.uniform();
    std::vector<Outcome> outcomes;
    std::size_t counts[3] = {0, 0, 0};
    for (int i = 0; i < 500; ++i) {
      double u = rng.uniform();
      Outcome o = u < pw            ? Outcome::HomeWin
                  : u < pw + pd     ? Outcome::Draw
                                    : Outcome::AwayWin;
      outcomes.push_back(o);
      counts[o == Outcome::HomeWin ? 0 : o == Outcome::Draw ? 1 : 2]++;
    }
    double n = 500.0;
    OutcomeForecast empirical{counts[0] / n, counts[1] / n, counts[2] / n};
    OutcomeForecast uniform{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double sum_emp = 0.0, sum_uni = 0.0;
    for (Outcome o : outcomes) {
      sum_emp += brier_score(empirical, o);
      sum_uni += brier_score(uniform, o);
    }
    CHECK(sum_emp <= sum_uni + 1e-12);
  }
}
