#include "footrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "footrank/error.hpp"
#include "footrank/mathx.hpp"

namespace footrank {

double brier_score(const OutcomeForecast& forecast, Outcome outcome) {
  double w = outcome == Outcome::HomeWin ? 1.0 : 0.0;
  double d = outcome == Outcome::Draw ? 1.0 : 0.0;
  double l = outcome == Outcome::AwayWin ? 1.0 : 0.0;
  double dw = forecast.win - w;
  double dd = forecast.draw - d;
  double dl = forecast.loss - l;
  return (dw * dw + dd * dd + dl * dl) / 3.0;
}

double mean_brier(std::span<const BrierRecord> records) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.substituted) continue;
    sum += r.score;
    ++n;
  }
  if (n == 0) throw Error("mean_brier: no scored records");
  return sum / static_cast<double>(n);
}

namespace {

// Inversions by merge sort; sequence is consumed.
std::size_t count_inversions(std::vector<std::size_t>& seq,
                             std::vector<std::size_t>& scratch,
                             std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::size_t inv = count_inversions(seq, scratch, lo, mid) +
                    count_inversions(seq, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (seq[i] <= seq[j]) {
      scratch[k++] = seq[i++];
    } else {
      inv += mid - i;
      scratch[k++] = seq[j++];
    }
  }
  while (i < mid) scratch[k++] = seq[i++];
  while (j < hi) scratch[k++] = seq[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            seq.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace

double kendall_tau(const std::vector<std::string>& predicted,
                   const std::vector<std::string>& actual) {
  const std::size_t n = predicted.size();
  if (n != actual.size())
    throw Error("kendall_tau: rankings have different sizes");
  if (n < 2) throw Error("kendall_tau: need at least 2 teams");

  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < n; ++i)
    if (!position.emplace(predicted[i], i).second)
      throw Error("kendall_tau: duplicate team '" + predicted[i] +
                  "' in predicted ranking");

  // Predicted positions in actual order; inversions = discordant pairs.
  std::vector<std::size_t> seq;
  seq.reserve(n);
  for (const auto& team : actual) {
    auto it = position.find(team);
    if (it == position.end())
      throw Error("kendall_tau: team '" + team +
                  "' missing from predicted ranking");
    seq.push_back(it->second);
  }

  std::vector<std::size_t> scratch(n);
  std::size_t discordant = count_inversions(seq, scratch, 0, n);
  double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return 1.0 - 2.0 * static_cast<double>(discordant) / pairs;
}

PairedTestResult paired_t_test(std::span<const GameScore> a,
                               std::span<const GameScore> b) {
  if (a.size() != b.size())
    throw Error("paired_t_test: lists differ in length");
  if (a.size() < 2) throw Error("paired_t_test: need at least 2 games");

  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].match_id != b[i].match_id)
      throw Error("paired_t_test: match sets are misaligned at '" +
                  a[i].match_id + "' vs '" + b[i].match_id + "'");
    diffs.push_back(a[i].score - b[i].score);
  }

  PairedTestResult res;
  res.n = diffs.size();
  res.df = res.n - 1;
  res.mean_diff = mean(diffs);
  double var = sample_variance(diffs);
  if (var <= 0.0) {
    res.degenerate = true;
    res.t = 0.0;
    res.p = 1.0;
    return res;
  }
  res.se = std::sqrt(var / static_cast<double>(res.n));
  res.t = res.mean_diff / res.se;
  res.p = student_t_two_sided_p(res.t, static_cast<double>(res.df));
  return res;
}

}  // namespace footrank
