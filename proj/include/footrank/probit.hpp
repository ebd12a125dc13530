#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "footrank/dataset.hpp"
#include "footrank/linalg.hpp"
#include "footrank/ratings.hpp"

namespace footrank {

/// Ordered outcome for the reference team of a design row.
enum class Ordinal : std::uint8_t { Loss = 0, Draw = 1, Win = 2 };

struct ProbitDesignRow {
  std::vector<double> x;
  Ordinal y = Ordinal::Draw;
};

/// Fitted ordered-probit model: latent y* = x.beta + eps, eps ~ N(0,1),
/// with P(Loss) = Phi(c1 - x.beta), P(Draw) = Phi(c2 - x.beta) - P(Loss),
/// P(Win) the rest.
struct ProbitModel {
  std::vector<double> beta;
  double cut_lo = 0.0;
  double cut_hi = 0.0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> ll_trace;  // one entry per iteration, non-decreasing

  std::string to_text() const;
  static ProbitModel from_text(const std::string& text);
};

/// Audit files: coefficients, cuts, and fit diagnostics as key-value text.
void save_probit_model(const ProbitModel& model,
                       const std::filesystem::path& path);
ProbitModel load_probit_model(const std::filesystem::path& path);

struct OutcomeForecast {
  double win = 0.0;
  double draw = 0.0;
  double loss = 0.0;
};

/// Row-major design matrix, packed once so the likelihood kernel streams
/// over flat arrays.
struct PackedDesign {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> x;         // n * dim
  std::vector<std::uint8_t> y;   // Ordinal values

  static PackedDesign from_rows(std::span<const ProbitDesignRow> rows);
};

/// Log-likelihood with analytic gradient and Hessian in the parameter order
/// (beta..., cut_lo, cut_hi).
struct LoglikParts {
  double loglik = 0.0;
  std::vector<double> gradient;
  Matrix hessian;
};

/// Production kernel: fixed-size chunk accumulation combined in chunk order,
/// so results are bit-identical for any thread count (including one).
LoglikParts ordered_probit_loglik(const PackedDesign& design,
                                  std::span<const double> beta, double cut_lo,
                                  double cut_hi, bool parallel = true);

/// Plain single-loop reference implementation, kept for verifying the
/// chunked kernel.
LoglikParts ordered_probit_loglik_serial(const PackedDesign& design,
                                         std::span<const double> beta,
                                         double cut_lo, double cut_hi);

struct ProbitFitOptions {
  int max_iterations = 200;
  double loglik_tol = 1e-10;
  double step_tol = 1e-8;
  bool parallel = true;
};

/// Newton-Raphson with step halving on (beta, c1, log(c2 - c1)); the cut
/// ordering c1 < c2 holds by construction. Requires >= 30 rows with all
/// three outcome categories present; throws on non-convergence.
ProbitModel fit_ordered_probit(std::span<const ProbitDesignRow> rows,
                               const ProbitFitOptions& options = {});

OutcomeForecast predict_outcome(const ProbitModel& model,
                                std::span<const double> x);

// ---------------------------------------------------------------------------
// Design-row builders. Null and Transfermarkt rows randomize which side is
// the reference team (a seeded fair coin per match) so the home indicator
// varies; the rating-differential rows fix the home team as reference since
// their covariate already carries venue context.
// ---------------------------------------------------------------------------

std::vector<ProbitDesignRow> build_null_rows(
    std::span<const MatchRecord> matches, std::uint64_t seed);

struct TmRows {
  std::vector<ProbitDesignRow> rows;
  std::size_t skipped = 0;  // matches without both lineup values
};

TmRows build_tm_rows(std::span<const MatchRecord> matches, std::uint64_t seed);

std::vector<ProbitDesignRow> build_rating_rows(
    std::span<const MatchRecord> matches, const RatingVector& ratings);

}  // namespace footrank
