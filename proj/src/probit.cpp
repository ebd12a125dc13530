#include "footrank/probit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "footrank/csv.hpp"
#include "footrank/error.hpp"
#include "footrank/mathx.hpp"
#include "footrank/rng.hpp"
#include "footrank/valuation.hpp"

namespace footrank {

PackedDesign PackedDesign::from_rows(std::span<const ProbitDesignRow> rows) {
  PackedDesign out;
  out.n = rows.size();
  out.dim = rows.empty() ? 0 : rows.front().x.size();
  out.x.reserve(out.n * out.dim);
  out.y.reserve(out.n);
  for (const auto& row : rows) {
    if (row.x.size() != out.dim)
      throw Error("design rows have inconsistent covariate lengths");
    for (double v : row.x) {
      if (!std::isfinite(v)) throw Error("non-finite covariate in design row");
      out.x.push_back(v);
    }
    out.y.push_back(static_cast<std::uint8_t>(row.y));
  }
  return out;
}

namespace {

constexpr double kTinyProb = 1e-300;

// Accumulator for (loglik, gradient, lower-triangular Hessian) over a row
// range. Parameter order: beta..., cut_lo, cut_hi.
struct Accum {
  double ll = 0.0;
  std::vector<double> g;
  std::vector<double> h;  // packed lower triangle, p*(p+1)/2

  explicit Accum(std::size_t p) : g(p, 0.0), h(p * (p + 1) / 2, 0.0) {}

  void merge(const Accum& other) {
    ll += other.ll;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += other.g[i];
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += other.h[i];
  }
};

inline std::size_t tri(std::size_t i, std::size_t j) {
  // i >= j
  return i * (i + 1) / 2 + j;
}

// phi(z)/Phi(z) with an asymptotic fallback deep in the lower tail.
double mills_lower(double z) {
  if (z < -37.0) return -z - 1.0 / z;
  return norm_pdf(z) / std::max(norm_cdf(z), kTinyProb);
}

void accumulate_range(const PackedDesign& d, std::span<const double> beta,
                      double c1, double c2, std::size_t begin, std::size_t end,
                      Accum& acc) {
  const std::size_t dim = d.dim;
  for (std::size_t k = begin; k < end; ++k) {
    const double* x = d.x.data() + k * dim;
    double xb = 0.0;
    for (std::size_t j = 0; j < dim; ++j) xb += x[j] * beta[j];
    const double z1 = c1 - xb;
    const double z2 = c2 - xb;

    // Gradient and Hessian of ln P in (z1, z2) space; the parameter-space
    // contribution follows from dz1 = (-x, 1, 0), dz2 = (-x, 0, 1).
    double gz1 = 0.0, gz2 = 0.0, h11 = 0.0, h12 = 0.0, h22 = 0.0;
    switch (static_cast<Ordinal>(d.y[k])) {
      case Ordinal::Loss: {
        double lam = mills_lower(z1);
        acc.ll += std::log(std::max(norm_cdf(z1), kTinyProb));
        gz1 = lam;
        h11 = -z1 * lam - lam * lam;
        break;
      }
      case Ordinal::Win: {
        double mu = mills_lower(-z2);  // phi(z2)/(1 - Phi(z2))
        acc.ll += std::log(std::max(norm_cdf(-z2), kTinyProb));
        gz2 = -mu;
        h22 = -mu * (mu - z2);
        break;
      }
      case Ordinal::Draw: {
        double prob = norm_cdf(z2) - norm_cdf(z1);
        prob = std::max(prob, kTinyProb);
        acc.ll += std::log(prob);
        double q1 = norm_pdf(z1) / prob;
        double q2 = norm_pdf(z2) / prob;
        gz1 = -q1;
        gz2 = q2;
        h11 = z1 * q1 - q1 * q1;
        h22 = -z2 * q2 - q2 * q2;
        h12 = q1 * q2;
        break;
      }
    }

    const double gsum = gz1 + gz2;
    for (std::size_t j = 0; j < dim; ++j) acc.g[j] -= x[j] * gsum;
    acc.g[dim] += gz1;
    acc.g[dim + 1] += gz2;

    const double hxx = h11 + 2.0 * h12 + h22;
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j <= i; ++j)
        acc.h[tri(i, j)] += x[i] * x[j] * hxx;
    for (std::size_t j = 0; j < dim; ++j) {
      acc.h[tri(dim, j)] -= x[j] * (h11 + h12);
      acc.h[tri(dim + 1, j)] -= x[j] * (h12 + h22);
    }
    acc.h[tri(dim, dim)] += h11;
    acc.h[tri(dim + 1, dim)] += h12;
    acc.h[tri(dim + 1, dim + 1)] += h22;
  }
}

LoglikParts to_parts(const Accum& acc, std::size_t dim) {
  const std::size_t p = dim + 2;
  LoglikParts out;
  out.loglik = acc.ll;
  out.gradient = acc.g;
  out.hessian = Matrix(p, p, 0.0);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      out.hessian(i, j) = acc.h[tri(i, j)];
      out.hessian(j, i) = acc.h[tri(i, j)];
    }
  return out;
}

constexpr std::size_t kChunk = 2048;

}  // namespace

LoglikParts ordered_probit_loglik(const PackedDesign& design,
                                  std::span<const double> beta, double cut_lo,
                                  double cut_hi, bool parallel) {
  if (beta.size() != design.dim)
    throw Error("beta length does not match design dimension");
  const std::size_t n_chunks = (design.n + kChunk - 1) / kChunk;
  std::vector<Accum> partials(std::max<std::size_t>(n_chunks, 1),
                              Accum(design.dim + 2));

  // Chunk boundaries do not depend on the thread count, and partials merge
  // in chunk order, so the result is bit-stable under parallelism.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && n_chunks > 1)
#endif
  for (long long c = 0; c < static_cast<long long>(n_chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = std::min(begin + kChunk, design.n);
    accumulate_range(design, beta, cut_lo, cut_hi, begin, end,
                     partials[static_cast<std::size_t>(c)]);
  }
#ifndef _OPENMP
  (void)parallel;
#endif

  Accum total(design.dim + 2);
  for (const auto& part : partials) total.merge(part);
  return to_parts(total, design.dim);
}

LoglikParts ordered_probit_loglik_serial(const PackedDesign& design,
                                         std::span<const double> beta,
                                         double cut_lo, double cut_hi) {
  if (beta.size() != design.dim)
    throw Error("beta length does not match design dimension");
  Accum acc(design.dim + 2);
  accumulate_range(design, beta, cut_lo, cut_hi, 0, design.n, acc);
  return to_parts(acc, design.dim);
}

namespace {

// Chain rule from (beta, c1, c2) to the optimizer space (beta, c1, delta)
// with c2 = c1 + exp(delta).
void reparameterize(const LoglikParts& parts, double delta,
                    std::vector<double>& g, Matrix& h) {
  const std::size_t dim = parts.gradient.size() - 2;
  const std::size_t p = dim + 2;
  const double e = std::exp(delta);
  const std::size_t ic1 = dim, ic2 = dim + 1;

  g.assign(p, 0.0);
  for (std::size_t j = 0; j < dim; ++j) g[j] = parts.gradient[j];
  g[ic1] = parts.gradient[ic1] + parts.gradient[ic2];
  g[ic2] = parts.gradient[ic2] * e;  // slot ic2 now holds d/d(delta)

  h = Matrix(p, p, 0.0);
  const Matrix& H = parts.hessian;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) h(i, j) = H(i, j);
    h(i, ic1) = h(ic1, i) = H(i, ic1) + H(i, ic2);
    h(i, ic2) = h(ic2, i) = H(i, ic2) * e;
  }
  h(ic1, ic1) = H(ic1, ic1) + 2.0 * H(ic1, ic2) + H(ic2, ic2);
  h(ic1, ic2) = h(ic2, ic1) = (H(ic1, ic2) + H(ic2, ic2)) * e;
  h(ic2, ic2) = H(ic2, ic2) * e * e + parts.gradient[ic2] * e;
}

}  // namespace

ProbitModel fit_ordered_probit(std::span<const ProbitDesignRow> rows,
                               const ProbitFitOptions& options) {
  if (rows.size() < 30)
    throw Error("fit_ordered_probit: need at least 30 rows, got " +
                std::to_string(rows.size()));
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& row : rows) counts[static_cast<std::size_t>(row.y)]++;
  for (std::size_t c = 0; c < 3; ++c)
    if (counts[c] == 0)
      throw Error(std::string("fit_ordered_probit: outcome category '") +
                  (c == 0 ? "loss" : c == 1 ? "draw" : "win") +
                  "' is absent from the data");

  PackedDesign design = PackedDesign::from_rows(rows);
  const std::size_t dim = design.dim;
  const std::size_t p = dim + 2;
  const double n = static_cast<double>(design.n);

  // Start from the intercept-only solution: cuts at the normal quantiles of
  // the cumulative category frequencies, beta = 0.
  double f_loss = static_cast<double>(counts[0]) / n;
  double f_draw = static_cast<double>(counts[1]) / n;
  double c1 = norm_ppf(f_loss);
  double c2 = norm_ppf(std::min(f_loss + f_draw, 1.0 - 1e-12));
  if (!(c2 > c1)) c2 = c1 + 1e-3;

  std::vector<double> theta(p, 0.0);  // beta..., c1, delta
  theta[dim] = c1;
  theta[dim + 1] = std::log(c2 - c1);

  ProbitModel model;
  model.beta.assign(dim, 0.0);

  auto eval = [&](const std::vector<double>& th) {
    double lo = th[dim];
    double hi = lo + std::exp(th[dim + 1]);
    return ordered_probit_loglik(design,
                                 std::span<const double>(th.data(), dim), lo,
                                 hi, options.parallel);
  };

  LoglikParts parts = eval(theta);
  model.ll_trace.push_back(parts.loglik);

  double ridge = 0.0;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    model.iterations = iter;
    std::vector<double> grad;
    Matrix hess;
    reparameterize(parts, theta[dim + 1], grad, hess);

    // Ascent direction: solve (-H + ridge I) step = grad.
    std::vector<double> step;
    for (;;) {
      Matrix a(p, p, 0.0);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
          a(i, j) = -hess(i, j) + (i == j ? ridge : 0.0);
      try {
        step = lu_solve(a, grad);
        break;
      } catch (const Error&) {
        ridge = ridge == 0.0 ? 1e-8 : ridge * 100.0;
        if (ridge > 1e12)
          throw Error("fit_ordered_probit: Hessian is singular");
      }
    }

    // Step halving keeps the log-likelihood non-decreasing.
    double alpha = 1.0;
    std::vector<double> candidate(p);
    LoglikParts next;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving) {
      for (std::size_t i = 0; i < p; ++i)
        candidate[i] = theta[i] + alpha * step[i];
      next = eval(candidate);
      if (next.loglik >= parts.loglik) {
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) {
      // No uphill move left at this scale; treat as converged if the
      // gradient is already negligible, otherwise raise the ridge and retry.
      double gnorm = 0.0;
      for (double gi : grad) gnorm = std::max(gnorm, std::fabs(gi));
      if (gnorm < 1e-6) {
        model.converged = true;
        break;
      }
      ridge = ridge == 0.0 ? 1e-6 : ridge * 100.0;
      if (ridge > 1e12)
        throw Error(
            "fit_ordered_probit: step halving failed to improve the "
            "log-likelihood (gradient norm " +
            format_double(gnorm) + ")");
      continue;
    }

    double step_inf = 0.0;
    for (std::size_t i = 0; i < p; ++i)
      step_inf = std::max(step_inf, std::fabs(alpha * step[i]));
    double gain = next.loglik - parts.loglik;
    theta = candidate;
    parts = next;
    model.ll_trace.push_back(parts.loglik);
    ridge = 0.0;

    if (gain < options.loglik_tol || step_inf < options.step_tol) {
      model.converged = true;
      break;
    }
  }

  if (!model.converged)
    throw Error("fit_ordered_probit: no convergence after " +
                std::to_string(model.iterations) +
                " iterations (last loglik " + format_double(parts.loglik) +
                ")");

  for (std::size_t j = 0; j < dim; ++j) model.beta[j] = theta[j];
  model.cut_lo = theta[dim];
  model.cut_hi = theta[dim] + std::exp(theta[dim + 1]);
  model.loglik = parts.loglik;
  return model;
}

OutcomeForecast predict_outcome(const ProbitModel& model,
                                std::span<const double> x) {
  if (x.size() != model.beta.size())
    throw Error("predict_outcome: covariate length " +
                std::to_string(x.size()) + " does not match model dimension " +
                std::to_string(model.beta.size()));
  double xb = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) xb += x[j] * model.beta[j];
  double p_loss = norm_cdf(model.cut_lo - xb);
  double p_draw = norm_cdf(model.cut_hi - xb) - p_loss;
  double p_win = 1.0 - p_loss - p_draw;
  // A saturating latent score can push a tail to exactly 0 at double
  // precision; keep the triple strictly inside (0,1).
  constexpr double kFloor = 1e-12;
  p_loss = std::max(p_loss, kFloor);
  p_draw = std::max(p_draw, kFloor);
  p_win = std::max(p_win, kFloor);
  double total = p_loss + p_draw + p_win;
  return {p_win / total, p_draw / total, p_loss / total};
}

std::string ProbitModel::to_text() const {
  std::ostringstream out;
  out << "ordered_probit v1\n";
  out << "dim: " << beta.size() << '\n';
  for (std::size_t j = 0; j < beta.size(); ++j)
    out << "beta" << j << ": " << format_double(beta[j]) << '\n';
  out << "cut_lo: " << format_double(cut_lo) << '\n';
  out << "cut_hi: " << format_double(cut_hi) << '\n';
  out << "loglik: " << format_double(loglik) << '\n';
  out << "iterations: " << iterations << '\n';
  out << "converged: " << (converged ? "yes" : "no") << '\n';
  return out.str();
}

ProbitModel ProbitModel::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "ordered_probit v1")
    throw Error("not an ordered_probit model file");
  ProbitModel model;
  std::size_t dim = 0;
  auto value_of = [&](const std::string& l) {
    auto pos = l.find(": ");
    if (pos == std::string::npos) throw Error("bad model line: " + l);
    return l.substr(pos + 2);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("dim:", 0) == 0) {
      dim = static_cast<std::size_t>(parse_int(value_of(line)));
      model.beta.assign(dim, 0.0);
    } else if (line.rfind("beta", 0) == 0) {
      auto colon = line.find(':');
      std::size_t j =
          static_cast<std::size_t>(parse_int(line.substr(4, colon - 4)));
      if (j >= model.beta.size()) throw Error("beta index out of range");
      model.beta[j] = parse_double(value_of(line));
    } else if (line.rfind("cut_lo:", 0) == 0) {
      model.cut_lo = parse_double(value_of(line));
    } else if (line.rfind("cut_hi:", 0) == 0) {
      model.cut_hi = parse_double(value_of(line));
    } else if (line.rfind("loglik:", 0) == 0) {
      model.loglik = parse_double(value_of(line));
    } else if (line.rfind("iterations:", 0) == 0) {
      model.iterations = parse_int(value_of(line));
    } else if (line.rfind("converged:", 0) == 0) {
      model.converged = value_of(line) == "yes";
    }
  }
  if (!(model.cut_lo < model.cut_hi))
    throw Error("model file violates cut ordering");
  return model;
}

void save_probit_model(const ProbitModel& model,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path.string() + "'");
  out << model.to_text();
}

ProbitModel load_probit_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ProbitModel::from_text(buf.str());
}

std::vector<ProbitDesignRow> build_null_rows(
    std::span<const MatchRecord> matches, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ProbitDesignRow> rows;
  rows.reserve(matches.size());
  for (const auto& m : matches) {
    bool reference_is_home = rng.coin();
    ProbitDesignRow row;
    row.x = {reference_is_home ? 1.0 : -1.0};
    Outcome res = m.outcome();
    if (res == Outcome::Draw)
      row.y = Ordinal::Draw;
    else if ((res == Outcome::HomeWin) == reference_is_home)
      row.y = Ordinal::Win;
    else
      row.y = Ordinal::Loss;
    rows.push_back(std::move(row));
  }
  return rows;
}

TmRows build_tm_rows(std::span<const MatchRecord> matches,
                     std::uint64_t seed) {
  Rng rng(seed);
  TmRows out;
  for (const auto& m : matches) {
    bool reference_is_home = rng.coin();  // drawn per match, skipped or not,
                                          // so orientations match
                                          // build_null_rows on the same list
    if (!m.home_lineup_value || !m.away_lineup_value) {
      out.skipped++;
      continue;
    }
    double tm_home = log_lineup_value(*m.home_lineup_value);
    double tm_away = log_lineup_value(*m.away_lineup_value);
    ProbitDesignRow row;
    double sign = reference_is_home ? 1.0 : -1.0;
    row.x = {sign, sign * (tm_home - tm_away)};
    Outcome res = m.outcome();
    if (res == Outcome::Draw)
      row.y = Ordinal::Draw;
    else if ((res == Outcome::HomeWin) == reference_is_home)
      row.y = Ordinal::Win;
    else
      row.y = Ordinal::Loss;
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<ProbitDesignRow> build_rating_rows(
    std::span<const MatchRecord> matches, const RatingVector& ratings) {
  std::vector<ProbitDesignRow> rows;
  rows.reserve(matches.size());
  for (const auto& m : matches) {
    auto rh = ratings.find(m.home_team);
    auto ra = ratings.find(m.away_team);
    if (!rh) throw Error("build_rating_rows: unrated team '" + m.home_team + "'");
    if (!ra) throw Error("build_rating_rows: unrated team '" + m.away_team + "'");
    ProbitDesignRow row;
    row.x = {*rh - *ra};
    Outcome res = m.outcome();
    row.y = res == Outcome::Draw    ? Ordinal::Draw
            : res == Outcome::HomeWin ? Ordinal::Win
                                      : Ordinal::Loss;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace footrank
