#include "footrank/linalg.hpp"

#include <cmath>

#include "footrank/error.hpp"

namespace footrank {

std::vector<double> lu_solve(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n)
    throw Error("lu_solve: shape mismatch");

  // Scale threshold by the largest entry so "singular" is size-relative.
  double max_entry = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      max_entry = std::max(max_entry, std::fabs(a(i, j)));
  const double tol = 1e-12 * std::max(1.0, max_entry);

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::fabs(a(i, col)) > std::fabs(a(pivot, col))) pivot = i;
    if (std::fabs(a(pivot, col)) <= tol)
      throw Error("singular linear system");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t i = col + 1; i < n; ++i) {
      double f = a(i, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
      b[i] -= f * b[col];
    }
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
    x[ii] = s / a(ii, ii);
  }
  return x;
}

double residual_inf_norm(const Matrix& a, const std::vector<double>& x,
                         const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = -b[i];
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    worst = std::max(worst, std::fabs(s));
  }
  return worst;
}

}  // namespace footrank
