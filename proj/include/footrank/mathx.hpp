#pragma once

#include <span>

namespace footrank {

double norm_pdf(double x);
double norm_cdf(double x);

/// Inverse standard normal CDF, accurate to ~1e-14 (rational approximation
/// plus one Halley refinement).
double norm_ppf(double p);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation
/// (modified Lentz), absolute tolerance 1e-12.
double regularized_incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);
double student_t_two_sided_p(double t, double df);

/// Upper quantile by bisection on the CDF (p in (0,1)).
double student_t_ppf(double p, double df);

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);
double skewness(std::span<const double> xs);

}  // namespace footrank
