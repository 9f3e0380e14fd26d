#pragma once

#include <functional>

#include "sensval/rng.hpp"

namespace sensval {

// Standard normal distribution. norm_cdf/norm_ccdf are accurate to better
// than 1e-14 absolute (erfc based); the quantile is a rational minimax
// approximation polished by Newton steps, giving close to full double
// precision.
double norm_pdf(double x);
double norm_cdf(double x);
double norm_ccdf(double x);              // 1 - Phi(x), stable in the upper tail
double norm_quantile(double p);          // Phi^{-1}(p), 0 < p < 1
double norm_upper_quantile(double alpha);  // Phibar^{-1}(alpha) = Phi^{-1}(1-alpha)

// Student t with dof > 0 degrees of freedom.
double t_density(double x, double dof);
double t_cdf(double x, double dof);
double t_quantile(double p, double dof);  // closed form for dof 1 and 2

// Log Beta function and the regularized incomplete beta I_x(a,b).
double lbeta(double a, double b);
double betainc_reg(double a, double b, double x);

// Root of a continuous function with a sign change on [lo, hi] (Brent).
// Throws std::invalid_argument when the bracket carries no sign change.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol = 1e-12);

// Adaptive Gauss-Kronrod integral of f over the open interval (0,1).
// A smoothstep change of variables clusters nodes at the endpoints so
// integrable endpoint singularities (up to u^{-1/2} type) converge.
double integrate01(const std::function<double(double)>& f, double tol = 1e-10);

// Same integral for integrands that are singular at u = 1: the second
// argument receives 1-u computed without cancellation, so factors like
// (1-u)^(b-1) stay exact arbitrarily close to the endpoint.
double integrate01(const std::function<double(double, double)>& f,
                   double tol = 1e-10);

// Adaptive Gauss-Kronrod integral over a finite interval; no endpoint
// transform, for integrands smooth up to the boundary.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-10);

// Sampling through the inverse CDF; monotone in the underlying uniform,
// which keeps common-random-number schemes coupled.
inline double draw_normal(Rng& rng) { return norm_quantile(rng.next_double()); }
double draw_t(Rng& rng, double dof);

}  // namespace sensval
