#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sensval/rng.hpp"
#include "sensval/scores.hpp"

namespace sensval {

enum class TailDir { greater, less, two_sided };

TailDir parse_tail(const std::string& text);
std::string to_string(TailDir t);

// How p-value bounds are evaluated: the bounding-variable CLT, Monte-Carlo
// draws of the bounding variable, or exact enumeration over sign assignments.
struct MethodSpec {
  enum class Kind { normal_approx, monte_carlo, exact_enum };

  Kind kind = Kind::normal_approx;
  long B = 100000;           // monte_carlo draws
  std::uint64_t seed = 0;    // monte_carlo seed
  std::uint64_t stream = 0;  // substream key (e.g. outcome index)

  static MethodSpec normal_approx();
  static MethodSpec monte_carlo(long B, std::uint64_t seed);
  static MethodSpec exact_enum();
  static MethodSpec parse(const std::string& text);  // approx | mc:B | exact
  std::string to_string() const;
};

// Sharp bounds [p_lower, p_upper] on the one-sided p-value at bias level
// gamma. p_lower at gamma equals p_upper at 1/gamma.
struct GammaBound {
  double gamma = 1.0;
  double p_upper = 1.0;
  double p_lower = 1.0;
  MethodSpec method;
};

// Sensitivity value on the kappa = Gamma/(1+Gamma) scale, with the raw and
// truncated Gamma transforms. `degenerate` marks statistics below the null
// support where the crossing Gamma does not exist (reported as 0).
struct SensResult {
  double statistic = 0.0;
  double kappa_star = 0.0;
  double gamma_star = 0.0;
  double gamma_star_trunc = 1.0;
  double alpha = 0.05;
  TailDir tail = TailDir::greater;
  MethodSpec method;
  long effective_I = 0;
  bool degenerate = false;
};

// Signed score statistic T = sum_i q_i 1{y_i > 0} / sum_i q_i, in [0,1].
double statistic(const ScoreVector& sv, const PairDiffs& d);

// p-value bounds by the CLT for the bounding variable.
GammaBound pvalue_bounds_normal(const ScoreVector& sv, double t, double gamma);

// Monte-Carlo bounds with the add-one estimator (1 + count)/(B + 1);
// replicate b draws its Bernoulli indicators from rng.substream(b).
GammaBound pvalue_bounds_mc(const ScoreVector& sv, double t, double gamma,
                            long B, Rng rng, int threads = 0);

// Exact bounds by enumerating all sign assignments (effective I <= 22).
GammaBound pvalue_bounds_exact(const ScoreVector& sv, double t, double gamma);

// Evaluate bounds with whichever method the spec selects.
GammaBound pvalue_bounds(const ScoreVector& sv, double t, double gamma,
                         const MethodSpec& method, int threads = 0);

// Transformed sensitivity value by the closed-form quadratic in kappa.
SensResult kappa_star_closed(const ScoreVector& sv, double t, double alpha);

// Sensitivity value by bisecting a full sensitivity analysis in kappa.
// Monte-Carlo evaluations share one set of uniforms across all Gamma
// (common random numbers) so the bisection target is monotone.
SensResult kappa_star_search(const ScoreVector& sv, double t, double alpha,
                             const MethodSpec& method, double tol = 1e-4,
                             int threads = 0);

// Two-sided sensitivity value: the larger of the two one-sided values, each
// at level alpha/2.
SensResult two_sided(const ScoreVector& sv, const PairDiffs& d, double alpha,
                     const MethodSpec& method = MethodSpec::normal_approx(),
                     int threads = 0);

// One row per requested Gamma; for the two-sided tail the bounds are doubled
// smaller one-sided bounds, capped at 1.
std::vector<GammaBound> sensitivity_table(const ScoreVector& sv,
                                          const PairDiffs& d,
                                          const std::vector<double>& gammas,
                                          const MethodSpec& method,
                                          TailDir tail = TailDir::greater,
                                          int threads = 0);

// Data-parallel kernels behind the Monte-Carlo paths. The serial versions are
// the reference implementations; the OpenMP versions must produce identical
// results for any thread count (verified in the test suite, timed in bench/).
namespace kernels {

// Number of replicates whose bounding statistic reaches t_scaled = t * sum q.
long mc_exceed_count_serial(const std::vector<double>& q, double t_scaled,
                            double kappa, long B, const Rng& rng);
long mc_exceed_count_omp(const std::vector<double>& q, double t_scaled,
                         double kappa, long B, const Rng& rng, int threads);

// Per-replicate crossing thresholds: the smallest kappa at which replicate
// b's bounding statistic reaches t_scaled, for evaluating p-bar at any kappa
// from one shared set of uniforms.
std::vector<double> mc_thresholds_serial(const std::vector<double>& q,
                                         double t_scaled, long B,
                                         const Rng& rng);
std::vector<double> mc_thresholds_omp(const std::vector<double>& q,
                                      double t_scaled, long B, const Rng& rng,
                                      int threads);

}  // namespace kernels

}  // namespace sensval
