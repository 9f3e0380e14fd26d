#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sensval/rng.hpp"
#include "sensval/scores.hpp"

namespace sensval {

// Alternative distribution F of the pair differences. Exposes the density,
// CDF, the absolute-value CDF F+(y) = F(y) - F(-y) with its inverse, and
// inverse-CDF sampling. Text syntax: normal:d,s | t:dof,d | empirical:<path>.
class AltModel {
 public:
  enum class Family { normal_shift, t_shift, empirical };

  static AltModel normal_shift(double d, double s);
  static AltModel t_shift(double dof, double d);
  // Empirical CDF with a Gaussian kernel smoothing (Silverman bandwidth);
  // density and g(u) derived from it are approximate.
  static AltModel empirical(std::vector<double> samples);
  static AltModel parse(const std::string& text);

  Family family() const { return family_; }
  double shift() const { return d_; }
  double scale() const { return s_; }
  std::string to_string() const;

  double density(double y) const;
  double cdf(double y) const;
  double ccdf(double y) const;
  double abs_cdf(double y) const;   // F+(y) for y >= 0
  double abs_ccdf(double y) const;  // 1 - F+(y), stable in the tail
  // (F+)^{-1}(u) by bisection on a geometrically grown bracket.
  double abs_quantile(double u) const;
  // (F+)^{-1}(1 - q): the same inverse addressed from the upper tail, for
  // callers that hold the complement at full precision.
  double abs_quantile_tail(double q) const;
  double sample(Rng& rng) const;

 private:
  AltModel() = default;

  Family family_ = Family::normal_shift;
  double d_ = 0.0;    // location shift
  double s_ = 1.0;    // normal scale
  double dof_ = 2.0;  // t degrees of freedom
  std::vector<double> xs_;  // sorted empirical samples
  double h_ = 0.0;          // kde bandwidth
};

// g(u): probability that a difference at absolute-value quantile u is
// positive; the design-sensitivity integrand. The two-argument form takes
// 1-u precomputed for evaluation arbitrarily close to u = 1.
double g_function(const AltModel& alt, double u);
double g_function(const AltModel& alt, double u, double one_minus_u);

// mu_F[psi] = <psi, g> / ||psi||_1, the large-sample limit of the statistic.
double mu_f(const ScoreSpec& spec, const AltModel& alt);

enum class SigmaProvenance { closed_form, simulated };

// Limiting law of the statistic under F: sqrt(I)(T - mu_F) -> N(0, sigma_F^2).
struct AsymptoticLaw {
  double mu_F = 0.5;
  double sigma_F_sq = 0.0;
  double sigma_q_sq = 4.0 / 3.0;
  SigmaProvenance provenance = SigmaProvenance::closed_form;
  long sim_B = 0;
  long sim_I = 0;
  std::uint64_t sim_seed = 0;

  double design_sensitivity() const { return mu_F / (1.0 - mu_F); }
};

// Null law for a score family: mu_F = 1/2, sigma_F^2 = sigma_q^2 / 4.
AsymptoticLaw null_law(const ScoreSpec& spec);

// Variance form for the Wilcoxon law. The standard U-statistic form is
// 4[P(Y1+Y2>0, Y1+Y3>0) - P(Y1+Y2>0)^2]; `as_printed` is the alternative
// grouping 4[P(Y1+Y2>0) - P(Y1+Y2>0, Y1+Y3>0)^2], kept only for audit.
enum class WilcoxonVarianceForm { standard, as_printed };

// Wilcoxon limiting law: mu_F = P(Y1+Y2 > 0). Closed-form quadrature for the
// normal-shift model, Monte-Carlo triples otherwise.
AsymptoticLaw wilcoxon_law(const AltModel& alt, long mc_B = 1000000,
                           Rng rng = Rng(0, 0),
                           WilcoxonVarianceForm form = WilcoxonVarianceForm::standard);

// sigma_F^2 estimated as the sample variance of sqrt(I_sim) T over B
// replicate datasets drawn from alt.
double sigma_f_simulated(const ScoreSpec& spec, const AltModel& alt, long I_sim,
                         long B, Rng rng, int threads = 0);

// Draw B statistics T, one per replicate dataset of size I. Serial reference
// and OpenMP versions are bit-identical (per-replicate substreams).
std::vector<double> simulate_statistics_serial(const ScoreSpec& spec,
                                               const AltModel& alt, long I,
                                               long B, const Rng& rng);
std::vector<double> simulate_statistics_omp(const ScoreSpec& spec,
                                            const AltModel& alt, long I, long B,
                                            const Rng& rng, int threads);

struct LawPoint {
  double center = 0.0;
  double sd = 0.0;
};

// First-order law of the transformed sensitivity value:
// mean mu_F - sigma_q Phibar^{-1}(alpha) sqrt(mu_F(1-mu_F)) / sqrt(I).
LawPoint kappa_law_asymptotic(const AsymptoticLaw& law, double alpha, double I);

// Finite-sample refinement with eta = sigma_q^2 Phibar^{-1}(alpha)^2 / I.
LawPoint kappa_law_finite(const AsymptoticLaw& law, double alpha, double I);

enum class PowerApprox { asymptotic, finite_sample, no_constant };

// Probability that the sensitivity value exceeds Gamma at level alpha.
double power(const AsymptoticLaw& law, double alpha, double I, double gamma,
             PowerApprox approx = PowerApprox::asymptotic);

}  // namespace sensval
