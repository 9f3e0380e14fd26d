#pragma once

#include <vector>

#include "sensval/asymptotics.hpp"
#include "sensval/scores.hpp"

namespace sensval {

// Two-subgroup effect-modification setting: subgroup 1 (proportion pi1) has
// the larger limit mu_F1; the pooled statistic has mu_F = pi1 mu_F1 +
// (1-pi1) mu_F2.
struct SubgroupSpec {
  double mu_F1 = 0.0;
  double mu_F2 = 0.0;
  double pi1 = 0.5;
  double alpha = 0.05;
  double sigma_q_sq = 4.0 / 3.0;

  double pooled_mu() const { return pi1 * mu_F1 + (1.0 - pi1) * mu_F2; }
  void validate() const;
};

struct CriticalSize {
  double I_star = 0.0;
  double eta_star = 0.0;
};

// Critical sample size I*: above it, analyzing subgroup 1 alone gives the
// larger expected transformed sensitivity value; below it, pooling wins.
// Solved for eta* = sigma_q^2 Phibar^{-1}(alpha)^2 / I*.
CriticalSize critical_sample_size(const SubgroupSpec& sub);

enum class SummaryKind { mean, median, quantile };

struct Summary {
  SummaryKind kind = SummaryKind::mean;
  double p = 0.5;  // quantile level when kind == quantile
};

struct ScoreChoice {
  ScoreSpec spec;
  double mu_F = 0.0;
  double sigma_q_sq = 0.0;
  double center = 0.0;   // predicted center of kappa* at the given I
  double sd = 0.0;       // predicted sd (0 at I = infinity)
  double summary = 0.0;  // the ranking summary value
  int rank = 0;
};

// Rank candidate score statistics by the predicted kappa* distribution at
// sample size I (pass I = infinity for the design-sensitivity limit).
// sigma_F is simulated per candidate when quantile summaries need it.
std::vector<ScoreChoice> choose_score(const std::vector<ScoreSpec>& candidates,
                                      const AltModel& alt, double I,
                                      double alpha, Summary summary,
                                      Rng rng = Rng(0, 0), int threads = 0,
                                      long sigma_I_sim = 500,
                                      long sigma_B = 2000);

struct BinaryGridCell {
  double tau_l = 0.0;
  double tau_u = 0.0;
  double mu_F = 0.0;
  double mean_kappa = 0.0;
};

struct BinaryGridResult {
  double best_tau_l = 0.0;
  double best_tau_u = 0.0;
  double best_mean_kappa = 0.0;
  std::vector<BinaryGridCell> grid;
};

// Predicted mean of kappa* over the (tau_l, tau_u) grid of binary scores.
BinaryGridResult binary_score_grid(const AltModel& alt, double I, double alpha,
                                   double grid_step);

// Sample-splitting screening design (screen on a (1-zeta) fraction at level
// alpha_tilde with cutoff kappa_tilde, confirm on the rest).
struct SplitSpec {
  double zeta = 0.5;
  double kappa_tilde = 0.5;
  double alpha_tilde = 0.05;
  double alpha_FP = 0.05;
  double alpha_FN = 0.05;
  AsymptoticLaw law;       // alternative F
  AsymptoticLaw null_law;  // mu_F0 = 1/2, sigma_F0 = sigma_q / 2

  void validate() const;
};

struct SplitRates {
  double FPR = 0.0;
  double FNR = 0.0;
};

// Screening error rates at total sample size I.
SplitRates split_rates(const SplitSpec& split, double I);

// Larger of the two sample-size lower bounds, on the sqrt((1-zeta)I) scale,
// for a particular choice of (alpha_tilde, kappa_tilde).
double split_sample_bound(const SplitSpec& split, double alpha_tilde,
                          double kappa_tilde);

struct SplitMinimum {
  double required_screening_sample = 0.0;  // lower bound on (1-zeta) I
  double optimal_alpha_tilde = 0.0;
  double optimal_kappa_tilde = 0.0;  // boundary infimum at 1/2
};

// Minimum screening sample over (alpha_tilde, kappa_tilde): attained at
// alpha_tilde = alpha_FP with kappa_tilde at its lower boundary 1/2.
SplitMinimum split_minimum_sample(const SplitSpec& split);

}  // namespace sensval
