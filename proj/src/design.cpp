#include "sensval/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sensval/numerics.hpp"

namespace sensval {

void SubgroupSpec::validate() const {
  if (!(mu_F1 > 0.5 && mu_F1 < 1.0 && mu_F2 > 0.5 && mu_F2 < 1.0)) {
    throw std::invalid_argument("SubgroupSpec: means must lie in (1/2, 1)");
  }
  if (!(mu_F1 > mu_F2)) {
    throw std::invalid_argument(
        "SubgroupSpec: no crossing, subgroup 1 must have the larger mean");
  }
  if (!(pi1 > 0.0 && pi1 < 1.0)) {
    throw std::invalid_argument("SubgroupSpec: pi1 must be in (0,1)");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("SubgroupSpec: alpha must be in (0,1)");
  }
  if (!(sigma_q_sq > 0.0)) {
    throw std::invalid_argument("SubgroupSpec: sigma_q_sq must be positive");
  }
}

namespace {

// Center of the finite-sample kappa* law as a function of (mu, eta).
double eta_center(double mu, double eta) {
  double root = std::sqrt(4.0 * eta * mu * (1.0 - mu) + eta * eta);
  return mu - ((2.0 * mu - 1.0) * eta + root) / (2.0 * (1.0 + eta));
}

}  // namespace

CriticalSize critical_sample_size(const SubgroupSpec& sub) {
  sub.validate();
  const double mu = sub.pooled_mu();

  // pooled center minus subgroup-1 center; negative at eta -> 0 where the
  // subgroup's larger limit dominates, positive once the 1/pi1 sample-size
  // penalty takes over
  auto diff = [&](double eta) {
    return eta_center(mu, eta) - eta_center(sub.mu_F1, eta / sub.pi1);
  };

  const double eta_lo = 1e-8, eta_hi = 10.0;
  double eta_star;
  if (diff(eta_lo) < 0.0 && diff(eta_hi) > 0.0) {
    eta_star = find_root(diff, eta_lo, eta_hi, 1e-12);
  } else {
    // no clean sign change; fall back to a dense scan for the first crossing
    double prev = diff(eta_lo);
    double found = -1.0;
    for (int k = 1; k <= 4000; ++k) {
      double eta = eta_lo * std::pow(eta_hi / eta_lo, k / 4000.0);
      double cur = diff(eta);
      if (prev < 0.0 && cur >= 0.0) {
        found = find_root(diff, eta_lo * std::pow(eta_hi / eta_lo, (k - 1) / 4000.0),
                          eta, 1e-12);
        break;
      }
      prev = cur;
    }
    if (found < 0.0) {
      throw std::runtime_error(
          "critical_sample_size: no crossing found on the eta bracket");
    }
    eta_star = found;
  }

  CriticalSize out;
  out.eta_star = eta_star;
  double zq = norm_upper_quantile(sub.alpha);
  out.I_star = sub.sigma_q_sq * zq * zq / eta_star;
  return out;
}

std::vector<ScoreChoice> choose_score(const std::vector<ScoreSpec>& candidates,
                                      const AltModel& alt, double I,
                                      double alpha, Summary summary,
                                      Rng rng, int threads, long sigma_I_sim,
                                      long sigma_B) {
  if (candidates.empty()) {
    throw std::invalid_argument("choose_score: no candidates");
  }
  const bool infinite = std::isinf(I);
  std::vector<ScoreChoice> out;
  out.reserve(candidates.size());
  for (size_t c = 0; c < candidates.size(); ++c) {
    const ScoreSpec& spec = candidates[c];
    ScoreChoice ch;
    ch.spec = spec;
    ch.mu_F = mu_f(spec, alt);
    ch.sigma_q_sq = psi_norms(spec).sigma_q_sq_limit;
    if (infinite) {
      ch.center = ch.mu_F;
      ch.sd = 0.0;
    } else {
      AsymptoticLaw law;
      law.mu_F = ch.mu_F;
      law.sigma_q_sq = ch.sigma_q_sq;
      law.sigma_F_sq = sigma_f_simulated(spec, alt, sigma_I_sim, sigma_B,
                                         rng.substream(c), threads);
      law.provenance = SigmaProvenance::simulated;
      LawPoint p = kappa_law_finite(law, alpha, I);
      ch.center = p.center;
      ch.sd = p.sd;
    }
    switch (summary.kind) {
      case SummaryKind::mean:
      case SummaryKind::median:
        ch.summary = ch.center;  // the law is normal: mean = median = center
        break;
      case SummaryKind::quantile:
        ch.summary = ch.center + ch.sd * norm_quantile(summary.p);
        break;
    }
    out.push_back(ch);
  }

  std::vector<size_t> order(out.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return out[a].summary > out[b].summary;
  });
  for (size_t pos = 0; pos < order.size(); ++pos) {
    out[order[pos]].rank = static_cast<int>(pos + 1);
  }
  return out;
}

BinaryGridResult binary_score_grid(const AltModel& alt, double I, double alpha,
                                   double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 0.05)) {
    throw std::invalid_argument("binary_score_grid: step must be in (0, 0.05]");
  }
  const long n = std::lround(1.0 / grid_step);
  if (std::fabs(n * grid_step - 1.0) > 1e-9) {
    throw std::invalid_argument("binary_score_grid: step must divide 1");
  }

  // cumulative integral of g on the grid; each cell integrated once
  std::vector<double> G(n + 1, 0.0);
  for (long k = 0; k < n; ++k) {
    double a = k * grid_step, b = (k + 1) * grid_step;
    if (k == 0) a = std::min(1e-12, b * 0.5);
    if (k == n - 1) b = 1.0 - 1e-12;
    G[k + 1] = G[k] + integrate([&](double u) { return g_function(alt, u); },
                                a, b, 1e-9);
  }

  const bool infinite = std::isinf(I);
  BinaryGridResult res;
  res.best_mean_kappa = -std::numeric_limits<double>::infinity();
  res.grid.reserve(n * (n + 1) / 2);
  for (long i = 0; i < n; ++i) {
    for (long j = i + 1; j <= n; ++j) {
      BinaryGridCell cell;
      cell.tau_l = i * grid_step;
      cell.tau_u = j * grid_step;
      double w = cell.tau_u - cell.tau_l;
      cell.mu_F = (G[j] - G[i]) / w;
      if (infinite) {
        cell.mean_kappa = cell.mu_F;
      } else {
        double zq = norm_upper_quantile(alpha);
        double eta = (1.0 / w) * zq * zq / I;
        cell.mean_kappa = eta_center(cell.mu_F, eta);
      }
      if (cell.mean_kappa > res.best_mean_kappa) {
        res.best_mean_kappa = cell.mean_kappa;
        res.best_tau_l = cell.tau_l;
        res.best_tau_u = cell.tau_u;
      }
      res.grid.push_back(cell);
    }
  }
  return res;
}

void SplitSpec::validate() const {
  if (!(zeta > 0.0 && zeta < 1.0)) {
    throw std::invalid_argument("SplitSpec: zeta must be in (0,1)");
  }
  if (!(alpha_tilde > 0.0 && alpha_tilde < 1.0 && alpha_FP > 0.0 &&
        alpha_FP < 1.0 && alpha_FN > 0.0 && alpha_FN < 1.0)) {
    throw std::invalid_argument("SplitSpec: levels must be in (0,1)");
  }
  if (!(kappa_tilde >= 0.5 && kappa_tilde < 1.0)) {
    throw std::invalid_argument("SplitSpec: kappa_tilde must be in [1/2, 1)");
  }
}

SplitRates split_rates(const SplitSpec& split, double I) {
  split.validate();
  if (!(I > 0.0)) throw std::invalid_argument("split_rates: I must be positive");
  const double n = (1.0 - split.zeta) * I;
  const double zt = norm_upper_quantile(split.alpha_tilde);
  const double sq = std::sqrt(split.law.sigma_q_sq);

  const double mu0 = split.null_law.mu_F;
  const double s0 = std::sqrt(split.null_law.sigma_F_sq);
  SplitRates out;
  out.FPR = 1.0 - norm_cdf((-std::sqrt(n) * (mu0 - split.kappa_tilde) +
                            sq * zt * std::sqrt(mu0 * (1.0 - mu0))) /
                           s0);

  const double mu = split.law.mu_F;
  const double sF = std::sqrt(split.law.sigma_F_sq);
  out.FNR = norm_cdf((-std::sqrt(n) * (mu - split.kappa_tilde) +
                      sq * zt * std::sqrt(mu * (1.0 - mu))) /
                     sF);
  return out;
}

double split_sample_bound(const SplitSpec& split, double alpha_tilde,
                          double kappa_tilde) {
  const double mu = split.law.mu_F;
  if (!(kappa_tilde > 0.5 && kappa_tilde < mu)) {
    throw std::domain_error(
        "split_sample_bound: needs 1/2 < kappa_tilde < mu_F");
  }
  const double sq = std::sqrt(split.law.sigma_q_sq);
  const double sF = std::sqrt(split.law.sigma_F_sq);
  const double zt = norm_upper_quantile(alpha_tilde);
  const double z_fp = norm_upper_quantile(split.alpha_FP);
  const double z_fn = norm_upper_quantile(split.alpha_FN);
  double screen = (z_fp - zt) * sq * 0.5 / (kappa_tilde - 0.5);
  double confirm =
      (sF * z_fn + sq * zt * std::sqrt(mu * (1.0 - mu))) / (mu - kappa_tilde);
  return std::max(screen, confirm);
}

SplitMinimum split_minimum_sample(const SplitSpec& split) {
  split.validate();
  const double mu = split.law.mu_F;
  if (!(mu > 0.5)) {
    throw std::domain_error("split_minimum_sample: requires mu_F > 1/2");
  }
  const double sq = std::sqrt(split.law.sigma_q_sq);
  const double sF = std::sqrt(split.law.sigma_F_sq);
  // at alpha_tilde = alpha_FP the screening bound vanishes and the
  // confirmation bound is evaluated at the kappa_tilde -> 1/2 boundary
  const double z_fp = norm_upper_quantile(split.alpha_FP);
  const double z_fn = norm_upper_quantile(split.alpha_FN);
  double bound = (sF * z_fn + sq * z_fp * std::sqrt(mu * (1.0 - mu))) / (mu - 0.5);
  SplitMinimum out;
  out.required_screening_sample = bound * bound;
  out.optimal_alpha_tilde = split.alpha_FP;
  out.optimal_kappa_tilde = 0.5;
  return out;
}

}  // namespace sensval
