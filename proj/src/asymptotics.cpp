#include "sensval/asymptotics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sensval/numerics.hpp"
#include "sensval/senscore.hpp"

namespace sensval {

AltModel AltModel::normal_shift(double d, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("AltModel: scale must be positive");
  AltModel m;
  m.family_ = Family::normal_shift;
  m.d_ = d;
  m.s_ = s;
  return m;
}

AltModel AltModel::t_shift(double dof, double d) {
  if (!(dof > 0.0)) throw std::invalid_argument("AltModel: dof must be positive");
  AltModel m;
  m.family_ = Family::t_shift;
  m.dof_ = dof;
  m.d_ = d;
  return m;
}

AltModel AltModel::empirical(std::vector<double> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("AltModel: empirical needs at least 2 samples");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("AltModel: empirical samples must be finite");
    }
  }
  AltModel m;
  m.family_ = Family::empirical;
  std::sort(samples.begin(), samples.end());
  const size_t n = samples.size();
  double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (n - 1));
  double iqr = samples[static_cast<size_t>(0.75 * (n - 1))] -
               samples[static_cast<size_t>(0.25 * (n - 1))];
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = std::max(std::fabs(mean), 1.0) * 1e-3;
  m.h_ = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  m.xs_ = std::move(samples);
  return m;
}

AltModel AltModel::parse(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("AltModel: expected normal:d,s | t:dof,d | empirical:<path>");
  }
  std::string name = text.substr(0, colon);
  std::string rest = text.substr(colon + 1);
  if (name == "empirical") {
    std::ifstream in(rest);
    if (!in) {
      throw std::runtime_error("AltModel: cannot open samples file '" + rest + "'");
    }
    std::vector<double> xs;
    double v;
    while (in >> v) xs.push_back(v);
    return empirical(std::move(xs));
  }
  std::vector<double> args;
  std::stringstream ss(rest);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      args.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::invalid_argument("AltModel: bad parameter '" + tok + "'");
    }
  }
  if (name == "normal") {
    if (args.size() == 1) return normal_shift(args[0], 1.0);
    if (args.size() == 2) return normal_shift(args[0], args[1]);
    throw std::invalid_argument("AltModel: normal takes d[,s]");
  }
  if (name == "t") {
    if (args.size() == 1) return t_shift(args[0], 0.0);
    if (args.size() == 2) return t_shift(args[0], args[1]);
    throw std::invalid_argument("AltModel: t takes dof[,d]");
  }
  throw std::invalid_argument("AltModel: unknown family '" + name + "'");
}

std::string AltModel::to_string() const {
  std::ostringstream os;
  switch (family_) {
    case Family::normal_shift:
      os << "normal:" << d_ << "," << s_;
      break;
    case Family::t_shift:
      os << "t:" << dof_ << "," << d_;
      break;
    case Family::empirical:
      os << "empirical(n=" << xs_.size() << ")";
      break;
  }
  return os.str();
}

double AltModel::density(double y) const {
  switch (family_) {
    case Family::normal_shift:
      return norm_pdf((y - d_) / s_) / s_;
    case Family::t_shift:
      return t_density(y - d_, dof_);
    case Family::empirical: {
      double acc = 0.0;
      for (double x : xs_) acc += norm_pdf((y - x) / h_);
      return acc / (xs_.size() * h_);
    }
  }
  return 0.0;
}

double AltModel::cdf(double y) const {
  switch (family_) {
    case Family::normal_shift:
      return norm_cdf((y - d_) / s_);
    case Family::t_shift:
      return t_cdf(y - d_, dof_);
    case Family::empirical: {
      double acc = 0.0;
      for (double x : xs_) acc += norm_cdf((y - x) / h_);
      return acc / xs_.size();
    }
  }
  return 0.0;
}

double AltModel::ccdf(double y) const {
  switch (family_) {
    case Family::normal_shift:
      return norm_ccdf((y - d_) / s_);
    case Family::t_shift:
      return 1.0 - t_cdf(y - d_, dof_);
    case Family::empirical: {
      double acc = 0.0;
      for (double x : xs_) acc += norm_ccdf((y - x) / h_);
      return acc / xs_.size();
    }
  }
  return 0.0;
}

double AltModel::abs_cdf(double y) const {
  if (y <= 0.0) return 0.0;
  return cdf(y) - cdf(-y);
}

double AltModel::abs_ccdf(double y) const {
  if (y <= 0.0) return 1.0;
  return ccdf(y) + cdf(-y);
}

double AltModel::abs_quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("abs_quantile: u must be in (0,1)");
  }
  return abs_quantile_tail(1.0 - u);
}

double AltModel::abs_quantile_tail(double q) const {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::domain_error("abs_quantile_tail: q must be in (0,1)");
  }
  double hi = 1.0;
  // grow until the tail mass beyond hi drops under q
  while (abs_ccdf(hi) > q) {
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("abs_quantile: bracket overflow");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (hi - lo < 1e-10 * (1.0 + mid)) break;
    if (abs_ccdf(mid) > q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double AltModel::sample(Rng& rng) const {
  switch (family_) {
    case Family::normal_shift:
      return d_ + s_ * draw_normal(rng);
    case Family::t_shift:
      return d_ + draw_t(rng, dof_);
    case Family::empirical: {
      // smoothed bootstrap, consistent with the kernel CDF
      double x = xs_[rng.next_below(xs_.size())];
      return x + h_ * draw_normal(rng);
    }
  }
  return 0.0;
}

double g_function(const AltModel& alt, double u, double one_minus_u) {
  if (!(u > 0.0) || !(one_minus_u > 0.0)) {
    throw std::domain_error("g_function: u must be in (0,1)");
  }
  double y = alt.abs_quantile_tail(one_minus_u);
  double fy = alt.density(y);
  double fny = alt.density(-y);
  if (fy + fny <= 0.0) return 0.5;
  return fy / (fy + fny);
}

double g_function(const AltModel& alt, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("g_function: u must be in (0,1)");
  }
  return g_function(alt, u, 1.0 - u);
}

double mu_f(const ScoreSpec& spec, const AltModel& alt) {
  spec.validate();
  if (spec.family == ScoreSpec::Family::binary) {
    // psi is an indicator: integrate g over its support only
    double v = integrate([&](double u) { return g_function(alt, u); },
                         spec.tau_l == 0.0 ? 1e-12 : spec.tau_l,
                         spec.tau_u == 1.0 ? 1.0 - 1e-12 : spec.tau_u, 1e-9);
    return v / (spec.tau_u - spec.tau_l);
  }
  double l1 = spec.family == ScoreSpec::Family::wilcoxon ? 0.5
              : spec.family == ScoreSpec::Family::ustat
                  ? static_cast<double>(spec.m_hi - spec.m_lo + 1)
                  : 1.0;
  double v = integrate01(
      [&](double u, double omu) {
        return spec.psi(u, omu) * g_function(alt, u, omu);
      },
      1e-8);
  return v / l1;
}

AsymptoticLaw null_law(const ScoreSpec& spec) {
  PsiNorms norms = psi_norms(spec);
  AsymptoticLaw law;
  law.mu_F = 0.5;
  law.sigma_q_sq = norms.sigma_q_sq_limit;
  law.sigma_F_sq = norms.sigma_q_sq_limit / 4.0;
  law.provenance = SigmaProvenance::closed_form;
  return law;
}

AsymptoticLaw wilcoxon_law(const AltModel& alt, long mc_B, Rng rng,
                           WilcoxonVarianceForm form) {
  AsymptoticLaw law;
  law.sigma_q_sq = 4.0 / 3.0;

  double p2, p3;
  if (alt.family() == AltModel::Family::normal_shift) {
    // P(Y1+Y2>0, Y1+Y3>0) = E_Z[Phi(Z + 2d/s)^2]: a one-dimensional integral
    // over the shared variable (bivariate orthant with correlation 1/2),
    // mapped to (0,1) by Z = Phi^{-1}(v).
    double a = 2.0 * alt.shift() / alt.scale();
    p2 = norm_cdf(a / std::sqrt(2.0));
    p3 = integrate01(
        [&](double v) {
          double c = norm_cdf(norm_quantile(v) + a);
          return c * c;
        },
        1e-10);
    law.provenance = SigmaProvenance::closed_form;
  } else {
    // Monte-Carlo triples for the orthant probability
    if (mc_B < 1000) throw std::invalid_argument("wilcoxon_law: mc_B too small");
    long c2 = 0, c3 = 0;
    for (long b = 0; b < mc_B; ++b) {
      Rng r = rng.substream(static_cast<std::uint64_t>(b));
      double y1 = alt.sample(r), y2 = alt.sample(r), y3 = alt.sample(r);
      bool s12 = y1 + y2 > 0.0, s13 = y1 + y3 > 0.0;
      c2 += s12;
      c3 += (s12 && s13);
    }
    p2 = static_cast<double>(c2) / mc_B;
    p3 = static_cast<double>(c3) / mc_B;
    law.provenance = SigmaProvenance::simulated;
    law.sim_B = mc_B;
    law.sim_seed = rng.seed();
  }

  law.mu_F = p2;
  law.sigma_F_sq = form == WilcoxonVarianceForm::standard
                       ? 4.0 * (p3 - p2 * p2)
                       : 4.0 * (p2 - p3 * p3);
  return law;
}

std::vector<double> simulate_statistics_serial(const ScoreSpec& spec,
                                               const AltModel& alt, long I,
                                               long B, const Rng& rng) {
  std::vector<double> out(B);
  PairDiffs d;
  d.y.resize(I);
  for (long b = 0; b < B; ++b) {
    Rng r = rng.substream(static_cast<std::uint64_t>(b));
    for (long i = 0; i < I; ++i) d.y[i] = alt.sample(r);
    ScoreVector sv = score_vector(spec, d);
    out[b] = statistic(sv, d);
  }
  return out;
}

std::vector<double> simulate_statistics_omp(const ScoreSpec& spec,
                                            const AltModel& alt, long I, long B,
                                            const Rng& rng, int threads) {
  std::vector<double> out(B);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel num_threads(nt)
  {
    PairDiffs d;
    d.y.resize(I);
#pragma omp for schedule(static)
    for (long b = 0; b < B; ++b) {
      Rng r = rng.substream(static_cast<std::uint64_t>(b));
      for (long i = 0; i < I; ++i) d.y[i] = alt.sample(r);
      ScoreVector sv = score_vector(spec, d);
      out[b] = statistic(sv, d);
    }
  }
  return out;
}

double sigma_f_simulated(const ScoreSpec& spec, const AltModel& alt, long I_sim,
                         long B, Rng rng, int threads) {
  if (I_sim < 30) throw std::invalid_argument("sigma_f_simulated: I_sim >= 30");
  if (B < 1000) throw std::invalid_argument("sigma_f_simulated: B >= 1000");
  std::vector<double> ts =
      threads == 1 ? simulate_statistics_serial(spec, alt, I_sim, B, rng)
                   : simulate_statistics_omp(spec, alt, I_sim, B, rng, threads);
  double mean = std::accumulate(ts.begin(), ts.end(), 0.0) / B;
  double ss = 0.0;
  for (double t : ts) ss += (t - mean) * (t - mean);
  return static_cast<double>(I_sim) * ss / (B - 1);
}

LawPoint kappa_law_asymptotic(const AsymptoticLaw& law, double alpha, double I) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("kappa_law_asymptotic: alpha in (0,1)");
  }
  if (!(I >= 1.0)) throw std::invalid_argument("kappa_law_asymptotic: I >= 1");
  double zq = norm_upper_quantile(alpha);
  LawPoint p;
  p.center = law.mu_F - std::sqrt(law.sigma_q_sq) * zq *
                            std::sqrt(law.mu_F * (1.0 - law.mu_F)) / std::sqrt(I);
  p.sd = std::sqrt(law.sigma_F_sq / I);
  return p;
}

LawPoint kappa_law_finite(const AsymptoticLaw& law, double alpha, double I) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("kappa_law_finite: alpha in (0,1)");
  }
  if (!(I >= 1.0)) throw std::invalid_argument("kappa_law_finite: I >= 1");
  double zq = norm_upper_quantile(alpha);
  double eta = law.sigma_q_sq * zq * zq / I;
  double mu = law.mu_F;
  double root = std::sqrt(4.0 * eta * mu * (1.0 - mu) + eta * eta);
  LawPoint p;
  p.center = mu - ((2.0 * mu - 1.0) * eta + root) / (2.0 * (1.0 + eta));
  p.sd = std::sqrt(law.sigma_F_sq) / (std::sqrt(I) * (1.0 + eta)) *
         (1.0 + eta * (2.0 * mu - 1.0) / root);
  return p;
}

double power(const AsymptoticLaw& law, double alpha, double I, double gamma,
             PowerApprox approx) {
  if (!(gamma > 0.0)) throw std::invalid_argument("power: gamma > 0 required");
  double kappa = gamma / (1.0 + gamma);
  double sF = std::sqrt(law.sigma_F_sq);
  switch (approx) {
    case PowerApprox::asymptotic: {
      double zq = norm_upper_quantile(alpha);
      double num = std::sqrt(I) * (law.mu_F - kappa) -
                   std::sqrt(law.sigma_q_sq) * zq *
                       std::sqrt(law.mu_F * (1.0 - law.mu_F));
      return norm_cdf(num / sF);
    }
    case PowerApprox::finite_sample: {
      LawPoint p = kappa_law_finite(law, alpha, I);
      return norm_cdf((p.center - kappa) / p.sd);
    }
    case PowerApprox::no_constant:
      return norm_cdf(std::sqrt(I) * (law.mu_F - kappa) / sF);
  }
  throw std::logic_error("power: bad approximation kind");
}

}  // namespace sensval
