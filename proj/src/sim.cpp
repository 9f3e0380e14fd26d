#include "sensval/sim.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <limits>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sensval/design.hpp"
#include "sensval/numerics.hpp"
#include "sensval/senscore.hpp"

namespace sensval {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(long v) { return std::to_string(v); }

double vec_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double vec_sd(const std::vector<double>& v) {
  double m = vec_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1));
}

double vec_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  double idx = p * (v.size() - 1);
  size_t lo = static_cast<size_t>(idx);
  size_t hi = std::min(lo + 1, v.size() - 1);
  double w = idx - lo;
  return (1.0 - w) * v[lo] + w * v[hi];
}

double vec_median(const std::vector<double>& v) {
  return vec_quantile(v, 0.5);
}

const std::vector<std::array<int, 3>> kUstatTuples = {
    {2, 2, 2},    {8, 8, 8},    {8, 7, 8},    {8, 6, 8},   {8, 5, 8},
    {20, 20, 20}, {20, 18, 20}, {20, 16, 20}, {8, 7, 7},   {8, 6, 7}};

}  // namespace

std::vector<double> simulate_kappa_serial(const ScoreSpec& spec,
                                          const AltModel& alt, long I, long B,
                                          double alpha, const Rng& rng) {
  std::vector<double> out(B);
  PairDiffs d;
  d.y.resize(I);
  for (long b = 0; b < B; ++b) {
    Rng r = rng.substream(static_cast<std::uint64_t>(b));
    for (long i = 0; i < I; ++i) d.y[i] = alt.sample(r);
    ScoreVector sv = score_vector(spec, d);
    out[b] = kappa_star_closed(sv, statistic(sv, d), alpha).kappa_star;
  }
  return out;
}

std::vector<double> simulate_kappa_omp(const ScoreSpec& spec,
                                       const AltModel& alt, long I, long B,
                                       double alpha, const Rng& rng,
                                       int threads) {
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
      out[b] = kappa_star_closed(sv, statistic(sv, d), alpha).kappa_star;
    }
  }
  return out;
}

namespace {

std::vector<double> simulate_kappa(const ScoreSpec& spec, const AltModel& alt,
                                   long I, long B, double alpha, const Rng& rng,
                                   int threads) {
  return threads == 1 ? simulate_kappa_serial(spec, alt, I, B, alpha, rng)
                      : simulate_kappa_omp(spec, alt, I, B, alpha, rng, threads);
}

}  // namespace

PowerCheckResult power_check(const AltModel& alt, const ScoreSpec& spec, long I,
                             double gamma, double alpha, long B, Rng rng,
                             int threads, long sigma_ref_I, long sigma_ref_B) {
  if (B < 1000) throw std::invalid_argument("power_check: B >= 1000 required");
  PowerCheckResult res;

  // dispersion of the sensitivity value at the reference size
  std::vector<double> ref = simulate_kappa(spec, alt, sigma_ref_I, sigma_ref_B,
                                           alpha, rng.substream(1), threads);
  double sd_ref = vec_sd(ref);
  res.sigma_F_sq = static_cast<double>(sigma_ref_I) * sd_ref * sd_ref;

  AsymptoticLaw law;
  law.mu_F = mu_f(spec, alt);
  law.sigma_q_sq = psi_norms(spec).sigma_q_sq_limit;
  law.sigma_F_sq = res.sigma_F_sq;
  law.provenance = SigmaProvenance::simulated;
  law.sim_B = sigma_ref_B;
  law.sim_I = sigma_ref_I;
  law.sim_seed = rng.seed();
  res.mu_F = law.mu_F;

  res.eq_asymptotic = power(law, alpha, static_cast<double>(I), gamma,
                            PowerApprox::asymptotic);
  res.eq_finite = power(law, alpha, static_cast<double>(I), gamma,
                        PowerApprox::finite_sample);
  res.no_constant = power(law, alpha, static_cast<double>(I), gamma,
                          PowerApprox::no_constant);

  // the rejection rule kappa* > kappa is the sensitivity analysis at gamma
  std::vector<double> ks =
      simulate_kappa(spec, alt, I, B, alpha, rng.substream(2), threads);
  double kap = gamma / (1.0 + gamma);
  long count = 0;
  for (double k : ks) count += (k > kap);
  res.simulated = static_cast<double>(count) / B;
  return res;
}

std::vector<std::string> SimJob::registry() {
  return {"table2", "table3", "table4", "fig1", "fig2", "appB", "beta_table"};
}

namespace {

AltModel alt_by_name(const std::string& name) {
  if (name == "normal_1_1") return AltModel::normal_shift(1.0, 1.0);
  if (name == "t2_plus_1.5") return AltModel::t_shift(2.0, 1.5);
  if (name == "normal_0.3_1") return AltModel::normal_shift(0.3, 1.0);
  if (name == "t2_plus_0.8") return AltModel::t_shift(2.0, 0.8);
  throw std::logic_error("unknown alt " + name);
}

SimTable job_table2(const SimJob& job, Rng base, int threads) {
  const long reps = job.reps > 0 ? job.reps : 100;
  const long B = job.B > 0 ? job.B : 100000;
  const std::vector<double> alphas = {0.05, 0.005};

  SimTable t;
  t.columns = {"I",        "dist",     "q10_a05",  "mean_a05",
               "q90_a05",  "q10_a005", "mean_a005", "q90_a005"};
  struct Scenario {
    long I;
    std::string dist;
  };
  const std::vector<Scenario> scenarios = {
      {30, "normal_1_1"}, {30, "t2_plus_1.5"}, {100, "normal_1_1"},
      {100, "t2_plus_1.5"}};

  for (size_t s = 0; s < scenarios.size(); ++s) {
    const AltModel alt = alt_by_name(scenarios[s].dist);
    const long I = scenarios[s].I;
    std::vector<std::vector<double>> diffs(alphas.size());

    // replicate datasets; the search reuses one uniform set across Gamma
    for (long r = 0; r < reps; ++r) {
      Rng rdata = base.substream(1000 * (s + 1) + 2 * r);
      PairDiffs d;
      d.y.resize(I);
      for (long i = 0; i < I; ++i) d.y[i] = alt.sample(rdata);
      ScoreVector sv = score_vector(ScoreSpec::wilcoxon(), d);
      double T = statistic(sv, d);
      MethodSpec mc = MethodSpec::monte_carlo(B, base.seed());
      mc.stream = base.substream(1000 * (s + 1) + 2 * r + 1).stream();
      for (size_t a = 0; a < alphas.size(); ++a) {
        double kc = kappa_star_closed(sv, T, alphas[a]).kappa_star;
        double km = kappa_star_search(sv, T, alphas[a], mc, 1e-4, threads)
                        .kappa_star;
        diffs[a].push_back(std::fabs(kc - km));
      }
    }
    t.rows.push_back({fmt(I), scenarios[s].dist,
                      fmt(vec_quantile(diffs[0], 0.1)), fmt(vec_mean(diffs[0])),
                      fmt(vec_quantile(diffs[0], 0.9)),
                      fmt(vec_quantile(diffs[1], 0.1)), fmt(vec_mean(diffs[1])),
                      fmt(vec_quantile(diffs[1], 0.9))});
  }
  t.metadata["B"] = fmt(B);
  t.metadata["statistic"] = "wilcoxon";
  return t;
}

SimTable job_table34(const SimJob& job, Rng base, int threads, bool medians) {
  const long reps = job.reps > 0 ? job.reps : 1000;
  const AltModel alt = medians ? alt_by_name("normal_0.3_1")
                               : alt_by_name("t2_plus_0.8");
  const double alpha = job.alpha;
  const std::vector<long> sizes = {100, 500};

  SimTable t;
  t.columns = {"m",        "m_lo",     "m_hi",     "I",
               "approx",   "approx_sd", "sim",     "sim_sd",
               "mu_inf"};
  for (size_t u = 0; u < kUstatTuples.size(); ++u) {
    auto [m, mlo, mhi] = kUstatTuples[u];
    ScoreSpec spec = ScoreSpec::ustat(m, mlo, mhi);
    double mu = mu_f(spec, alt);
    double sq2 = psi_norms(spec).sigma_q_sq_limit;
    double sF2 = sigma_f_simulated(spec, alt, 500, 4000,
                                   base.substream(40000 + u), threads);
    for (long I : sizes) {
      AsymptoticLaw law;
      law.mu_F = mu;
      law.sigma_q_sq = sq2;
      law.sigma_F_sq = sF2;
      LawPoint p = kappa_law_finite(law, alpha, static_cast<double>(I));

      std::vector<double> ks =
          simulate_kappa(spec, alt, I, reps, alpha,
                         base.substream(100 * (u + 1) + I), threads);
      double simc = medians ? vec_median(ks) : vec_mean(ks);
      t.rows.push_back({fmt(static_cast<long>(m)), fmt(static_cast<long>(mlo)),
                        fmt(static_cast<long>(mhi)), fmt(I), fmt(p.center),
                        fmt(p.sd), fmt(simc), fmt(vec_sd(ks)), fmt(mu)});
    }
  }
  t.metadata["alt"] = alt.to_string();
  t.metadata["summary"] = medians ? "median" : "mean";
  return t;
}

SimTable job_fig1(const SimJob&, Rng, int) {
  const std::vector<double> shifts = {0.0, 0.5, 1.0, 2.0};
  SimTable t;
  t.columns = {"u"};
  std::vector<AltModel> alts;
  for (double d : shifts) {
    alts.push_back(AltModel::normal_shift(d, 1.0));
    t.columns.push_back("normal_" + fmt(d));
  }
  for (double d : shifts) {
    alts.push_back(AltModel::t_shift(2.0, d));
    t.columns.push_back("t2_" + fmt(d));
  }
  for (int i = 1; i <= 99; ++i) {
    double u = i / 100.0;
    std::vector<std::string> row{fmt(u)};
    for (const AltModel& a : alts) row.push_back(fmt(g_function(a, u)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

SimTable job_fig2(const SimJob& job, Rng, int) {
  SimTable t;
  t.columns = {"pi1", "mu_F1", "mu_F2", "I_star", "eta_star"};
  const double lo = 0.5, hi = 10.0 / 11.0;
  std::vector<double> mus(50);
  for (int k = 0; k < 50; ++k) mus[k] = lo + (hi - lo) * (k + 1) / 51.0;
  for (double pi1 : {0.5, 0.75}) {
    for (double mu1 : mus) {
      for (double mu2 : mus) {
        if (!(mu1 > mu2)) continue;
        SubgroupSpec sub;
        sub.mu_F1 = mu1;
        sub.mu_F2 = mu2;
        sub.pi1 = pi1;
        sub.alpha = job.alpha;
        sub.sigma_q_sq = 4.0 / 3.0;
        CriticalSize cs = critical_sample_size(sub);
        t.rows.push_back(
            {fmt(pi1), fmt(mu1), fmt(mu2), fmt(cs.I_star), fmt(cs.eta_star)});
      }
    }
  }
  t.metadata["statistic"] = "wilcoxon";
  return t;
}

SimTable job_appB(const SimJob& job, Rng, int) {
  SimTable t;
  t.columns = {"panel", "tau_l", "tau_u", "I", "mu_F", "mean_kappa"};
  const double inf = std::numeric_limits<double>::infinity();

  // panel a: normal shift 0.3, tau_u = 1, several sample sizes
  AltModel a_alt = alt_by_name("normal_0.3_1");
  for (double I : {50.0, 100.0, 500.0, inf}) {
    BinaryGridResult g = binary_score_grid(a_alt, I, job.alpha, 0.01);
    for (const auto& cell : g.grid) {
      if (cell.tau_u != 1.0) continue;
      t.rows.push_back({"a", fmt(cell.tau_l), fmt(cell.tau_u),
                        std::isinf(I) ? "inf" : fmt(I), fmt(cell.mu_F),
                        fmt(cell.mean_kappa)});
    }
  }

  // panel b: t2 + 0.8 at I = 500, the full grid
  AltModel b_alt = alt_by_name("t2_plus_0.8");
  BinaryGridResult g = binary_score_grid(b_alt, 500.0, job.alpha, 0.01);
  for (const auto& cell : g.grid) {
    t.rows.push_back({"b", fmt(cell.tau_l), fmt(cell.tau_u), "500",
                      fmt(cell.mu_F), fmt(cell.mean_kappa)});
  }
  t.metadata["argmax_tau_l"] = fmt(g.best_tau_l);
  t.metadata["argmax_tau_u"] = fmt(g.best_tau_u);
  t.metadata["argmax_mean"] = fmt(g.best_mean_kappa);
  return t;
}

SimTable job_beta_table(const SimJob& job, Rng, int) {
  SimTable t;
  t.columns = {"a", "b", "dist", "I", "mean_kappa"};
  const std::vector<std::pair<std::string, AltModel>> dists = {
      {"normal_0.5_1", AltModel::normal_shift(0.5, 1.0)},
      {"normal_1_1", AltModel::normal_shift(1.0, 1.0)},
      {"t2_plus_0.5", AltModel::t_shift(2.0, 0.5)},
      {"t2_plus_1", AltModel::t_shift(2.0, 1.0)}};
  for (double a : {2.0, 4.0, 8.0}) {
    for (double b : {0.6, 1.0, 2.0, 4.0}) {
      ScoreSpec spec = ScoreSpec::beta(a, b);
      double sq2 = psi_norms(spec).sigma_q_sq_limit;
      for (const auto& [name, alt] : dists) {
        double mu = mu_f(spec, alt);
        for (double I : {100.0, 500.0,
                         std::numeric_limits<double>::infinity()}) {
          // first-order mean mu - Phibar^{-1}(alpha) ||psi||_2
          // sqrt(mu(1-mu)) / sqrt(I); the score family is normalized to
          // ||psi||_1 = 1 so sigma_q = ||psi||_2
          double center;
          if (std::isinf(I)) {
            center = mu;
          } else {
            AsymptoticLaw law;
            law.mu_F = mu;
            law.sigma_q_sq = sq2;
            law.sigma_F_sq = 0.0;  // means do not involve sigma_F
            center = kappa_law_asymptotic(law, job.alpha, I).center;
          }
          t.rows.push_back({fmt(a), fmt(b), name,
                            std::isinf(I) ? "inf" : fmt(I), fmt(center)});
        }
      }
    }
  }
  return t;
}

}  // namespace

SimTable run_job(const SimJob& job, Rng rng, int threads) {
  auto start = std::chrono::steady_clock::now();
  SimTable t;
  if (job.name == "table2") {
    t = job_table2(job, rng, threads);
  } else if (job.name == "table3") {
    t = job_table34(job, rng, threads, true);
  } else if (job.name == "table4") {
    t = job_table34(job, rng, threads, false);
  } else if (job.name == "fig1") {
    t = job_fig1(job, rng, threads);
  } else if (job.name == "fig2") {
    t = job_fig2(job, rng, threads);
  } else if (job.name == "appB") {
    t = job_appB(job, rng, threads);
  } else if (job.name == "beta_table") {
    t = job_beta_table(job, rng, threads);
  } else {
    throw std::invalid_argument("run_job: unknown job '" + job.name +
                                "'; known jobs: table2 table3 table4 fig1 "
                                "fig2 appB beta_table");
  }
  auto stop = std::chrono::steady_clock::now();
  t.metadata["job"] = job.name;
  t.metadata["seed"] = std::to_string(rng.seed());
  t.metadata["alpha"] = fmt(job.alpha);
  if (job.reps > 0) t.metadata["replications"] = fmt(job.reps);
  t.metadata["runtime_sec"] =
      fmt(std::chrono::duration<double>(stop - start).count());
  return t;
}

std::string SimTable::to_csv() const {
  std::ostringstream os;
  for (const auto& [k, v] : metadata) os << "# " << k << " = " << v << "\n";
  for (size_t i = 0; i < columns.size(); ++i) {
    os << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  }
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      os << row[i] << (i + 1 < row.size() ? "," : "\n");
    }
  }
  return os.str();
}

}  // namespace sensval
