#include "sensval/senscore.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sensval/numerics.hpp"

namespace sensval {

TailDir parse_tail(const std::string& text) {
  if (text == "greater") return TailDir::greater;
  if (text == "less") return TailDir::less;
  if (text == "two-sided" || text == "two_sided") return TailDir::two_sided;
  throw std::invalid_argument("tail: expected greater|less|two-sided");
}

std::string to_string(TailDir t) {
  switch (t) {
    case TailDir::greater:
      return "greater";
    case TailDir::less:
      return "less";
    case TailDir::two_sided:
      return "two-sided";
  }
  return {};
}

MethodSpec MethodSpec::normal_approx() { return MethodSpec{}; }

MethodSpec MethodSpec::monte_carlo(long B, std::uint64_t seed) {
  if (B < 1) throw std::invalid_argument("MethodSpec: mc needs B >= 1");
  MethodSpec m;
  m.kind = Kind::monte_carlo;
  m.B = B;
  m.seed = seed;
  return m;
}

MethodSpec MethodSpec::exact_enum() {
  MethodSpec m;
  m.kind = Kind::exact_enum;
  return m;
}

MethodSpec MethodSpec::parse(const std::string& text) {
  if (text == "approx" || text == "normal") return normal_approx();
  if (text == "exact") return exact_enum();
  if (text.rfind("mc", 0) == 0) {
    long B = 100000;
    if (text.size() > 2) {
      if (text[2] != ':') {
        throw std::invalid_argument("method: expected approx|mc:<B>|exact");
      }
      try {
        B = std::stol(text.substr(3));
      } catch (const std::exception&) {
        throw std::invalid_argument("method: bad draw count in '" + text + "'");
      }
    }
    return monte_carlo(B, 0);
  }
  throw std::invalid_argument("method: expected approx|mc:<B>|exact");
}

std::string MethodSpec::to_string() const {
  switch (kind) {
    case Kind::normal_approx:
      return "approx";
    case Kind::monte_carlo: {
      std::ostringstream os;
      os << "mc:" << B;
      return os.str();
    }
    case Kind::exact_enum:
      return "exact";
  }
  return {};
}

double statistic(const ScoreVector& sv, const PairDiffs& d) {
  if (sv.q.size() != d.y.size()) {
    throw std::invalid_argument("statistic: score vector does not match data");
  }
  if (!(sv.sum_q > 0.0)) {
    throw std::domain_error("statistic: degenerate sample, all scores zero");
  }
  double num = 0.0;
  for (size_t i = 0; i < sv.q.size(); ++i) {
    if (d.y[i] > 0.0) num += sv.q[i];
  }
  return num / sv.sum_q;
}

namespace {

double kappa_of_gamma(double gamma) { return gamma / (1.0 + gamma); }

// Comparison slack so that algebraically equal score sums, accumulated in
// different orders, still count as reaching the target.
double cmp_eps(double t_scaled) { return 1e-9 * (1.0 + std::fabs(t_scaled)); }

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("gamma must be positive and finite");
  }
}

}  // namespace

GammaBound pvalue_bounds_normal(const ScoreVector& sv, double t, double gamma) {
  check_gamma(gamma);
  if (!(sv.sum_q > 0.0)) {
    throw std::domain_error("pvalue_bounds_normal: degenerate sample");
  }
  // z = sqrt(I)(t - k)/(sigma_qI sqrt(k(1-k))) reduces to the I-free form
  // (t - k) sum q / sqrt(k(1-k) sum q^2).
  auto upper = [&](double kap) {
    double z = (t - kap) * sv.sum_q / std::sqrt(kap * (1.0 - kap) * sv.sum_q_sq);
    return norm_ccdf(z);
  };
  GammaBound gb;
  gb.gamma = gamma;
  gb.method = MethodSpec::normal_approx();
  gb.p_upper = upper(kappa_of_gamma(gamma));
  gb.p_lower = upper(kappa_of_gamma(1.0 / gamma));
  return gb;
}

namespace kernels {

long mc_exceed_count_serial(const std::vector<double>& q, double t_scaled,
                            double kappa, long B, const Rng& rng) {
  const long n = static_cast<long>(q.size());
  const double eps = cmp_eps(t_scaled);
  long count = 0;
  for (long b = 0; b < B; ++b) {
    Rng r = rng.substream(static_cast<std::uint64_t>(b));
    double s = 0.0;
    for (long i = 0; i < n; ++i) {
      if (r.next_double() < kappa) s += q[i];
    }
    count += (s >= t_scaled - eps);
  }
  return count;
}

long mc_exceed_count_omp(const std::vector<double>& q, double t_scaled,
                         double kappa, long B, const Rng& rng, int threads) {
  const long n = static_cast<long>(q.size());
  const double eps = cmp_eps(t_scaled);
  long count = 0;
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt) reduction(+ : count)
  for (long b = 0; b < B; ++b) {
    Rng r = rng.substream(static_cast<std::uint64_t>(b));
    double s = 0.0;
    for (long i = 0; i < n; ++i) {
      if (r.next_double() < kappa) s += q[i];
    }
    count += (s >= t_scaled - eps);
  }
  return count;
}

namespace {

// Crossing threshold of one replicate: sort the replicate's uniforms and
// accumulate scores in that order; the statistic first reaches the target
// when kappa passes the uniform at the crossing position.
double one_threshold(const std::vector<double>& q, double t_scaled,
                     const double* u, std::vector<std::pair<double, double>>& buf) {
  const double eps = cmp_eps(t_scaled);
  if (t_scaled <= eps) return 0.0;
  buf.clear();
  for (size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) buf.emplace_back(u[i], q[i]);
  }
  std::sort(buf.begin(), buf.end());
  double s = 0.0;
  for (const auto& [ui, qi] : buf) {
    s += qi;
    if (s >= t_scaled - eps) return ui;
  }
  return 2.0;  // never reaches the target
}

}  // namespace

std::vector<double> mc_thresholds_serial(const std::vector<double>& q,
                                         double t_scaled, long B,
                                         const Rng& rng) {
  const long n = static_cast<long>(q.size());
  std::vector<double> out(B);
  std::vector<double> u(n);
  std::vector<std::pair<double, double>> buf;
  buf.reserve(n);
  for (long b = 0; b < B; ++b) {
    Rng r = rng.substream(static_cast<std::uint64_t>(b));
    for (long i = 0; i < n; ++i) u[i] = r.next_double();
    out[b] = one_threshold(q, t_scaled, u.data(), buf);
  }
  return out;
}

std::vector<double> mc_thresholds_omp(const std::vector<double>& q,
                                      double t_scaled, long B, const Rng& rng,
                                      int threads) {
  const long n = static_cast<long>(q.size());
  std::vector<double> out(B);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel num_threads(nt)
  {
    std::vector<double> u(n);
    std::vector<std::pair<double, double>> buf;
    buf.reserve(n);
#pragma omp for schedule(static)
    for (long b = 0; b < B; ++b) {
      Rng r = rng.substream(static_cast<std::uint64_t>(b));
      for (long i = 0; i < n; ++i) u[i] = r.next_double();
      out[b] = one_threshold(q, t_scaled, u.data(), buf);
    }
  }
  return out;
}

}  // namespace kernels

GammaBound pvalue_bounds_mc(const ScoreVector& sv, double t, double gamma,
                            long B, Rng rng, int threads) {
  check_gamma(gamma);
  if (B < 1) throw std::invalid_argument("pvalue_bounds_mc: B >= 1 required");
  const double t_scaled = t * sv.sum_q;
  auto count = [&](double kappa) {
    return threads == 1
               ? kernels::mc_exceed_count_serial(sv.q, t_scaled, kappa, B, rng)
               : kernels::mc_exceed_count_omp(sv.q, t_scaled, kappa, B, rng,
                                              threads);
  };
  GammaBound gb;
  gb.gamma = gamma;
  gb.method = MethodSpec::monte_carlo(B, rng.seed());
  gb.p_upper = (1.0 + count(kappa_of_gamma(gamma))) / (B + 1.0);
  gb.p_lower = (1.0 + count(kappa_of_gamma(1.0 / gamma))) / (B + 1.0);
  return gb;
}

namespace {

// Exact distribution summary: for each number of positive signs k among the
// n nonzero-score pairs, the count of sign assignments whose score sum
// reaches the target. p-bar at any kappa is then a short polynomial sum.
struct ExactTables {
  long n = 0;
  std::vector<double> count_by_ones;  // N_k, k = 0..n
};

ExactTables exact_tables(const std::vector<double>& q, double t_scaled) {
  std::vector<double> qpos;
  for (double v : q) {
    if (v > 0.0) qpos.push_back(v);
  }
  const long n = static_cast<long>(qpos.size());
  if (n > 22) {
    throw std::invalid_argument(
        "pvalue_bounds_exact: " + std::to_string(n) +
        " nonzero pairs exceed the 2^22 enumeration budget; use the "
        "monte-carlo method");
  }
  const double eps = cmp_eps(t_scaled);

  // split the mask into low/high halves so each assignment costs O(1)
  const long nlo = n / 2, nhi = n - nlo;
  const long mlo = 1L << nlo, mhi = 1L << nhi;
  std::vector<double> sum_lo(mlo, 0.0), sum_hi(mhi, 0.0);
  std::vector<int> ones_lo(mlo, 0), ones_hi(mhi, 0);
  for (long mask = 1; mask < mlo; ++mask) {
    long low = mask & (mask - 1);
    int bit = static_cast<int>(std::countr_zero(static_cast<unsigned long>(mask)));
    sum_lo[mask] = sum_lo[low] + qpos[bit];
    ones_lo[mask] = ones_lo[low] + 1;
  }
  for (long mask = 1; mask < mhi; ++mask) {
    long low = mask & (mask - 1);
    int bit = static_cast<int>(std::countr_zero(static_cast<unsigned long>(mask)));
    sum_hi[mask] = sum_hi[low] + qpos[nlo + bit];
    ones_hi[mask] = ones_hi[low] + 1;
  }

  ExactTables t;
  t.n = n;
  t.count_by_ones.assign(n + 1, 0.0);
  for (long hi = 0; hi < mhi; ++hi) {
    double base = sum_hi[hi];
    int ones = ones_hi[hi];
    for (long lo = 0; lo < mlo; ++lo) {
      if (base + sum_lo[lo] >= t_scaled - eps) {
        t.count_by_ones[ones + ones_lo[lo]] += 1.0;
      }
    }
  }
  return t;
}

double exact_pbar(const ExactTables& t, double kappa) {
  double total = 0.0;
  for (long k = 0; k <= t.n; ++k) {
    if (t.count_by_ones[k] == 0.0) continue;
    total += t.count_by_ones[k] *
             std::exp(k * std::log(kappa) + (t.n - k) * std::log1p(-kappa));
  }
  return std::min(total, 1.0);
}

}  // namespace

GammaBound pvalue_bounds_exact(const ScoreVector& sv, double t, double gamma) {
  check_gamma(gamma);
  ExactTables tables = exact_tables(sv.q, t * sv.sum_q);
  GammaBound gb;
  gb.gamma = gamma;
  gb.method = MethodSpec::exact_enum();
  gb.p_upper = exact_pbar(tables, kappa_of_gamma(gamma));
  gb.p_lower = exact_pbar(tables, kappa_of_gamma(1.0 / gamma));
  return gb;
}

GammaBound pvalue_bounds(const ScoreVector& sv, double t, double gamma,
                         const MethodSpec& method, int threads) {
  switch (method.kind) {
    case MethodSpec::Kind::normal_approx:
      return pvalue_bounds_normal(sv, t, gamma);
    case MethodSpec::Kind::monte_carlo:
      return pvalue_bounds_mc(sv, t, gamma, method.B, Rng(method.seed, method.stream),
                              threads);
    case MethodSpec::Kind::exact_enum:
      return pvalue_bounds_exact(sv, t, gamma);
  }
  throw std::logic_error("pvalue_bounds: bad method");
}

SensResult kappa_star_closed(const ScoreVector& sv, double t, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("kappa_star_closed: alpha must be in (0,1)");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("kappa_star_closed: statistic outside [0,1]");
  }
  if (sv.effective_I < 1 || !(sv.sum_q > 0.0)) {
    throw std::domain_error("kappa_star_closed: degenerate sample");
  }

  SensResult res;
  res.statistic = t;
  res.alpha = alpha;
  res.method = MethodSpec::normal_approx();
  res.effective_I = sv.effective_I;

  if (t == 0.0) {
    res.degenerate = true;
    res.kappa_star = 0.0;
    res.gamma_star = 0.0;
    res.gamma_star_trunc = 1.0;
    return res;
  }

  const double I = static_cast<double>(sv.effective_I);
  const double zq = norm_upper_quantile(alpha);
  const double c2 = sv.sigma_qI_sq * zq * zq;
  const double disc = std::sqrt(4.0 * c2 * I * t * (1.0 - t) + c2 * c2);
  // smaller root keeps T - kappa* >= 0 when alpha < 1/2; the larger root
  // applies on the other side
  const double sgn = (zq >= 0.0) ? -1.0 : 1.0;
  double kappa = (2.0 * I * t + c2 + sgn * disc) / (2.0 * (I + c2));
  kappa = std::clamp(kappa, 0.0, 1.0);

  res.kappa_star = kappa;
  res.gamma_star = kappa < 1.0 ? kappa / (1.0 - kappa)
                               : std::numeric_limits<double>::infinity();
  res.gamma_star_trunc = std::max(res.gamma_star, 1.0);
  return res;
}

SensResult kappa_star_search(const ScoreVector& sv, double t, double alpha,
                             const MethodSpec& method, double tol,
                             int threads) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("kappa_star_search: alpha must be in (0,1)");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("kappa_star_search: tol must be positive");
  }
  if (sv.effective_I < 1 || !(sv.sum_q > 0.0)) {
    throw std::domain_error("kappa_star_search: degenerate sample");
  }

  SensResult res;
  res.statistic = t;
  res.alpha = alpha;
  res.method = method;
  res.effective_I = sv.effective_I;

  const double t_scaled = t * sv.sum_q;
  std::function<double(double)> pbar;
  std::vector<double> thresholds;
  ExactTables tables;
  switch (method.kind) {
    case MethodSpec::Kind::monte_carlo: {
      Rng rng(method.seed, method.stream);
      thresholds = threads == 1
                       ? kernels::mc_thresholds_serial(sv.q, t_scaled, method.B,
                                                       rng)
                       : kernels::mc_thresholds_omp(sv.q, t_scaled, method.B,
                                                    rng, threads);
      std::sort(thresholds.begin(), thresholds.end());
      pbar = [&thresholds, B = method.B](double kappa) {
        auto it = std::lower_bound(thresholds.begin(), thresholds.end(), kappa);
        return (1.0 + static_cast<double>(it - thresholds.begin())) / (B + 1.0);
      };
      break;
    }
    case MethodSpec::Kind::exact_enum:
      tables = exact_tables(sv.q, t_scaled);
      pbar = [&tables](double kappa) { return exact_pbar(tables, kappa); };
      break;
    case MethodSpec::Kind::normal_approx:
      pbar = [&sv, t](double kappa) {
        double z = (t - kappa) * sv.sum_q /
                   std::sqrt(kappa * (1.0 - kappa) * sv.sum_q_sq);
        return norm_ccdf(z);
      };
      break;
  }

  double lo = 1e-9, hi = 1.0 - 1e-9;
  if (pbar(lo) >= alpha) {
    // the p-value bound is insignificant even as Gamma -> 0
    res.degenerate = true;
    res.kappa_star = 0.0;
    res.gamma_star = 0.0;
    res.gamma_star_trunc = 1.0;
    return res;
  }
  if (pbar(hi) < alpha) {
    lo = hi;  // never crosses below 1
  }
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (pbar(mid) >= alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  double kappa = 0.5 * (lo + hi);
  res.kappa_star = kappa;
  res.gamma_star = kappa / (1.0 - kappa);
  res.gamma_star_trunc = std::max(res.gamma_star, 1.0);
  return res;
}

namespace {

SensResult kappa_star_by_method(const ScoreVector& sv, double t, double alpha,
                                const MethodSpec& method, int threads) {
  if (method.kind == MethodSpec::Kind::normal_approx) {
    return kappa_star_closed(sv, t, alpha);
  }
  return kappa_star_search(sv, t, alpha, method, 1e-4, threads);
}

}  // namespace

SensResult two_sided(const ScoreVector& sv, const PairDiffs& d, double alpha,
                     const MethodSpec& method, int threads) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("two_sided: alpha must be in (0,1)");
  }
  double t = statistic(sv, d);
  SensResult greater = kappa_star_by_method(sv, t, 0.5 * alpha, method, threads);
  SensResult less = kappa_star_by_method(sv, 1.0 - t, 0.5 * alpha, method, threads);
  SensResult res = greater.kappa_star >= less.kappa_star ? greater : less;
  res.statistic = t;
  res.alpha = alpha;
  res.tail = TailDir::two_sided;
  res.degenerate = greater.degenerate && less.degenerate;
  return res;
}

std::vector<GammaBound> sensitivity_table(const ScoreVector& sv,
                                          const PairDiffs& d,
                                          const std::vector<double>& gammas,
                                          const MethodSpec& method,
                                          TailDir tail, int threads) {
  if (gammas.empty()) {
    throw std::invalid_argument("sensitivity_table: no gamma values");
  }
  for (double g : gammas) {
    if (!(g >= 1.0)) {
      throw std::invalid_argument("sensitivity_table: gammas must be >= 1");
    }
  }
  const double t = statistic(sv, d);

  auto bounds_for = [&](double stat) {
    std::vector<GammaBound> out;
    out.reserve(gammas.size());
    if (method.kind == MethodSpec::Kind::monte_carlo) {
      // one threshold set serves every Gamma: common random numbers
      Rng rng(method.seed, method.stream);
      std::vector<double> thr =
          threads == 1 ? kernels::mc_thresholds_serial(sv.q, stat * sv.sum_q,
                                                       method.B, rng)
                       : kernels::mc_thresholds_omp(sv.q, stat * sv.sum_q,
                                                    method.B, rng, threads);
      std::sort(thr.begin(), thr.end());
      auto pbar = [&](double kappa) {
        auto it = std::lower_bound(thr.begin(), thr.end(), kappa);
        return (1.0 + static_cast<double>(it - thr.begin())) / (method.B + 1.0);
      };
      for (double g : gammas) {
        GammaBound gb;
        gb.gamma = g;
        gb.method = method;
        gb.p_upper = pbar(kappa_of_gamma(g));
        gb.p_lower = pbar(kappa_of_gamma(1.0 / g));
        out.push_back(gb);
      }
    } else {
      for (double g : gammas) {
        out.push_back(pvalue_bounds(sv, stat, g, method, threads));
      }
    }
    return out;
  };

  if (tail == TailDir::greater) return bounds_for(t);
  if (tail == TailDir::less) return bounds_for(1.0 - t);

  std::vector<GammaBound> gr = bounds_for(t);
  std::vector<GammaBound> le = bounds_for(1.0 - t);
  std::vector<GammaBound> out(gr.size());
  for (size_t i = 0; i < gr.size(); ++i) {
    out[i].gamma = gr[i].gamma;
    out[i].method = method;
    out[i].p_upper = std::min(1.0, 2.0 * std::min(gr[i].p_upper, le[i].p_upper));
    out[i].p_lower = std::min(1.0, 2.0 * std::min(gr[i].p_lower, le[i].p_lower));
  }
  return out;
}

}  // namespace sensval
