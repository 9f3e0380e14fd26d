#include "sensval/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sensval {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_ccdf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

namespace {

// Acklam's rational approximation to the normal quantile (|rel err| < 1.2e-9),
// used as the starting point for Newton polish.
double norm_quantile_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double r = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
           ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  if (p > 1.0 - plow) {
    double r = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
           ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  double s = p - 0.5;
  double r = s * s;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * s /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("norm_quantile: p must be in (0,1)");
  }
  double x = norm_quantile_seed(p);
  // Two Newton steps; the residual is evaluated from whichever tail keeps the
  // CDF difference well conditioned.
  for (int it = 0; it < 2; ++it) {
    double err = (p < 0.5) ? norm_cdf(x) - p : (1.0 - p) - norm_ccdf(x);
    double d = norm_pdf(x);
    if (d <= 0.0) break;
    x -= err / d;
  }
  return x;
}

double norm_upper_quantile(double alpha) { return -norm_quantile(alpha); }

double lbeta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Continued fraction for the incomplete beta (Lentz's algorithm).
double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double eps = std::numeric_limits<double>::epsilon();
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 10 * eps) break;
  }
  return h;
}

}  // namespace

double betainc_reg(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("betainc_reg: a, b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double front = std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double t_density(double x, double dof) {
  if (!(dof > 0.0)) throw std::domain_error("t_density: dof must be positive");
  double lg = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
              0.5 * std::log(dof * M_PI);
  return std::exp(lg - 0.5 * (dof + 1.0) * std::log1p(x * x / dof));
}

double t_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw std::domain_error("t_cdf: dof must be positive");
  if (x == 0.0) return 0.5;
  double w = dof / (dof + x * x);
  double tail = 0.5 * betainc_reg(0.5 * dof, 0.5, w);
  return x > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("t_quantile: p must be in (0,1)");
  }
  if (!(dof > 0.0)) throw std::domain_error("t_quantile: dof must be positive");
  if (dof == 1.0) return std::tan(M_PI * (p - 0.5));
  if (dof == 2.0) {
    double u = 2.0 * p - 1.0;
    return u * std::sqrt(2.0 / ((1.0 - u) * (1.0 + u)));
  }
  // generic case: invert the CDF with a grown bracket
  double hi = 1.0;
  while (t_cdf(hi, dof) < p) hi *= 2.0;
  double lo = -1.0;
  while (t_cdf(lo, dof) > p) lo *= 2.0;
  return find_root([&](double x) { return t_cdf(x, dof) - p; }, lo, hi, 1e-12);
}

double draw_t(Rng& rng, double dof) {
  return t_quantile(rng.next_double(), dof);
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw std::invalid_argument("find_root: no sign change on bracket");
  }
  // Brent's method
  double c = a, fc = fa;
  double d = b - a, e = d;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 200; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    double tol1 = 2.0 * eps * std::fabs(b) + 0.5 * tol;
    double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        double q1 = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * q1 * (q1 - r) - (b - a) * (r - 1.0));
        q = (q1 - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::fabs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

namespace {

// 7-point Gauss / 15-point Kronrod pair on [-1,1] (QUADPACK dqk15 constants).
const double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                        0.741531185599394, 0.586087235467691, 0.405845151377397,
                        0.207784955007898, 0.0};
const double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                        0.140653259715525, 0.169004726639267, 0.190350578064785,
                        0.204432940075298, 0.209482141084728};
const double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                       0.417959183673469};

struct GkResult {
  double kronrod;
  double err;
};

template <class F>
GkResult gk15(const F& f, double a, double b) {
  double h = 0.5 * (b - a);
  double mid = 0.5 * (a + b);
  double fv[15];
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 7; ++i) {
    double dx = h * kXgk[i];
    double f1 = f(mid - dx), f2 = f(mid + dx);
    fv[i] = f1;
    fv[14 - i] = f2;
    resk += kWgk[i] * (f1 + f2);
    if (i % 2 == 1) resg += kWg[i / 2] * (f1 + f2);
  }
  double fc = f(mid);
  fv[7] = fc;
  resk += kWgk[7] * fc;
  resg += kWg[3] * fc;
  for (double v : fv) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("integrate: non-finite integrand value");
    }
  }
  return {resk * h, std::fabs((resk - resg) * h)};
}

template <class F>
double adaptive_gk(const F& f, double a, double b, double tol) {
  struct Panel {
    double a, b;
  };
  std::vector<Panel> stack{{a, b}};
  double total = 0.0;
  long panels = 0;
  const double width = b - a;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    if (++panels > 200000) {
      throw std::runtime_error("integrate: refinement did not converge");
    }
    GkResult r = gk15(f, p.a, p.b);
    double w = p.b - p.a;
    if (r.err <= tol * (w / width) || w < 1e-13 * width) {
      total += r.kronrod;
    } else {
      double m = 0.5 * (p.a + p.b);
      stack.push_back({p.a, m});
      stack.push_back({m, p.b});
    }
  }
  return total;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (!(b > a)) throw std::invalid_argument("integrate: requires b > a");
  return adaptive_gk(f, a, b, tol);
}

double integrate01(const std::function<double(double, double)>& f, double tol) {
  // u = t^3 (10 - 15 t + 6 t^2): quintic smoothstep whose derivative vanishes
  // to second order at both ends, taming u^{-p} endpoint singularities for
  // p < 2/3. Near u = 1 the complement is evaluated through the mirrored
  // polynomial, never as 1 - u, so the integrand sees it at full precision.
  auto h = [&](double t) {
    double u, omu;
    if (t <= 0.5) {
      u = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
      omu = 1.0 - u;  // exact: u <= 1/2
    } else {
      double s = 1.0 - t;
      omu = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
      u = 1.0 - omu;  // exact: omu <= 1/2
    }
    if (u <= 0.0 || omu <= 0.0) return 0.0;  // underflowed to an endpoint
    double w = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    return f(u, omu) * w;
  };
  return adaptive_gk(h, 0.0, 1.0, tol);
}

double integrate01(const std::function<double(double)>& f, double tol) {
  return integrate01([&](double u, double) { return f(u); }, tol);
}

}  // namespace sensval
