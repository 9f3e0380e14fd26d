#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "sensval/numerics.hpp"
#include "sensval/rng.hpp"

using namespace sensval;

namespace {

// Independent oracle for Phi: composite Simpson integration of the density
// from 0 to x in long double. Never touches the library implementation.
long double phi_oracle(long double x) {
  const long double inv_sqrt2pi = 0.398942280401432677939946L;
  auto pdf = [&](long double t) { return inv_sqrt2pi * std::exp(-0.5L * t * t); };
  const int n = 40000;  // even
  long double h = x / n;
  long double acc = pdf(0.0L) + pdf(x);
  for (int i = 1; i < n; ++i) acc += pdf(i * h) * (i % 2 ? 4.0L : 2.0L);
  return 0.5L + acc * h / 3.0L;
}

// Quantile oracle: Newton iteration against phi_oracle.
long double quantile_oracle(long double p) {
  const long double inv_sqrt2pi = 0.398942280401432677939946L;
  long double x = 0.0L;
  for (int it = 0; it < 60; ++it) {
    long double err = phi_oracle(x) - p;
    long double d = inv_sqrt2pi * std::exp(-0.5L * x * x);
    x -= err / d;
  }
  return x;
}

}  // namespace

TEST_CASE("normal cdf values") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  // mean of the Wilcoxon limit under a half-unit shift
  CHECK(norm_cdf(1.0 / std::sqrt(2.0)) == doctest::Approx(0.76).epsilon(0.005));
  CHECK(std::fabs(norm_cdf(1.6449) - 0.95) < 1e-4);
  for (double x : {-6.0, -3.2, -1.0, -0.3, 0.4, 0.7071067811865476, 1.6449, 2.5, 5.5}) {
    CHECK(std::fabs(norm_cdf(x) - static_cast<double>(phi_oracle(x))) < 1e-12);
  }
}

TEST_CASE("normal cdf symmetry and monotonicity") {
  double prev = -1.0;
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    CHECK(std::fabs(norm_cdf(x) + norm_cdf(-x) - 1.0) < 1e-12);
    CHECK(norm_cdf(x) >= prev);
    prev = norm_cdf(x);
  }
}

TEST_CASE("normal quantile") {
  CHECK(norm_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(norm_quantile(0.95) ==
        doctest::Approx(static_cast<double>(quantile_oracle(0.95L))).epsilon(1e-12));
  CHECK(norm_quantile(0.995) ==
        doctest::Approx(static_cast<double>(quantile_oracle(0.995L))).epsilon(1e-12));
  CHECK(std::fabs(norm_quantile(0.95) - 1.6449) < 1e-4);
  CHECK(std::fabs(norm_quantile(0.995) - 2.5758) < 1e-4);
  CHECK_THROWS_AS(norm_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(norm_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(norm_quantile(-0.2), std::domain_error);
}

TEST_CASE("quantile/cdf roundtrip") {
  for (double x = -6.0; x <= 6.0; x += 0.37) {
    CHECK(std::fabs(norm_quantile(norm_cdf(x)) - x) < 1e-8);
  }
  for (double p = 0.001; p < 1.0; p += 0.013) {
    CHECK(std::fabs(norm_cdf(norm_quantile(p)) - p) < 1e-10);
  }
}

TEST_CASE("t distribution") {
  CHECK(t_cdf(0.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
  // closed forms for dof 2: density 1/(2 sqrt 2), cdf x/(2 sqrt(2+x^2)) + 1/2
  CHECK(t_density(0.0, 2.0) ==
        doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-12));
  for (double x : {-3.0, -1.0, 0.5, 1.0, 2.5}) {
    double cf = 0.5 + x / (2.0 * std::sqrt(2.0 + x * x));
    CHECK(t_cdf(x, 2.0) == doctest::Approx(cf).epsilon(1e-10));
  }
  CHECK_THROWS_AS(t_density(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(t_cdf(1.0, -2.0), std::domain_error);

  for (double dof : {1.0, 2.0, 5.0}) {
    // density integrates to one (tails mapped to (0,1) by x = tan)
    double mass = integrate(
        [&](double w) {
          double x = std::tan(M_PI * (w - 0.5));
          double jac = M_PI / std::pow(std::cos(M_PI * (w - 0.5)), 2);
          return t_density(x, dof) * jac;
        },
        1e-9, 1.0 - 1e-9, 1e-10);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    double prev = 0.0;
    for (double x = -8.0; x <= 8.0; x += 0.5) {
      double c = t_cdf(x, dof);
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("t quantile roundtrip") {
  for (double dof : {1.0, 2.0, 3.5, 7.0}) {
    for (double p = 0.02; p < 1.0; p += 0.07) {
      CHECK(t_cdf(t_quantile(p, dof), dof) == doctest::Approx(p).epsilon(1e-9));
    }
  }
}

TEST_CASE("find_root") {
  CHECK(find_root([](double x) { return x - 1.0; }, 0.0, 2.0, 1e-12) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(find_root([](double x) { return norm_cdf(x) - 0.95; }, 0.0, 10.0,
                  1e-12) ==
        doctest::Approx(static_cast<double>(quantile_oracle(0.95L)))
            .epsilon(1e-9));
  CHECK(find_root([](double x) { return x * x * x - 2.0; }, 1.0, 2.0, 1e-12) ==
        doctest::Approx(std::cbrt(2.0)).epsilon(1e-10));
  CHECK_THROWS_AS(
      find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12),
      std::invalid_argument);
}

TEST_CASE("integrate01") {
  CHECK(integrate01([](double) { return 1.0; }, 1e-10) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(integrate01([](double u) { return 2.0 * u; }, 1e-10) ==
        doctest::Approx(1.0).epsilon(1e-9));
  // integrable endpoint singularity: analytic antiderivative gives 1/0.6
  CHECK(integrate01([](double u) { return std::pow(u, -0.4); }, 1e-9) ==
        doctest::Approx(1.0 / 0.6).epsilon(1e-7));
  // singular at u = 1: the two-argument form receives 1-u exactly
  CHECK(integrate01([](double, double omu) { return std::pow(omu, -0.4); },
                    1e-9) == doctest::Approx(1.0 / 0.6).epsilon(1e-7));
  CHECK(integrate01([](double u) { return std::sin(M_PI * u); }, 1e-10) ==
        doctest::Approx(2.0 / M_PI).epsilon(1e-9));
  CHECK_THROWS(integrate01(
      [](double u) { return u < 0.3 ? std::numeric_limits<double>::quiet_NaN() : 1.0; },
      1e-8));
}

TEST_CASE("rng determinism and streams") {
  Rng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  // a stream is unaffected by draws taken from other streams
  Rng base(9, 0);
  Rng s1 = base.substream(1);
  Rng s2 = base.substream(2);
  std::vector<std::uint64_t> first;
  for (int i = 0; i < 16; ++i) first.push_back(s1.next_u64());
  Rng s2_again = base.substream(2);
  for (int i = 0; i < 999; ++i) (void)s2.next_u64();
  Rng s1_again = base.substream(1);
  for (int i = 0; i < 16; ++i) CHECK(s1_again.next_u64() == first[i]);
  (void)s2_again;

  // distinct streams differ
  Rng x(1, 0), y(1, 1);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += (x.next_u64() == y.next_u64());
  CHECK(same == 0);
}

TEST_CASE("rng uniforms live in (0,1) with near-uniform mean") {
  Rng r(2024, 0);
  double acc = 0.0;
  for (int i = 0; i < 200000; ++i) {
    double u = r.next_double();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    acc += u;
  }
  CHECK(acc / 200000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal draws match the cdf") {
  Rng r(5, 3);
  int below = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) below += (draw_normal(r) < 1.0);
  CHECK(static_cast<double>(below) / n ==
        doctest::Approx(norm_cdf(1.0)).epsilon(0.01));
}
