// The OpenMP kernels must reproduce the serial reference bit for bit at any
// thread count.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "sensval/asymptotics.hpp"
#include "sensval/numerics.hpp"
#include "sensval/screening.hpp"
#include "sensval/senscore.hpp"
#include "sensval/sim.hpp"

using namespace sensval;

namespace {

ScoreVector make_sv(long I, std::uint64_t seed, PairDiffs* keep = nullptr) {
  Rng rng(seed, 0);
  PairDiffs d;
  for (long i = 0; i < I; ++i) d.y.push_back(0.5 + draw_normal(rng));
  ScoreVector sv = score_vector(ScoreSpec::wilcoxon(), d);
  if (keep) *keep = d;
  return sv;
}

}  // namespace

TEST_CASE("mc exceed count: omp equals serial") {
  PairDiffs d;
  ScoreVector sv = make_sv(60, 11, &d);
  double t = statistic(sv, d);
  Rng rng(7, 3);
  long serial = kernels::mc_exceed_count_serial(sv.q, t * sv.sum_q, 0.7, 40000, rng);
  for (int threads : {2, 4, 8}) {
    CHECK(kernels::mc_exceed_count_omp(sv.q, t * sv.sum_q, 0.7, 40000, rng,
                                       threads) == serial);
  }
}

TEST_CASE("mc thresholds: omp equals serial") {
  PairDiffs d;
  ScoreVector sv = make_sv(45, 13, &d);
  double t = statistic(sv, d);
  Rng rng(8, 5);
  auto serial = kernels::mc_thresholds_serial(sv.q, t * sv.sum_q, 20000, rng);
  for (int threads : {2, 4, 8}) {
    auto par = kernels::mc_thresholds_omp(sv.q, t * sv.sum_q, 20000, rng, threads);
    CHECK(par == serial);
  }
}

TEST_CASE("statistic simulation: omp equals serial") {
  AltModel alt = AltModel::t_shift(2.0, 0.8);
  auto serial = simulate_statistics_serial(ScoreSpec::ustat(8, 6, 7), alt, 80,
                                           5000, Rng(9, 2));
  for (int threads : {2, 4, 8}) {
    auto par = simulate_statistics_omp(ScoreSpec::ustat(8, 6, 7), alt, 80, 5000,
                                       Rng(9, 2), threads);
    CHECK(par == serial);
  }
}

TEST_CASE("kappa simulation: omp equals serial") {
  AltModel alt = AltModel::normal_shift(0.5, 1.0);
  auto serial = simulate_kappa_serial(ScoreSpec::wilcoxon(), alt, 100, 4000,
                                      0.05, Rng(10, 4));
  for (int threads : {2, 4, 8}) {
    auto par = simulate_kappa_omp(ScoreSpec::wilcoxon(), alt, 100, 4000, 0.05,
                                  Rng(10, 4), threads);
    CHECK(par == serial);
  }
}

TEST_CASE("searches and tables are thread-count invariant") {
  PairDiffs d;
  ScoreVector sv = make_sv(80, 21, &d);
  double t = statistic(sv, d);
  MethodSpec mc = MethodSpec::monte_carlo(30000, 17);
  SensResult one = kappa_star_search(sv, t, 0.05, mc, 1e-4, 1);
  for (int threads : {2, 4, 8}) {
    SensResult multi = kappa_star_search(sv, t, 0.05, mc, 1e-4, threads);
    CHECK(multi.kappa_star == one.kappa_star);
  }
  auto table1 = sensitivity_table(sv, d, {1, 2, 3, 5}, mc, TailDir::two_sided, 1);
  auto table4 = sensitivity_table(sv, d, {1, 2, 3, 5}, mc, TailDir::two_sided, 4);
  for (size_t i = 0; i < table1.size(); ++i) {
    CHECK(table1[i].p_upper == table4[i].p_upper);
    CHECK(table1[i].p_lower == table4[i].p_lower);
  }
}

TEST_CASE("screening is thread-count invariant") {
  OutcomeMatrix m;
  m.n_pairs = 30;
  Rng base(3, 9);
  for (int j = 0; j < 40; ++j) {
    Rng r = base.substream(j);
    std::vector<double> row;
    for (int i = 0; i < 30; ++i) row.push_back(draw_normal(r) + 0.1 * (j % 3));
    m.rows.push_back(row);
    m.outcome_ids.push_back("o" + std::to_string(j));
  }
  ScreeningTable one = screen(m, ScoreSpec::wilcoxon(), 0.05,
                              TailDir::two_sided, MethodSpec::monte_carlo(4000, 1), 1);
  for (int threads : {2, 8}) {
    ScreeningTable multi = screen(m, ScoreSpec::wilcoxon(), 0.05,
                                  TailDir::two_sided,
                                  MethodSpec::monte_carlo(4000, 1), threads);
    for (size_t j = 0; j < one.rows.size(); ++j) {
      CHECK(one.rows[j].kappa_two_sided == multi.rows[j].kappa_two_sided);
      CHECK(one.rows[j].rank == multi.rows[j].rank);
    }
  }
}
