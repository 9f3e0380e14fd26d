// Timing comparison of the serial reference kernels against their OpenMP
// counterparts. Each row reports wall time and speedup; results are checked
// for equality so a benchmark run doubles as a consistency sweep.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "sensval/asymptotics.hpp"
#include "sensval/numerics.hpp"
#include "sensval/screening.hpp"
#include "sensval/senscore.hpp"
#include "sensval/sim.hpp"

using namespace sensval;
using Clock = std::chrono::steady_clock;

namespace {

double time_once(const std::function<void()>& f) {
  auto t0 = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const std::string& name, double serial, double parallel,
            bool equal) {
  std::printf("%-28s %9.3fs %9.3fs %7.2fx  %s\n", name.c_str(), serial,
              parallel, serial / parallel, equal ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  long scale = argc > 1 ? std::stol(argv[1]) : 1;
  int threads = omp_get_max_threads();
  std::printf("threads: %d, scale: %ld\n", threads, scale);
  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial", "openmp", "speedup");

  Rng rng(42, 0);
  PairDiffs d;
  for (int i = 0; i < 100; ++i) d.y.push_back(0.7 + draw_normal(rng));
  ScoreVector sv = score_vector(ScoreSpec::wilcoxon(), d);
  double t = statistic(sv, d);

  {
    const long B = 400000 * scale;
    long a = 0, b = 0;
    double ts = time_once([&] {
      a = kernels::mc_exceed_count_serial(sv.q, t * sv.sum_q, 0.7, B, Rng(1, 1));
    });
    double tp = time_once([&] {
      b = kernels::mc_exceed_count_omp(sv.q, t * sv.sum_q, 0.7, B, Rng(1, 1),
                                       0);
    });
    report("mc exceed count", ts, tp, a == b);
  }

  {
    const long B = 200000 * scale;
    std::vector<double> a, b;
    double ts = time_once([&] {
      a = kernels::mc_thresholds_serial(sv.q, t * sv.sum_q, B, Rng(2, 1));
    });
    double tp = time_once([&] {
      b = kernels::mc_thresholds_omp(sv.q, t * sv.sum_q, B, Rng(2, 1), 0);
    });
    report("mc crossing thresholds", ts, tp, a == b);
  }

  {
    AltModel alt = AltModel::normal_shift(0.5, 1.0);
    const long B = 20000 * scale;
    std::vector<double> a, b;
    double ts = time_once([&] {
      a = simulate_statistics_serial(ScoreSpec::wilcoxon(), alt, 200, B,
                                     Rng(3, 1));
    });
    double tp = time_once([&] {
      b = simulate_statistics_omp(ScoreSpec::wilcoxon(), alt, 200, B, Rng(3, 1),
                                  0);
    });
    report("statistic simulation", ts, tp, a == b);
  }

  {
    AltModel alt = AltModel::t_shift(2.0, 0.8);
    const long B = 10000 * scale;
    std::vector<double> a, b;
    double ts = time_once([&] {
      a = simulate_kappa_serial(ScoreSpec::ustat(8, 6, 7), alt, 200, B, 0.05,
                                Rng(4, 1));
    });
    double tp = time_once([&] {
      b = simulate_kappa_omp(ScoreSpec::ustat(8, 6, 7), alt, 200, B, 0.05,
                             Rng(4, 1), 0);
    });
    report("sensitivity-value simulation", ts, tp, a == b);
  }

  {
    OutcomeMatrix m;
    m.n_pairs = 41;
    Rng base(7, 0);
    const long n = 3000 * scale;
    for (long j = 0; j < n; ++j) {
      Rng r = base.substream(j);
      std::vector<double> row;
      for (int i = 0; i < 41; ++i) row.push_back(draw_normal(r));
      m.rows.push_back(row);
      m.outcome_ids.push_back("g" + std::to_string(j));
    }
    ScreeningTable a, b;
    double ts = time_once([&] {
      a = screen(m, ScoreSpec::wilcoxon(), 0.05, TailDir::two_sided,
                 MethodSpec::normal_approx(), 1);
    });
    double tp = time_once([&] {
      b = screen(m, ScoreSpec::wilcoxon(), 0.05, TailDir::two_sided,
                 MethodSpec::normal_approx(), 0);
    });
    bool equal = a.rows.size() == b.rows.size();
    for (size_t j = 0; equal && j < a.rows.size(); ++j) {
      equal = a.rows[j].kappa_two_sided == b.rows[j].kappa_two_sided &&
              a.rows[j].rank == b.rows[j].rank;
    }
    report("screening (3000 outcomes)", ts, tp, equal);
  }

  return 0;
}
