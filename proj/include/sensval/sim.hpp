#pragma once

#include <map>
#include <string>
#include <vector>

#include "sensval/asymptotics.hpp"
#include "sensval/rng.hpp"
#include "sensval/scores.hpp"

namespace sensval {

// A named simulation job with optional overrides of its defaults.
struct SimJob {
  std::string name;
  long reps = -1;         // replication count (-1 = job default)
  long B = -1;            // monte-carlo draws where applicable
  double alpha = 0.05;
  std::uint64_t seed = 0;

  static std::vector<std::string> registry();
};

// Plain tabular result; every job embeds its parameters in metadata.
struct SimTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> metadata;

  std::string to_csv() const;
};

SimTable run_job(const SimJob& job, Rng rng, int threads = 0);

// One closed-form sensitivity value per replicate dataset of size I drawn
// from alt. Serial reference and OpenMP versions are bit-identical.
std::vector<double> simulate_kappa_serial(const ScoreSpec& spec,
                                          const AltModel& alt, long I, long B,
                                          double alpha, const Rng& rng);
std::vector<double> simulate_kappa_omp(const ScoreSpec& spec,
                                       const AltModel& alt, long I, long B,
                                       double alpha, const Rng& rng,
                                       int threads);

struct PowerCheckResult {
  double simulated = 0.0;      // fraction of replicates rejecting at gamma
  double eq_asymptotic = 0.0;  // first-order formula
  double eq_finite = 0.0;      // finite-sample formula
  double no_constant = 0.0;    // constant term dropped
  double sigma_F_sq = 0.0;     // dispersion estimate used by the formulas
  double mu_F = 0.0;
};

// The four power numbers for one design point. The formula powers use mu_F
// from quadrature and a sigma_F estimated from the spread of simulated
// sensitivity values at a large reference size (sigma_ref_I), matching how
// such dispersion constants are calibrated in practice.
PowerCheckResult power_check(const AltModel& alt, const ScoreSpec& spec, long I,
                             double gamma, double alpha, long B, Rng rng,
                             int threads = 0, long sigma_ref_I = 1000,
                             long sigma_ref_B = 100000);

}  // namespace sensval
