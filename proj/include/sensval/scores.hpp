#pragma once

#include <string>
#include <vector>

namespace sensval {

// Treated-minus-control differences for one outcome. Zero differences are
// legal; they are excluded from ranking and always score zero.
struct PairDiffs {
  std::vector<double> y;

  long size() const { return static_cast<long>(y.size()); }
  long nonzero_count() const;
  void validate() const;  // throws on empty input or non-finite entries
};

// One unit of a raw matched pair: z = 1 treated, z = 0 control, r = outcome.
struct RawPairRecord {
  std::string pair_id;
  int z = 0;
  double r = 0.0;
};

// Collapse raw two-unit records into per-pair differences, ordered by pair id.
PairDiffs differences(const std::vector<RawPairRecord>& records);

// Mid-ranks of |y| among the nonzero entries; zero entries get rank 0.
std::vector<double> ranks_abs(const PairDiffs& d);

// Score family: wilcoxon | ustat:m,mlo,mhi | binary:tl,tu | beta:a,b
struct ScoreSpec {
  enum class Family { wilcoxon, ustat, binary, beta };

  Family family = Family::wilcoxon;
  int m = 0, m_lo = 0, m_hi = 0;  // ustat
  double tau_l = 0.0, tau_u = 0.0;  // binary
  double a = 0.0, b = 0.0;          // beta

  static ScoreSpec wilcoxon();
  static ScoreSpec ustat(int m, int m_lo, int m_hi);
  static ScoreSpec binary(double tau_l, double tau_u);
  static ScoreSpec beta(double a, double b);
  static ScoreSpec parse(const std::string& text);

  std::string to_string() const;
  void validate() const;

  // The family's score function psi(u) on (0,1). For ustat this is the
  // polynomial approximation sum_l l C(m,l) u^{l-1} (1-u)^{m-l}. The
  // two-argument form takes 1-u precomputed, for evaluation near u = 1
  // where the complement would otherwise lose precision.
  double psi(double u) const { return psi(u, 1.0 - u); }
  double psi(double u, double one_minus_u) const;
};

struct PsiNorms {
  double l1;                // ||psi||_1
  double l2;                // ||psi||_2
  double sigma_q_sq_limit;  // ||psi||_2^2 / ||psi||_1^2
};

// Closed-form norms of the score function. Beta requires a > 1/2 and b > 1/2
// for square integrability.
PsiNorms psi_norms(const ScoreSpec& spec);

// Realized per-pair scores plus the norms entering the bounding-variable CLT.
struct ScoreVector {
  std::vector<double> q;
  double sum_q = 0.0;
  double sum_q_sq = 0.0;
  double sigma_qI_sq = 0.0;       // I0 * sum q^2 / (sum q)^2, I0 = nonzero pairs
  double sigma_q_sq_limit = 0.0;  // family limit of sigma_{q,I}^2
  double psi_l1 = 0.0;
  double psi_l2 = 0.0;
  long effective_I = 0;  // number of nonzero differences
};

// U-statistic scoring mode. auto_select takes the exact combinatorial scores
// when the nonzero ranks are tie-free and I >= m, the polynomial
// approximation otherwise; forcing exact on too-small data throws.
enum class UStatMode { auto_select, exact, approximate };

ScoreVector score_vector(const ScoreSpec& spec, const PairDiffs& d,
                         UStatMode mode = UStatMode::auto_select);

}  // namespace sensval
