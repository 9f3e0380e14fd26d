#include "sensval/scores.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sensval/numerics.hpp"

namespace sensval {

long PairDiffs::nonzero_count() const {
  long n = 0;
  for (double v : y) n += (v != 0.0);
  return n;
}

void PairDiffs::validate() const {
  if (y.empty()) throw std::invalid_argument("PairDiffs: need at least one pair");
  for (double v : y) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("PairDiffs: entries must be finite");
    }
  }
}

PairDiffs differences(const std::vector<RawPairRecord>& records) {
  std::map<std::string, std::vector<const RawPairRecord*>> by_pair;
  for (const auto& rec : records) by_pair[rec.pair_id].push_back(&rec);

  PairDiffs out;
  out.y.reserve(by_pair.size());
  for (const auto& [id, units] : by_pair) {
    if (units.size() != 2) {
      throw std::invalid_argument("differences: pair '" + id + "' has " +
                                  std::to_string(units.size()) +
                                  " units, expected 2");
    }
    int zsum = units[0]->z + units[1]->z;
    if (zsum != 1 || units[0]->z < 0 || units[0]->z > 1 || units[1]->z < 0 ||
        units[1]->z > 1) {
      throw std::invalid_argument("differences: pair '" + id +
                                  "' does not have exactly one treated unit");
    }
    const RawPairRecord* treated = units[0]->z == 1 ? units[0] : units[1];
    const RawPairRecord* control = units[0]->z == 1 ? units[1] : units[0];
    out.y.push_back(treated->r - control->r);
  }
  out.validate();
  return out;
}

std::vector<double> ranks_abs(const PairDiffs& d) {
  const long n = d.size();
  std::vector<long> idx;
  idx.reserve(n);
  for (long i = 0; i < n; ++i) {
    if (d.y[i] != 0.0) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](long a, long b) {
    return std::fabs(d.y[a]) < std::fabs(d.y[b]);
  });

  std::vector<double> r(n, 0.0);
  long i = 0;
  while (i < static_cast<long>(idx.size())) {
    long j = i;
    double v = std::fabs(d.y[idx[i]]);
    while (j + 1 < static_cast<long>(idx.size()) &&
           std::fabs(d.y[idx[j + 1]]) == v) {
      ++j;
    }
    double mid = 0.5 * static_cast<double>(i + j) + 1.0;  // mid-rank, 1-based
    for (long k = i; k <= j; ++k) r[idx[k]] = mid;
    i = j + 1;
  }
  return r;
}

ScoreSpec ScoreSpec::wilcoxon() { return ScoreSpec{}; }

ScoreSpec ScoreSpec::ustat(int m, int m_lo, int m_hi) {
  ScoreSpec s;
  s.family = Family::ustat;
  s.m = m;
  s.m_lo = m_lo;
  s.m_hi = m_hi;
  s.validate();
  return s;
}

ScoreSpec ScoreSpec::binary(double tau_l, double tau_u) {
  ScoreSpec s;
  s.family = Family::binary;
  s.tau_l = tau_l;
  s.tau_u = tau_u;
  s.validate();
  return s;
}

ScoreSpec ScoreSpec::beta(double a, double b) {
  ScoreSpec s;
  s.family = Family::beta;
  s.a = a;
  s.b = b;
  s.validate();
  return s;
}

void ScoreSpec::validate() const {
  switch (family) {
    case Family::wilcoxon:
      return;
    case Family::ustat:
      if (m < 1 || m_lo < 1 || m_lo > m_hi || m_hi > m) {
        throw std::invalid_argument(
            "ScoreSpec: ustat requires 1 <= mlo <= mhi <= m");
      }
      return;
    case Family::binary:
      if (!(tau_l >= 0.0 && tau_l < tau_u && tau_u <= 1.0)) {
        throw std::invalid_argument(
            "ScoreSpec: binary requires 0 <= tl < tu <= 1");
      }
      return;
    case Family::beta:
      if (!(a > 0.0 && b > 0.0)) {
        throw std::invalid_argument("ScoreSpec: beta requires a > 0, b > 0");
      }
      return;
  }
}

ScoreSpec ScoreSpec::parse(const std::string& text) {
  auto colon = text.find(':');
  std::string name = text.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      size_t pos = 0;
      double v;
      try {
        v = std::stod(tok, &pos);
      } catch (const std::exception&) {
        throw std::invalid_argument("ScoreSpec: bad parameter '" + tok + "'");
      }
      if (pos != tok.size()) {
        throw std::invalid_argument("ScoreSpec: bad parameter '" + tok + "'");
      }
      args.push_back(v);
    }
  }
  auto need = [&](size_t n) {
    if (args.size() != n) {
      throw std::invalid_argument("ScoreSpec: '" + name + "' takes " +
                                  std::to_string(n) + " parameters");
    }
  };
  if (name == "wilcoxon") {
    need(0);
    return wilcoxon();
  }
  if (name == "ustat") {
    need(3);
    return ustat(static_cast<int>(args[0]), static_cast<int>(args[1]),
                 static_cast<int>(args[2]));
  }
  if (name == "binary") {
    need(2);
    return binary(args[0], args[1]);
  }
  if (name == "beta") {
    need(2);
    return beta(args[0], args[1]);
  }
  throw std::invalid_argument("ScoreSpec: unknown family '" + name + "'");
}

std::string ScoreSpec::to_string() const {
  std::ostringstream os;
  switch (family) {
    case Family::wilcoxon:
      return "wilcoxon";
    case Family::ustat:
      os << "ustat:" << m << "," << m_lo << "," << m_hi;
      return os.str();
    case Family::binary:
      os << "binary:" << tau_l << "," << tau_u;
      return os.str();
    case Family::beta:
      os << "beta:" << a << "," << b;
      return os.str();
  }
  return {};
}

namespace {

double lchoose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double ScoreSpec::psi(double u, double one_minus_u) const {
  switch (family) {
    case Family::wilcoxon:
      return u;
    case Family::ustat: {
      double s = 0.0;
      for (int l = m_lo; l <= m_hi; ++l) {
        s += l * std::exp(lchoose(m, l) + (l - 1) * std::log(u) +
                          (m - l) * std::log(one_minus_u));
      }
      return s;
    }
    case Family::binary:
      return (u >= tau_l && u <= tau_u) ? 1.0 / (tau_u - tau_l) : 0.0;
    case Family::beta:
      return std::exp((a - 1.0) * std::log(u) + (b - 1.0) * std::log(one_minus_u) -
                      lbeta(a, b));
  }
  return 0.0;
}

PsiNorms psi_norms(const ScoreSpec& spec) {
  spec.validate();
  PsiNorms out{};
  switch (spec.family) {
    case ScoreSpec::Family::wilcoxon:
      out.l1 = 0.5;
      out.l2 = std::sqrt(1.0 / 3.0);
      break;
    case ScoreSpec::Family::ustat: {
      out.l1 = spec.m_hi - spec.m_lo + 1;  // each term integrates to 1
      double l2sq = 0.0;
      for (int l = spec.m_lo; l <= spec.m_hi; ++l) {
        for (int lp = spec.m_lo; lp <= spec.m_hi; ++lp) {
          l2sq += std::exp(std::log(static_cast<double>(l) * lp) +
                           lchoose(spec.m, l) + lchoose(spec.m, lp) +
                           lbeta(l + lp - 1, 2 * spec.m - l - lp + 1));
        }
      }
      out.l2 = std::sqrt(l2sq);
      break;
    }
    case ScoreSpec::Family::binary:
      out.l1 = 1.0;
      out.l2 = 1.0 / std::sqrt(spec.tau_u - spec.tau_l);
      break;
    case ScoreSpec::Family::beta:
      if (!(spec.a > 0.5 && spec.b > 0.5)) {
        throw std::domain_error(
            "psi_norms: beta scores need a > 1/2 and b > 1/2 for a finite "
            "2-norm");
      }
      out.l1 = 1.0;
      out.l2 = std::sqrt(std::exp(lbeta(2.0 * spec.a - 1.0, 2.0 * spec.b - 1.0) -
                                  2.0 * lbeta(spec.a, spec.b)));
      break;
  }
  out.sigma_q_sq_limit = (out.l2 * out.l2) / (out.l1 * out.l1);
  return out;
}

namespace {

// Exact combinatorial U-statistic scores (tie-free ranks a_i in 1..I):
//   q_i = C(I,m)^{-1} sum_{l=mlo}^{mhi} C(a_i-1, l-1) C(I-a_i, m-l)
double ustat_exact_score(const ScoreSpec& s, long rank, long I) {
  double total = 0.0;
  double lden = lchoose(static_cast<double>(I), s.m);
  for (int l = s.m_lo; l <= s.m_hi; ++l) {
    if (rank - 1 < l - 1 || I - rank < s.m - l) continue;
    total += std::exp(lchoose(static_cast<double>(rank - 1), l - 1) +
                      lchoose(static_cast<double>(I - rank), s.m - l) - lden);
  }
  return total;
}

}  // namespace

ScoreVector score_vector(const ScoreSpec& spec, const PairDiffs& d,
                         UStatMode mode) {
  spec.validate();
  d.validate();

  std::vector<double> r = ranks_abs(d);
  const long n = d.size();
  const long I0 = d.nonzero_count();

  bool tie_free = true;
  for (long i = 0; i < n; ++i) {
    if (r[i] != 0.0 && r[i] != std::floor(r[i])) {
      tie_free = false;
      break;
    }
  }

  ScoreVector sv;
  sv.q.assign(n, 0.0);
  sv.effective_I = I0;

  bool ustat_exact = false;
  if (spec.family == ScoreSpec::Family::ustat) {
    switch (mode) {
      case UStatMode::auto_select:
        ustat_exact = tie_free && I0 >= spec.m;
        break;
      case UStatMode::exact:
        if (I0 < spec.m) {
          throw std::invalid_argument(
              "score_vector: exact ustat scores need at least m nonzero pairs");
        }
        if (!tie_free) {
          throw std::invalid_argument(
              "score_vector: exact ustat scores require tie-free ranks");
        }
        ustat_exact = true;
        break;
      case UStatMode::approximate:
        break;
    }
  }
  for (long i = 0; i < n; ++i) {
    if (r[i] == 0.0) continue;  // zero difference
    double q;
    if (spec.family == ScoreSpec::Family::wilcoxon) {
      q = r[i];
    } else if (ustat_exact) {
      q = ustat_exact_score(spec, static_cast<long>(r[i]), I0);
    } else {
      q = spec.psi(r[i] / static_cast<double>(I0 + 1));
    }
    sv.q[i] = q;
  }

  for (double q : sv.q) {
    sv.sum_q += q;
    sv.sum_q_sq += q * q;
  }
  if (sv.sum_q > 0.0) {
    sv.sigma_qI_sq = static_cast<double>(I0) * sv.sum_q_sq / (sv.sum_q * sv.sum_q);
  }

  PsiNorms norms = (spec.family == ScoreSpec::Family::beta &&
                    !(spec.a > 0.5 && spec.b > 0.5))
                       ? PsiNorms{1.0, std::numeric_limits<double>::quiet_NaN(),
                                  std::numeric_limits<double>::quiet_NaN()}
                       : psi_norms(spec);
  sv.psi_l1 = norms.l1;
  sv.psi_l2 = norms.l2;
  sv.sigma_q_sq_limit = norms.sigma_q_sq_limit;
  return sv;
}

}  // namespace sensval
