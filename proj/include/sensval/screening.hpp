#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sensval/asymptotics.hpp"
#include "sensval/senscore.hpp"

namespace sensval {

// Input-file problem (bad CSV, unpairable records); the CLI maps this to its
// data-error exit code.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Many outcomes measured on one set of matched pairs. NaN marks a missing
// pair for that outcome.
struct OutcomeMatrix {
  std::vector<std::string> outcome_ids;
  std::vector<std::vector<double>> rows;  // one row per outcome, length n_pairs
  long n_pairs = 0;

  void validate() const;
};

enum class MatrixFormat { wide_csv, long_csv, raw_csv };

MatrixFormat parse_format(const std::string& text);  // wide | long | raw

OutcomeMatrix load_matrix(const std::string& path, MatrixFormat format);
OutcomeMatrix parse_matrix(std::istream& in, MatrixFormat format);

struct OutcomeResult {
  std::string id;
  long effective_I = 0;
  double T = 0.0;
  double kappa_greater = 0.0;
  double kappa_less = 0.0;
  double kappa_two_sided = 0.0;
  double gamma_trunc = 1.0;
  int rank = 0;  // 0 when the outcome was not analyzed
  std::string flags;

  bool analyzed() const { return flags.empty() || flags == "degenerate"; }
};

struct NullReference {
  double center = 0.0;
  double sd = 0.0;
  double alpha = 0.05;
  long I_ref = 0;  // median effective I across analyzed outcomes
};

struct ScreeningTable {
  std::vector<OutcomeResult> rows;
  NullReference null_ref;
  ScoreSpec spec;
  double alpha = 0.05;
  TailDir tail = TailDir::two_sided;
  MethodSpec method;
};

// Per-outcome sensitivity values, ranked by the requested tail's kappa*
// (descending, ties by id). Outcomes with fewer than 5 nonzero pairs are
// flagged `insufficient_pairs` and excluded from ranking. Outcomes are
// independent; the loop parallelizes with per-outcome substreams.
ScreeningTable screen(const OutcomeMatrix& m, const ScoreSpec& spec,
                      double alpha, TailDir tail, const MethodSpec& method,
                      int threads = 0);

// Sorted kappa* values paired with standard normal quantiles at (i-0.5)/n,
// for Q-Q plotting against the null reference line.
std::vector<std::pair<double, double>> qq_data(const ScreeningTable& table,
                                               TailDir which = TailDir::greater);

struct HistBin {
  double lo = 0.0;
  double hi = 0.0;
  long count = 0;
};

// Right-open bins of the kappa* values covering [0,1].
std::vector<HistBin> histogram_bins(const ScreeningTable& table,
                                    double bin_width,
                                    TailDir which = TailDir::greater);

}  // namespace sensval
