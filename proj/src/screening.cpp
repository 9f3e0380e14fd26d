#include "sensval/screening.hpp"

#include "sensval/numerics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace sensval {

namespace {

const double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim whitespace and stray carriage returns
    size_t b = field.find_first_not_of(" \t\r");
    size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& s, long line_no) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": bad number '" + s +
                    "'");
  }
}

bool blank_line(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

OutcomeMatrix parse_wide(std::istream& in) {
  OutcomeMatrix m;
  std::string line;
  long line_no = 0;
  long width = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_line(line)) continue;
    auto f = split_csv_line(line);
    if (line_no == 1) {
      if (f.empty() || f[0] != "outcome") {
        throw DataError("line 1: wide header must start with 'outcome'");
      }
      width = static_cast<long>(f.size()) - 1;
      if (width < 1) throw DataError("line 1: wide header names no pairs");
      continue;
    }
    if (static_cast<long>(f.size()) != width + 1) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(width + 1) + " fields, got " +
                      std::to_string(f.size()));
    }
    m.outcome_ids.push_back(f[0]);
    std::vector<double> row(width);
    for (long j = 0; j < width; ++j) {
      row[j] = f[j + 1].empty() ? kMissing : parse_number(f[j + 1], line_no);
    }
    m.rows.push_back(std::move(row));
  }
  m.n_pairs = width < 0 ? 0 : width;
  m.validate();
  return m;
}

OutcomeMatrix parse_long(std::istream& in) {
  std::string line;
  long line_no = 0;
  std::vector<std::string> outcome_order, pair_order;
  std::map<std::string, long> outcome_idx, pair_idx;
  std::vector<std::tuple<long, long, double>> cells;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_line(line)) continue;
    auto f = split_csv_line(line);
    if (line_no == 1) {
      if (f.size() != 3 || f[0] != "outcome" || f[1] != "pair" || f[2] != "y") {
        throw DataError("line 1: long header must be outcome,pair,y");
      }
      continue;
    }
    if (f.size() != 3) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected outcome,pair,y");
    }
    if (!outcome_idx.count(f[0])) {
      outcome_idx[f[0]] = static_cast<long>(outcome_order.size());
      outcome_order.push_back(f[0]);
    }
    if (!pair_idx.count(f[1])) {
      pair_idx[f[1]] = static_cast<long>(pair_order.size());
      pair_order.push_back(f[1]);
    }
    cells.emplace_back(outcome_idx[f[0]], pair_idx[f[1]],
                       parse_number(f[2], line_no));
  }
  OutcomeMatrix m;
  m.outcome_ids = outcome_order;
  m.n_pairs = static_cast<long>(pair_order.size());
  m.rows.assign(outcome_order.size(),
                std::vector<double>(m.n_pairs, kMissing));
  for (auto& [oi, pi, y] : cells) {
    if (!std::isnan(m.rows[oi][pi])) {
      throw DataError("duplicate cell for outcome '" + outcome_order[oi] +
                      "', pair '" + pair_order[pi] + "'");
    }
    m.rows[oi][pi] = y;
  }
  m.validate();
  return m;
}

OutcomeMatrix parse_raw(std::istream& in) {
  std::string line;
  long line_no = 0;
  std::vector<std::string> outcome_order, pair_order;
  std::map<std::string, long> outcome_idx, pair_idx;
  // (outcome, pair) -> records
  std::map<std::pair<long, long>, std::vector<std::pair<int, double>>> units;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_line(line)) continue;
    auto f = split_csv_line(line);
    if (line_no == 1) {
      if (f.size() != 4 || f[0] != "outcome" || f[1] != "pair" || f[2] != "z" ||
          f[3] != "r") {
        throw DataError("line 1: raw header must be outcome,pair,z,r");
      }
      continue;
    }
    if (f.size() != 4) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected outcome,pair,z,r");
    }
    double zv = parse_number(f[2], line_no);
    if (zv != 0.0 && zv != 1.0) {
      throw DataError("line " + std::to_string(line_no) + ": z must be 0 or 1");
    }
    if (!outcome_idx.count(f[0])) {
      outcome_idx[f[0]] = static_cast<long>(outcome_order.size());
      outcome_order.push_back(f[0]);
    }
    if (!pair_idx.count(f[1])) {
      pair_idx[f[1]] = static_cast<long>(pair_order.size());
      pair_order.push_back(f[1]);
    }
    units[{outcome_idx[f[0]], pair_idx[f[1]]}].emplace_back(
        static_cast<int>(zv), parse_number(f[3], line_no));
  }
  OutcomeMatrix m;
  m.outcome_ids = outcome_order;
  m.n_pairs = static_cast<long>(pair_order.size());
  m.rows.assign(outcome_order.size(),
                std::vector<double>(m.n_pairs, kMissing));
  for (auto& [key, us] : units) {
    auto [oi, pi] = key;
    if (us.size() != 2 || us[0].first + us[1].first != 1) {
      throw DataError("outcome '" + outcome_order[oi] + "', pair '" +
                      pair_order[pi] +
                      "': needs exactly one treated and one control unit");
    }
    double treated = us[0].first == 1 ? us[0].second : us[1].second;
    double control = us[0].first == 1 ? us[1].second : us[0].second;
    m.rows[oi][pi] = treated - control;
  }
  m.validate();
  return m;
}

}  // namespace

void OutcomeMatrix::validate() const {
  if (outcome_ids.empty()) throw DataError("matrix has no outcomes");
  if (outcome_ids.size() != rows.size()) {
    throw DataError("matrix ids and rows out of sync");
  }
  std::map<std::string, int> seen;
  for (const auto& id : outcome_ids) {
    if (++seen[id] > 1) throw DataError("duplicate outcome id '" + id + "'");
  }
  for (const auto& row : rows) {
    if (static_cast<long>(row.size()) != n_pairs) {
      throw DataError("ragged matrix row");
    }
  }
}

MatrixFormat parse_format(const std::string& text) {
  if (text == "wide") return MatrixFormat::wide_csv;
  if (text == "long") return MatrixFormat::long_csv;
  if (text == "raw") return MatrixFormat::raw_csv;
  throw std::invalid_argument("format: expected wide|long|raw");
}

OutcomeMatrix parse_matrix(std::istream& in, MatrixFormat format) {
  switch (format) {
    case MatrixFormat::wide_csv:
      return parse_wide(in);
    case MatrixFormat::long_csv:
      return parse_long(in);
    case MatrixFormat::raw_csv:
      return parse_raw(in);
  }
  throw std::logic_error("parse_matrix: bad format");
}

OutcomeMatrix load_matrix(const std::string& path, MatrixFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_matrix(in, format);
}

namespace {

OutcomeResult analyze_outcome(const std::string& id,
                              const std::vector<double>& row,
                              const ScoreSpec& spec, double alpha, TailDir tail,
                              MethodSpec method) {
  OutcomeResult res;
  res.id = id;

  PairDiffs d;
  for (double v : row) {
    if (!std::isnan(v)) d.y.push_back(v);
  }
  if (d.y.empty()) {
    res.flags = "insufficient_pairs";
    return res;
  }
  long nonzero = d.nonzero_count();
  res.effective_I = nonzero;
  if (nonzero < 5) {
    res.flags = "insufficient_pairs";
    return res;
  }

  ScoreVector sv = score_vector(spec, d);
  res.T = statistic(sv, d);

  auto one_sided = [&](double t, double level) {
    if (method.kind == MethodSpec::Kind::normal_approx) {
      return kappa_star_closed(sv, t, level);
    }
    return kappa_star_search(sv, t, level, method, 1e-4, 1);
  };

  SensResult greater = one_sided(res.T, alpha);
  SensResult less = one_sided(1.0 - res.T, alpha);
  SensResult g2 = one_sided(res.T, 0.5 * alpha);
  SensResult l2 = one_sided(1.0 - res.T, 0.5 * alpha);
  res.kappa_greater = greater.kappa_star;
  res.kappa_less = less.kappa_star;
  res.kappa_two_sided = std::max(g2.kappa_star, l2.kappa_star);

  double chosen = tail == TailDir::greater ? res.kappa_greater
                  : tail == TailDir::less  ? res.kappa_less
                                           : res.kappa_two_sided;
  res.gamma_trunc = std::max(chosen / (1.0 - chosen), 1.0);

  bool degen = tail == TailDir::greater ? greater.degenerate
               : tail == TailDir::less  ? less.degenerate
                                        : (g2.degenerate && l2.degenerate);
  if (degen) res.flags = "degenerate";
  return res;
}

}  // namespace

ScreeningTable screen(const OutcomeMatrix& m, const ScoreSpec& spec,
                      double alpha, TailDir tail, const MethodSpec& method,
                      int threads) {
  m.validate();
  spec.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("screen: alpha must be in (0,1)");
  }

  const long n = static_cast<long>(m.rows.size());
  ScreeningTable table;
  table.rows.resize(n);
  table.spec = spec;
  table.alpha = alpha;
  table.tail = tail;
  table.method = method;

  if (threads == 1) {
    for (long j = 0; j < n; ++j) {
      MethodSpec mj = method;
      mj.stream = static_cast<std::uint64_t>(j);
      table.rows[j] = analyze_outcome(m.outcome_ids[j], m.rows[j], spec, alpha,
                                      tail, mj);
    }
  } else {
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(nt)
    for (long j = 0; j < n; ++j) {
      MethodSpec mj = method;
      mj.stream = static_cast<std::uint64_t>(j);
      table.rows[j] = analyze_outcome(m.outcome_ids[j], m.rows[j], spec, alpha,
                                      tail, mj);
    }
  }

  // rank analyzed outcomes by the requested tail's kappa*, ties by id
  std::vector<long> order;
  for (long j = 0; j < n; ++j) {
    if (table.rows[j].analyzed()) order.push_back(j);
  }
  auto key = [&](long j) -> double {
    const OutcomeResult& r = table.rows[j];
    return tail == TailDir::greater ? r.kappa_greater
           : tail == TailDir::less  ? r.kappa_less
                                    : r.kappa_two_sided;
  };
  std::sort(order.begin(), order.end(), [&](long a, long b) {
    if (key(a) != key(b)) return key(a) > key(b);
    return table.rows[a].id < table.rows[b].id;
  });
  for (size_t pos = 0; pos < order.size(); ++pos) {
    table.rows[order[pos]].rank = static_cast<int>(pos + 1);
  }

  // null reference at the median effective I
  std::vector<long> eff;
  for (long j : order) eff.push_back(table.rows[j].effective_I);
  std::sort(eff.begin(), eff.end());
  table.null_ref.alpha = alpha;
  if (!eff.empty()) {
    table.null_ref.I_ref = eff[(eff.size() - 1) / 2];
    LawPoint p = kappa_law_finite(null_law(spec), alpha,
                                  static_cast<double>(table.null_ref.I_ref));
    table.null_ref.center = p.center;
    table.null_ref.sd = p.sd;
  }
  return table;
}

namespace {

std::vector<double> kappa_column(const ScreeningTable& table, TailDir which) {
  std::vector<double> ks;
  for (const auto& r : table.rows) {
    if (!r.analyzed()) continue;
    ks.push_back(which == TailDir::greater ? r.kappa_greater
                 : which == TailDir::less  ? r.kappa_less
                                           : r.kappa_two_sided);
  }
  return ks;
}

}  // namespace

std::vector<std::pair<double, double>> qq_data(const ScreeningTable& table,
                                               TailDir which) {
  std::vector<double> ks = kappa_column(table, which);
  if (ks.size() < 2) {
    throw std::invalid_argument("qq_data: need at least 2 analyzed outcomes");
  }
  std::sort(ks.begin(), ks.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(ks.size());
  const double n = static_cast<double>(ks.size());
  for (size_t i = 0; i < ks.size(); ++i) {
    out.emplace_back(norm_quantile((i + 0.5) / n), ks[i]);
  }
  return out;
}

std::vector<HistBin> histogram_bins(const ScreeningTable& table,
                                    double bin_width, TailDir which) {
  if (!(bin_width > 0.0)) {
    throw std::invalid_argument("histogram_bins: bin_width must be positive");
  }
  std::vector<double> ks = kappa_column(table, which);
  const long nbins = static_cast<long>(std::ceil(1.0 / bin_width - 1e-12));
  std::vector<HistBin> bins(nbins);
  for (long k = 0; k < nbins; ++k) {
    bins[k].lo = k * bin_width;
    bins[k].hi = std::min(1.0, (k + 1) * bin_width);
  }
  for (double v : ks) {
    long k = std::min<long>(static_cast<long>(v / bin_width), nbins - 1);
    bins[k].count += 1;
  }
  return bins;
}

}  // namespace sensval
