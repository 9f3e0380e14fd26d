// sensval: sensitivity values for pair-matched observational studies.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sensval/asymptotics.hpp"
#include "sensval/design.hpp"
#include "sensval/numerics.hpp"
#include "sensval/screening.hpp"
#include "sensval/senscore.hpp"
#include "sensval/sim.hpp"

using json = nlohmann::json;
using namespace sensval;

namespace {

struct CommonOpts {
  std::string out;
  std::string output = "pretty";  // csv | json | pretty
  std::uint64_t seed = 0;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--out", c.out, "write results to this file instead of stdout");
  cmd->add_option("--output", c.output, "output format: csv|json|pretty")
      ->check(CLI::IsMember({"csv", "json", "pretty"}));
  cmd->add_option("--seed", c.seed, "seed for any monte-carlo path (default 0)");
  cmd->add_option("--threads", c.threads,
                  "max worker threads (0 = all, 1 = serial reference)");
}

void emit(const CommonOpts& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw DataError("cannot write '" + c.out + "'");
  f << text;
}

std::string round3(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string full(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Single-outcome data: plain number-per-line/column file, or any matrix
// format that contains exactly one outcome.
PairDiffs load_pairs(const std::string& path, const std::string& format) {
  if (format == "plain") {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    PairDiffs d;
    std::string tok;
    while (in >> tok) {
      if (tok == "y") continue;  // tolerate a single-column header
      try {
        d.y.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw DataError("bad number '" + tok + "' in '" + path + "'");
      }
    }
    d.validate();
    return d;
  }
  OutcomeMatrix m = load_matrix(path, parse_format(format));
  if (m.rows.size() != 1) {
    throw DataError("'" + path + "' holds " + std::to_string(m.rows.size()) +
                    " outcomes; this command needs exactly one");
  }
  PairDiffs d;
  for (double v : m.rows[0]) {
    if (!std::isnan(v)) d.y.push_back(v);
  }
  d.validate();
  return d;
}

json sens_result_json(const SensResult& r) {
  return json{{"statistic", r.statistic},
              {"kappa_star", r.kappa_star},
              {"gamma_star", std::isinf(r.gamma_star) ? 1e308 : r.gamma_star},
              {"gamma_star_trunc",
               std::isinf(r.gamma_star_trunc) ? 1e308 : r.gamma_star_trunc},
              {"alpha", r.alpha},
              {"tail", to_string(r.tail)},
              {"method", r.method.to_string()},
              {"seed", r.method.seed},
              {"effective_I", r.effective_I},
              {"degenerate", r.degenerate}};
}

int cmd_value(const CommonOpts& c, const std::string& data,
              const std::string& format, const std::string& score,
              double alpha, const std::string& tail_s,
              const std::string& method_s) {
  PairDiffs d = load_pairs(data, format);
  ScoreSpec spec = ScoreSpec::parse(score);
  MethodSpec method = MethodSpec::parse(method_s);
  method.seed = c.seed;
  TailDir tail = parse_tail(tail_s);
  ScoreVector sv = score_vector(spec, d);
  double t = statistic(sv, d);

  SensResult res;
  if (tail == TailDir::two_sided) {
    res = two_sided(sv, d, alpha, method, c.threads);
  } else {
    double stat = tail == TailDir::greater ? t : 1.0 - t;
    res = method.kind == MethodSpec::Kind::normal_approx
              ? kappa_star_closed(sv, stat, alpha)
              : kappa_star_search(sv, stat, alpha, method, 1e-4, c.threads);
    res.tail = tail;
  }

  if (c.output == "pretty") {
    std::ostringstream os;
    os << "statistic T      " << round3(res.statistic) << "\n"
       << "kappa*           " << round3(res.kappa_star) << "\n"
       << "Gamma*           " << round3(res.gamma_star) << "\n"
       << "Gamma** (>=1)    " << round3(res.gamma_star_trunc) << "\n"
       << "alpha            " << round3(res.alpha) << "\n"
       << "tail             " << to_string(res.tail) << "\n"
       << "method           " << res.method.to_string() << " (seed "
       << res.method.seed << ")\n"
       << "effective pairs  " << res.effective_I << "\n";
    if (res.degenerate) os << "flag             degenerate\n";
    emit(c, os.str());
  } else {
    emit(c, sens_result_json(res).dump(2) + "\n");
  }
  return 0;
}

int cmd_table(const CommonOpts& c, const std::string& data,
              const std::string& format, const std::string& score,
              const std::vector<double>& gammas, const std::string& tail_s,
              const std::string& method_s) {
  PairDiffs d = load_pairs(data, format);
  ScoreSpec spec = ScoreSpec::parse(score);
  MethodSpec method = MethodSpec::parse(method_s);
  method.seed = c.seed;
  TailDir tail = parse_tail(tail_s);
  ScoreVector sv = score_vector(spec, d);
  std::vector<GammaBound> rows =
      sensitivity_table(sv, d, gammas, method, tail, c.threads);

  std::ostringstream os;
  if (c.output == "json") {
    json j = json::array();
    for (const auto& r : rows) {
      j.push_back({{"gamma", r.gamma},
                   {"p_upper", r.p_upper},
                   {"p_lower", r.p_lower}});
    }
    os << json{{"tail", to_string(tail)},
               {"method", method.to_string()},
               {"seed", method.seed},
               {"rows", j}}
              .dump(2)
       << "\n";
  } else {
    bool pretty = c.output == "pretty";
    os << "gamma,p_upper,p_lower\n";
    for (const auto& r : rows) {
      if (pretty) {
        os << round3(r.gamma) << "," << round3(r.p_upper) << ","
           << round3(r.p_lower) << "\n";
      } else {
        os << full(r.gamma) << "," << full(r.p_upper) << "," << full(r.p_lower)
           << "\n";
      }
    }
  }
  emit(c, os.str());
  return 0;
}

int cmd_power(const CommonOpts& c, const std::string& alt_s,
              const std::string& score, long I, double gamma, double alpha,
              long B) {
  AltModel alt = AltModel::parse(alt_s);
  ScoreSpec spec = ScoreSpec::parse(score);
  PowerCheckResult r =
      power_check(alt, spec, I, gamma, alpha, B, Rng(c.seed, 0), c.threads);
  if (c.output == "json") {
    emit(c, json{{"simulated", r.simulated},
                 {"asymptotic", r.eq_asymptotic},
                 {"finite_sample", r.eq_finite},
                 {"no_constant", r.no_constant},
                 {"mu_F", r.mu_F},
                 {"sigma_F_sq", r.sigma_F_sq},
                 {"reps", B},
                 {"seed", c.seed}}
                .dump(2) +
                "\n");
  } else {
    std::ostringstream os;
    os << "simulated power         " << round3(r.simulated) << "  (" << B
       << " reps, seed " << c.seed << ")\n"
       << "asymptotic formula      " << round3(r.eq_asymptotic) << "\n"
       << "finite-sample formula   " << round3(r.eq_finite) << "\n"
       << "without constant term   " << round3(r.no_constant) << "\n";
    emit(c, os.str());
  }
  return 0;
}

int cmd_design_sensitivity(const CommonOpts& c, const std::string& alt_s,
                           const std::string& score) {
  AltModel alt = AltModel::parse(alt_s);
  ScoreSpec spec = ScoreSpec::parse(score);
  double mu = mu_f(spec, alt);
  double tilde = mu / (1.0 - mu);
  if (c.output == "json") {
    emit(c, json{{"mu_F", mu}, {"design_sensitivity", tilde}}.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "mu_F                " << round3(mu) << "\n"
       << "design sensitivity  " << round3(tilde) << "\n";
    emit(c, os.str());
  }
  return 0;
}

int cmd_choose_score(const CommonOpts& c, const std::string& alt_s,
                     const std::vector<std::string>& scores, double I_in,
                     bool I_inf, double alpha, const std::string& summary_s) {
  AltModel alt = AltModel::parse(alt_s);
  std::vector<ScoreSpec> candidates;
  for (const auto& s : scores) candidates.push_back(ScoreSpec::parse(s));
  Summary summary;
  if (summary_s == "mean") {
    summary.kind = SummaryKind::mean;
  } else if (summary_s == "median") {
    summary.kind = SummaryKind::median;
  } else if (summary_s.rfind("q:", 0) == 0) {
    summary.kind = SummaryKind::quantile;
    summary.p = std::stod(summary_s.substr(2));
  } else {
    throw std::invalid_argument("summary: expected mean|median|q:<p>");
  }
  if (!I_inf && !(I_in >= 1)) {
    throw std::invalid_argument("choose-score: pass --I <n> or --inf");
  }
  double I = I_inf ? std::numeric_limits<double>::infinity() : I_in;
  std::vector<ScoreChoice> out = choose_score(candidates, alt, I, alpha,
                                              summary, Rng(c.seed, 0),
                                              c.threads);
  std::ostringstream os;
  if (c.output == "json") {
    json j = json::array();
    for (const auto& ch : out) {
      j.push_back({{"score", ch.spec.to_string()},
                   {"mu_F", ch.mu_F},
                   {"sigma_q_sq", ch.sigma_q_sq},
                   {"center", ch.center},
                   {"sd", ch.sd},
                   {"summary", ch.summary},
                   {"rank", ch.rank}});
    }
    os << json{{"seed", c.seed}, {"candidates", j}}.dump(2) << "\n";
  } else {
    bool pretty = c.output == "pretty";
    os << "score,mu_F,sigma_q_sq,center,sd,summary,rank\n";
    for (const auto& ch : out) {
      auto f = [&](double v) { return pretty ? round3(v) : full(v); };
      os << ch.spec.to_string() << "," << f(ch.mu_F) << "," << f(ch.sigma_q_sq)
         << "," << f(ch.center) << "," << f(ch.sd) << "," << f(ch.summary)
         << "," << ch.rank << "\n";
    }
  }
  emit(c, os.str());
  return 0;
}

int cmd_samplesize(const CommonOpts& c, double mu1, double mu2, double pi1,
                   double alpha, double sigma_q_sq, const std::string& score) {
  SubgroupSpec sub;
  sub.mu_F1 = mu1;
  sub.mu_F2 = mu2;
  sub.pi1 = pi1;
  sub.alpha = alpha;
  sub.sigma_q_sq =
      score.empty() ? sigma_q_sq : psi_norms(ScoreSpec::parse(score)).sigma_q_sq_limit;
  CriticalSize cs = critical_sample_size(sub);
  if (c.output == "json") {
    emit(c, json{{"I_star", cs.I_star},
                 {"eta_star", cs.eta_star},
                 {"pooled_mu", sub.pooled_mu()}}
                .dump(2) +
                "\n");
  } else {
    std::ostringstream os;
    os << "critical sample size I*  " << round3(cs.I_star) << "\n"
       << "eta*                     " << round3(cs.eta_star) << "\n";
    emit(c, os.str());
  }
  return 0;
}

int cmd_split_design(const CommonOpts& c, double zeta, double kappa_tilde,
                     double alpha_tilde, double alpha_fp, double alpha_fn,
                     double mu_f_v, double sigma_f_sq, double sigma_q_sq,
                     double I) {
  SplitSpec split;
  split.zeta = zeta;
  split.kappa_tilde = kappa_tilde;
  split.alpha_tilde = alpha_tilde;
  split.alpha_FP = alpha_fp;
  split.alpha_FN = alpha_fn;
  split.law.mu_F = mu_f_v;
  split.law.sigma_F_sq = sigma_f_sq;
  split.law.sigma_q_sq = sigma_q_sq;
  split.null_law.mu_F = 0.5;
  split.null_law.sigma_q_sq = sigma_q_sq;
  split.null_law.sigma_F_sq = sigma_q_sq / 4.0;
  SplitRates rates = split_rates(split, I);
  SplitMinimum min = split_minimum_sample(split);
  if (c.output == "json") {
    emit(c, json{{"FPR", rates.FPR},
                 {"FNR", rates.FNR},
                 {"required_screening_sample", min.required_screening_sample},
                 {"optimal_alpha_tilde", min.optimal_alpha_tilde},
                 {"optimal_kappa_tilde", min.optimal_kappa_tilde}}
                .dump(2) +
                "\n");
  } else {
    std::ostringstream os;
    os << "FPR at I                      " << round3(rates.FPR) << "\n"
       << "FNR at I                      " << round3(rates.FNR) << "\n"
       << "min screening sample (1-z)I   "
       << round3(min.required_screening_sample) << "\n"
       << "optimal alpha~                " << round3(min.optimal_alpha_tilde)
       << "\n"
       << "optimal kappa~ (boundary)     " << round3(min.optimal_kappa_tilde)
       << "\n";
    emit(c, os.str());
  }
  return 0;
}

std::string screening_csv(const ScreeningTable& t, bool pretty) {
  std::ostringstream os;
  os << "outcome,effective_I,T,kappa_greater,kappa_less,kappa_two_sided,gamma_"
        "trunc,rank,flags\n";
  for (const auto& r : t.rows) {
    auto f = [&](double v) { return pretty ? round3(v) : full(v); };
    os << r.id << "," << r.effective_I << "," << f(r.T) << ","
       << f(r.kappa_greater) << "," << f(r.kappa_less) << ","
       << f(r.kappa_two_sided) << "," << f(r.gamma_trunc) << "," << r.rank
       << "," << r.flags << "\n";
  }
  return os.str();
}

json screening_json(const ScreeningTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"outcome", r.id},
                    {"effective_I", r.effective_I},
                    {"T", r.T},
                    {"kappa_greater", r.kappa_greater},
                    {"kappa_less", r.kappa_less},
                    {"kappa_two_sided", r.kappa_two_sided},
                    {"gamma_trunc", r.gamma_trunc},
                    {"rank", r.rank},
                    {"flags", r.flags}});
  }
  return json{{"alpha", t.alpha},
              {"tail", to_string(t.tail)},
              {"score", t.spec.to_string()},
              {"method", t.method.to_string()},
              {"seed", t.method.seed},
              {"null_reference",
               {{"center", t.null_ref.center},
                {"sd", t.null_ref.sd},
                {"alpha", t.null_ref.alpha},
                {"I_ref", t.null_ref.I_ref}}},
              {"outcomes", rows}};
}

int cmd_screen(const CommonOpts& c, const std::string& data,
               const std::string& format, const std::string& score,
               double alpha, const std::string& tail_s,
               const std::string& method_s) {
  OutcomeMatrix m = load_matrix(data, parse_format(format));
  ScoreSpec spec = ScoreSpec::parse(score);
  MethodSpec method = MethodSpec::parse(method_s);
  method.seed = c.seed;
  ScreeningTable t =
      screen(m, spec, alpha, parse_tail(tail_s), method, c.threads);
  if (c.output == "json") {
    emit(c, screening_json(t).dump(2) + "\n");
  } else {
    emit(c, screening_csv(t, c.output == "pretty"));
  }
  return 0;
}

int cmd_qq(const CommonOpts& c, const std::string& data,
           const std::string& format, const std::string& score, double alpha,
           const std::string& tail_s, const std::string& method_s) {
  OutcomeMatrix m = load_matrix(data, parse_format(format));
  ScoreSpec spec = ScoreSpec::parse(score);
  MethodSpec method = MethodSpec::parse(method_s);
  method.seed = c.seed;
  TailDir tail = parse_tail(tail_s);
  ScreeningTable t = screen(m, spec, alpha, tail, method, c.threads);
  auto qq = qq_data(t, tail == TailDir::two_sided ? TailDir::greater : tail);
  if (c.output == "json") {
    json pts = json::array();
    for (auto& [tq, k] : qq) pts.push_back({{"theoretical", tq}, {"kappa", k}});
    emit(c, json{{"null_reference",
                  {{"center", t.null_ref.center},
                   {"sd", t.null_ref.sd},
                   {"I_ref", t.null_ref.I_ref}}},
                 {"points", pts}}
                .dump(2) +
                "\n");
  } else {
    std::ostringstream os;
    os << "# null_center = " << full(t.null_ref.center)
       << ", null_sd = " << full(t.null_ref.sd)
       << ", I_ref = " << t.null_ref.I_ref << "\n";
    os << "theoretical_quantile,observed_kappa\n";
    for (auto& [tq, k] : qq) os << full(tq) << "," << full(k) << "\n";
    emit(c, os.str());
  }
  return 0;
}

int cmd_simulate(const CommonOpts& c, const std::string& job_name, long reps,
                 long B, double alpha) {
  SimJob job;
  job.name = job_name;
  job.reps = reps;
  job.B = B;
  job.alpha = alpha;
  job.seed = c.seed;
  SimTable t = run_job(job, Rng(c.seed, 0), c.threads);
  if (c.output == "json") {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json r = json::object();
      for (size_t i = 0; i < t.columns.size(); ++i) r[t.columns[i]] = row[i];
      rows.push_back(r);
    }
    emit(c, json{{"metadata", t.metadata}, {"rows", rows}}.dump(2) + "\n");
  } else {
    emit(c, t.to_csv());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sensval: sensitivity values, power, and study design for pair-matched "
      "observational studies"};
  app.require_subcommand(1);

  struct {
    CommonOpts c;
    std::string data, format = "plain", score = "wilcoxon", tail = "greater",
                method = "approx";
    double alpha = 0.05;
  } v;
  auto* value = app.add_subcommand("value", "sensitivity value of one outcome");
  value->add_option("--data", v.data, "pair differences file")->required();
  value->add_option("--format", v.format, "plain|wide|long|raw");
  value->add_option("--score", v.score, "score family");
  value->add_option("--alpha", v.alpha, "significance level");
  value->add_option("--tail", v.tail, "greater|less|two-sided");
  value->add_option("--method", v.method, "approx|mc:<B>|exact");
  add_common(value, v.c);

  struct {
    CommonOpts c;
    std::string data, format = "plain", score = "wilcoxon", tail = "greater",
                method = "approx";
    std::vector<double> gammas;
  } tb;
  auto* table = app.add_subcommand("table", "sensitivity analysis table");
  table->add_option("--data", tb.data)->required();
  table->add_option("--format", tb.format, "plain|wide|long|raw");
  table->add_option("--score", tb.score);
  table->add_option("--gammas", tb.gammas, "bias levels, e.g. 1,2,3,5,7,10")
      ->required()
      ->delimiter(',');
  table->add_option("--tail", tb.tail);
  table->add_option("--method", tb.method);
  add_common(table, tb.c);

  struct {
    CommonOpts c;
    std::string alt, score = "wilcoxon";
    long I = 0, B = 10000;
    double gamma = 2.0, alpha = 0.05;
  } pw;
  auto* power = app.add_subcommand("power", "power of a sensitivity analysis");
  power->add_option("--alt", pw.alt, "alternative, e.g. normal:0.5,1")
      ->required();
  power->add_option("--score", pw.score);
  power->add_option("--I", pw.I, "number of pairs")->required();
  power->add_option("--gamma", pw.gamma, "sensitivity level")->required();
  power->add_option("--alpha", pw.alpha);
  power->add_option("--B", pw.B, "simulation replications");
  add_common(power, pw.c);

  struct {
    CommonOpts c;
    std::string alt, score = "wilcoxon";
  } ds;
  auto* dsn = app.add_subcommand("design-sensitivity",
                                 "large-sample limit of the sensitivity value");
  dsn->add_option("--alt", ds.alt)->required();
  dsn->add_option("--score", ds.score);
  add_common(dsn, ds.c);

  struct {
    CommonOpts c;
    std::string alt, summary = "mean";
    std::vector<std::string> scores;
    double I = 0;
    bool inf = false;
    double alpha = 0.05;
  } ch;
  auto* choose =
      app.add_subcommand("choose-score", "rank candidate score statistics");
  choose->add_option("--alt", ch.alt)->required();
  choose->add_option("--score", ch.scores, "candidate (repeatable)")
      ->required();
  choose->add_option("--I", ch.I, "sample size (omit with --inf)");
  choose->add_flag("--inf", ch.inf, "design-sensitivity limit");
  choose->add_option("--alpha", ch.alpha);
  choose->add_option("--summary", ch.summary, "mean|median|q:<p>");
  add_common(choose, ch.c);

  struct {
    CommonOpts c;
    double mu1 = 0, mu2 = 0, pi1 = 0.5, alpha = 0.05, sq2 = 4.0 / 3.0;
    std::string score;
  } ss;
  auto* size = app.add_subcommand("samplesize",
                                  "critical sample size for subgroup choice");
  size->add_option("--mu1", ss.mu1, "subgroup-1 limit mu_F1")->required();
  size->add_option("--mu2", ss.mu2, "subgroup-2 limit mu_F2")->required();
  size->add_option("--pi1", ss.pi1, "subgroup-1 proportion");
  size->add_option("--alpha", ss.alpha);
  size->add_option("--sigma-q-sq", ss.sq2, "score dispersion sigma_q^2");
  size->add_option("--score", ss.score, "derive sigma_q^2 from a score family");
  add_common(size, ss.c);

  struct {
    CommonOpts c;
    double zeta = 0.5, kt = 0.5, at = 0.05, afp = 0.05, afn = 0.05;
    double mu = 0, sf2 = 0, sq2 = 4.0 / 3.0, I = 0;
  } sp;
  auto* split =
      app.add_subcommand("split-design", "sample-splitting screening design");
  split->add_option("--zeta", sp.zeta, "held-out fraction");
  split->add_option("--kappa-tilde", sp.kt, "screening cutoff");
  split->add_option("--alpha-tilde", sp.at, "screening level");
  split->add_option("--alpha-fp", sp.afp, "target false positive rate");
  split->add_option("--alpha-fn", sp.afn, "target false negative rate");
  split->add_option("--mu-f", sp.mu, "alternative mu_F")->required();
  split->add_option("--sigma-f-sq", sp.sf2, "alternative sigma_F^2")->required();
  split->add_option("--sigma-q-sq", sp.sq2);
  split->add_option("--I", sp.I, "total sample size")->required();
  add_common(split, sp.c);

  struct {
    CommonOpts c;
    std::string data, format = "wide", score = "wilcoxon", tail = "two-sided",
                method = "approx";
    double alpha = 0.05;
  } sc;
  auto* scr = app.add_subcommand("screen", "multi-outcome screening table");
  scr->add_option("--data", sc.data)->required();
  scr->add_option("--format", sc.format, "wide|long|raw");
  scr->add_option("--score", sc.score);
  scr->add_option("--alpha", sc.alpha);
  scr->add_option("--tail", sc.tail);
  scr->add_option("--method", sc.method);
  add_common(scr, sc.c);

  struct {
    CommonOpts c;
    std::string data, format = "wide", score = "wilcoxon", tail = "greater",
                method = "approx";
    double alpha = 0.05;
  } qq;
  auto* qqc = app.add_subcommand("qq", "Q-Q data of screening kappa* values");
  qqc->add_option("--data", qq.data)->required();
  qqc->add_option("--format", qq.format, "wide|long|raw");
  qqc->add_option("--score", qq.score);
  qqc->add_option("--alpha", qq.alpha);
  qqc->add_option("--tail", qq.tail);
  qqc->add_option("--method", qq.method);
  add_common(qqc, qq.c);

  struct {
    CommonOpts c;
    std::string job;
    long reps = -1, B = -1;
    double alpha = 0.05;
  } sm;
  auto* sim = app.add_subcommand("simulate", "run a named simulation job");
  sim->add_option("job", sm.job,
                  "table2|table3|table4|fig1|fig2|appB|beta_table")
      ->required();
  sim->add_option("--reps", sm.reps, "replication count override");
  sim->add_option("--B", sm.B, "monte-carlo draws override");
  sim->add_option("--alpha", sm.alpha);
  add_common(sim, sm.c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*value) {
      return cmd_value(v.c, v.data, v.format, v.score, v.alpha, v.tail,
                       v.method);
    }
    if (*table) {
      return cmd_table(tb.c, tb.data, tb.format, tb.score, tb.gammas, tb.tail,
                       tb.method);
    }
    if (*power) {
      return cmd_power(pw.c, pw.alt, pw.score, pw.I, pw.gamma, pw.alpha, pw.B);
    }
    if (*dsn) return cmd_design_sensitivity(ds.c, ds.alt, ds.score);
    if (*choose) {
      return cmd_choose_score(ch.c, ch.alt, ch.scores, ch.I, ch.inf, ch.alpha,
                              ch.summary);
    }
    if (*size) {
      return cmd_samplesize(ss.c, ss.mu1, ss.mu2, ss.pi1, ss.alpha, ss.sq2,
                            ss.score);
    }
    if (*split) {
      return cmd_split_design(sp.c, sp.zeta, sp.kt, sp.at, sp.afp, sp.afn,
                              sp.mu, sp.sf2, sp.sq2, sp.I);
    }
    if (*scr) {
      return cmd_screen(sc.c, sc.data, sc.format, sc.score, sc.alpha, sc.tail,
                        sc.method);
    }
    if (*qqc) {
      return cmd_qq(qq.c, qq.data, qq.format, qq.score, qq.alpha, qq.tail,
                    qq.method);
    }
    if (*sim) return cmd_simulate(sm.c, sm.job, sm.reps, sm.B, sm.alpha);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
