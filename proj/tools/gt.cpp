// Command line front end: bound evaluation, Monte Carlo simulation,
// parameter sweeps, constant calibration, and code decoding experiments.
//
// All output is deterministic for a fixed command line (no timestamps, no
// machine identifiers), so reruns are byte-identical and diffable.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gt/codes.hpp"
#include "gt/sim.hpp"
#include "gt/theory.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Relative --out paths land in $GT_OUTPUT_DIR when it is set.
std::string resolve_out(const std::string& out) {
  const char* dir = std::getenv("GT_OUTPUT_DIR");
  if (!dir || !*dir) return out;
  std::filesystem::path p(out);
  if (p.is_absolute()) return out;
  return (std::filesystem::path(dir) / p).string();
}

struct Sink {
  std::unique_ptr<std::ofstream> file;
  std::ostream* os = &std::cout;

  explicit Sink(const std::string& out) {
    if (out.empty()) return;
    std::string path = resolve_out(out);
    file = std::make_unique<std::ofstream>(path);
    if (!*file) throw std::runtime_error("cannot open output file: " + path);
    os = file.get();
  }
  std::ostream& stream() { return *os; }
};

struct ProblemOpts {
  uint32_t p = 1024;
  uint32_t k = 0;
  double theta = -1.0;
  double rho = 0.0;

  uint32_t resolve_k() const {
    if (k > 0) return k;
    if (theta > 0.0) return gt::k_from_theta(p, theta);
    throw std::invalid_argument("one of --k or --theta is required");
  }
};

void add_problem_opts(CLI::App* cmd, ProblemOpts& o) {
  cmd->add_option("--p", o.p, "population size")->check(CLI::PositiveNumber);
  auto* k = cmd->add_option("--k", o.k, "number of defectives");
  auto* th = cmd->add_option("--theta", o.theta, "sparsity exponent; k = round(p^theta)");
  k->excludes(th);
  th->excludes(k);
  cmd->add_option("--rho", o.rho, "probability a test outcome is flipped");
}

void add_config_opts(CLI::App* cmd, gt::StageConfig& cfg) {
  cmd->add_option("--epsilon", cfg.epsilon, "bin count exponent (B = k^(1+epsilon))");
  cmd->add_option("--alpha1", cfg.alpha1, "first-stage mistake budget fraction");
  cmd->add_option("--alpha2", cfg.alpha2, "recheck drop fraction");
  cmd->add_option("--eta", cfg.eta, "code length slack");
  cmd->add_option("--nprime-mult", cfg.nprime_mult, "multiplier on required code length");
  cmd->add_option("--c-ncomp", cfg.c_ncomp, "bin screen test constant");
  cmd->add_option("--c-ncomp-exact", cfg.c_ncomp_exact, "sweep test constant");
  cmd->add_option("--c-check", cfg.c_check, "recheck repetition constant");
  cmd->add_option("--c-tilde", cfg.c_tilde, "final vote repetition constant");
  cmd->add_option("--delta", cfg.delta, "threshold margin (negative = auto)");
  cmd->add_option("--nu", cfg.nu, "design density parameter");
  cmd->add_option("--screen-frac", cfg.screen_frac, "budget share of the bin screen");
  cmd->add_option("--code-frac", cfg.code_frac, "budget share of the bin decode");
}

std::string config_line(const gt::StageConfig& c) {
  std::string s = "# config";
  s += " epsilon=" + fmt6(c.epsilon);
  s += " alpha1=" + fmt6(c.alpha1);
  s += " alpha2=" + fmt6(c.alpha2);
  s += " eta=" + fmt6(c.eta);
  s += " nprime_mult=" + fmt6(c.nprime_mult);
  s += " c_ncomp=" + fmt6(c.c_ncomp);
  s += " c_ncomp_exact=" + fmt6(c.c_ncomp_exact);
  s += " c_check=" + fmt6(c.c_check);
  s += " c_tilde=" + fmt6(c.c_tilde);
  s += " delta=" + fmt6(c.delta);
  s += " nu=" + fmt6(c.nu);
  s += " screen_frac=" + fmt6(c.screen_frac);
  s += " code_frac=" + fmt6(c.code_frac);
  s += " total_budget=" + fmt6(c.total_budget);
  return s;
}

nlohmann::json config_json(const gt::StageConfig& c) {
  return {{"epsilon", c.epsilon},
          {"alpha1", c.alpha1},
          {"alpha2", c.alpha2},
          {"eta", c.eta},
          {"nprime_mult", c.nprime_mult},
          {"c_ncomp", c.c_ncomp},
          {"c_ncomp_exact", c.c_ncomp_exact},
          {"c_check", c.c_check},
          {"c_tilde", c.c_tilde},
          {"delta", c.delta},
          {"nu", c.nu},
          {"screen_frac", c.screen_frac},
          {"code_frac", c.code_frac},
          {"total_budget", c.total_budget}};
}

nlohmann::json plan_json(const gt::StagePlan& pl) {
  return {{"bins", pl.bins},
          {"n_screen", pl.n_screen},
          {"n_code", pl.n_code},
          {"n_sweep", pl.n_sweep},
          {"n_check", pl.n_check},
          {"n_vote", pl.n_vote},
          {"kmax_sweep", pl.kmax_sweep},
          {"delta", pl.delta}};
}

std::string plan_line(const gt::StagePlan& pl) {
  std::string s = "# plan";
  s += " bins=" + std::to_string(pl.bins);
  s += " n_screen=" + std::to_string(pl.n_screen);
  s += " n_code=" + std::to_string(pl.n_code);
  s += " n_sweep=" + std::to_string(pl.n_sweep);
  s += " n_check=" + std::to_string(pl.n_check);
  s += " n_vote=" + std::to_string(pl.n_vote);
  s += " kmax_sweep=" + std::to_string(pl.kmax_sweep);
  s += " delta=" + fmt6(pl.delta);
  return s;
}

nlohmann::json stats_json(const gt::ErrorStats& st) {
  nlohmann::json stages;
  for (int i = 0; i < gt::kNumStages; ++i) stages[gt::kStageNames[i]] = st.mean_stage_tests[i];
  return {{"trials", st.trials},
          {"failures", st.failures},
          {"pe", st.pe},
          {"pe_lo", st.pe_ci.lo},
          {"pe_hi", st.pe_ci.hi},
          {"mean_tests", st.mean_tests},
          {"mean_stage_tests", stages},
          {"mean_fp", st.mean_fp},
          {"mean_fn", st.mean_fn},
          {"max_fp", st.max_fp},
          {"max_fn", st.max_fn}};
}

// ---------------------------------------------------------------- bounds

struct BoundsOpts {
  ProblemOpts prob;
  std::vector<double> thetas;
  std::string format = "csv";
  std::string out;
};

int run_bounds(const BoundsOpts& o) {
  Sink sink(o.out);
  std::ostream& os = sink.stream();

  if (!o.thetas.empty()) {
    auto conv = gt::rate_curve(o.prob.rho, o.thetas, gt::BoundKind::Converse);
    auto multi = gt::rate_curve(o.prob.rho, o.thetas, gt::BoundKind::MultiStage);
    if (o.format == "json") {
      nlohmann::json rows = nlohmann::json::array();
      for (size_t i = 0; i < o.thetas.size(); ++i)
        rows.push_back({{"theta", o.thetas[i]},
                        {"converse_rate", conv[i].rate_bits_per_test},
                        {"multistage_rate", multi[i].rate_bits_per_test}});
      nlohmann::json j{{"tool", "gt bounds"},
                       {"version", kVersion},
                       {"rho", o.prob.rho},
                       {"curve", rows}};
      os << j.dump(2) << "\n";
    } else {
      os << "# gt bounds " << kVersion << "\n";
      os << "# rho=" << fmt6(o.prob.rho) << "\n";
      os << "theta,converse_rate,multistage_rate\n";
      for (size_t i = 0; i < o.thetas.size(); ++i)
        os << fmt6(o.thetas[i]) << "," << fmt6(conv[i].rate_bits_per_test) << ","
           << fmt6(multi[i].rate_bits_per_test) << "\n";
    }
    return 0;
  }

  uint32_t k = o.prob.resolve_k();
  double theta_eff =
      o.prob.theta > 0.0
          ? o.prob.theta
          : std::log(static_cast<double>(k)) / std::log(static_cast<double>(o.prob.p));
  gt::NoiseFunctionals nf = gt::noise_functionals(o.prob.rho);
  double conv = gt::converse_tests(o.prob.p, k, o.prob.rho);
  double multi = gt::multistage_tests(o.prob.p, k, o.prob.rho);
  double rate_conv = gt::rate_at(theta_eff, o.prob.rho, gt::BoundKind::Converse);
  double rate_multi = gt::rate_at(theta_eff, o.prob.rho, gt::BoundKind::MultiStage);

  if (o.format == "json") {
    nlohmann::json j{{"tool", "gt bounds"},
                     {"version", kVersion},
                     {"p", o.prob.p},
                     {"k", k},
                     {"rho", o.prob.rho},
                     {"theta_eff", theta_eff},
                     {"h2_bits", nf.h2_bits()},
                     {"capacity_bits", nf.capacity_bits()},
                     {"kl_flip_bits", nf.kl_flip_bits()},
                     {"converse_tests", conv},
                     {"multistage_tests", multi},
                     {"converse_rate", rate_conv},
                     {"multistage_rate", rate_multi}};
    os << j.dump(2) << "\n";
  } else {
    os << "# gt bounds " << kVersion << "\n";
    os << "# p=" << o.prob.p << " k=" << k << " rho=" << fmt6(o.prob.rho)
       << " theta_eff=" << fmt6(theta_eff) << "\n";
    os << "quantity,value\n";
    os << "h2_bits," << fmt6(nf.h2_bits()) << "\n";
    os << "capacity_bits," << fmt6(nf.capacity_bits()) << "\n";
    os << "kl_flip_bits," << fmt6(nf.kl_flip_bits()) << "\n";
    os << "converse_tests," << fmt6(conv) << "\n";
    os << "multistage_tests," << fmt6(multi) << "\n";
    os << "converse_rate," << fmt6(rate_conv) << "\n";
    os << "multistage_rate," << fmt6(rate_multi) << "\n";
  }
  return 0;
}

// -------------------------------------------------------------- simulate

struct SimulateOpts {
  ProblemOpts prob;
  gt::StageConfig cfg;
  uint32_t trials = 100;
  uint64_t seed = 1;
  bool fixed_defectives = false;
  double budget = 0.0;
  double budget_mult = 0.0;
  bool per_trial = false;
  bool trace = false;
  std::string format = "csv";
  std::string out;
};

int run_simulate(const SimulateOpts& o) {
  uint32_t k = o.prob.resolve_k();
  gt::StageConfig cfg = o.cfg;
  if (o.budget > 0.0) cfg.total_budget = o.budget;
  if (o.budget_mult > 0.0)
    cfg.total_budget = o.budget_mult * gt::multistage_tests(o.prob.p, k, o.prob.rho);

  gt::MonteCarloConfig mc;
  mc.trials = o.trials;
  mc.seed = o.seed;
  mc.resample_defectives = !o.fixed_defectives;
  gt::MonteCarloResult res = gt::monte_carlo(o.prob.p, k, o.prob.rho, cfg, mc);
  const gt::StagePlan& plan = res.reports.front().plan;

  Sink sink(o.out);
  std::ostream& os = sink.stream();

  if (o.format == "json") {
    nlohmann::json j{{"tool", "gt simulate"},
                     {"version", kVersion},
                     {"p", o.prob.p},
                     {"k", k},
                     {"rho", o.prob.rho},
                     {"trials", o.trials},
                     {"seed", o.seed},
                     {"resample_defectives", mc.resample_defectives},
                     {"config", config_json(cfg)},
                     {"plan", plan_json(plan)},
                     {"stats", stats_json(res.stats)}};
    if (o.per_trial) {
      nlohmann::json rows = nlohmann::json::array();
      for (const gt::RunReport& r : res.reports)
        rows.push_back(nlohmann::json::parse(gt::report_to_json(r)));
      j["trials_detail"] = rows;
    }
    os << j.dump(2) << "\n";
  } else {
    os << "# gt simulate " << kVersion << "\n";
    os << "# p=" << o.prob.p << " k=" << k << " rho=" << fmt6(o.prob.rho)
       << " trials=" << o.trials << " seed=" << o.seed
       << " resample=" << (mc.resample_defectives ? 1 : 0) << "\n";
    os << config_line(cfg) << "\n" << plan_line(plan) << "\n";
    os << "trial,n_total,n_bin_screen,n_bin_decode,n_sweep_missed,n_recheck,n_final_vote,"
          "fp,fn,success,s1_fp,s1_fn,bin_fp,bin_fn,n_col\n";
    for (uint32_t t = 0; t < res.reports.size(); ++t) {
      const gt::RunReport& r = res.reports[t];
      os << t << "," << r.n_total;
      for (int s = 0; s < gt::kNumStages; ++s) os << "," << r.n_per_stage[s];
      os << "," << r.fp << "," << r.fn << "," << (r.success ? 1 : 0) << "," << r.s1_fp << ","
         << r.s1_fn << "," << r.bin_fp << "," << r.bin_fn << "," << r.n_col << "\n";
    }
    const gt::ErrorStats& st = res.stats;
    os << "# summary trials=" << st.trials << " failures=" << st.failures
       << " pe=" << fmt6(st.pe) << " pe_lo=" << fmt6(st.pe_ci.lo)
       << " pe_hi=" << fmt6(st.pe_ci.hi) << " mean_tests=" << fmt6(st.mean_tests) << "\n";
  }

  if (o.trace) {
    // Replay trial 0 with a fresh ledger and dump every test it issued.
    uint64_t tseed = gt::mix_seed(o.seed, static_cast<uint64_t>(gt::Stream::Trial), 0);
    uint64_t iseed = mc.resample_defectives ? tseed : o.seed;
    gt::ProblemInstance inst = gt::make_instance(o.prob.p, k, o.prob.rho, iseed);
    gt::TestLedger ledger(false);
    gt::full_algorithm(inst, cfg, tseed, &ledger);
    std::cout << "seq,stage,round,pool_size,outcome\n";
    for (const gt::TestRecord& t : ledger.records())
      std::cout << t.seq << "," << gt::kStageNames[static_cast<int>(t.stage)] << ","
                << gt::round_of(t.stage) << "," << t.pool_size << "," << (t.outcome ? 1 : 0)
                << "\n";
  }
  return 0;
}

// ----------------------------------------------------------------- sweep

struct SweepOpts {
  ProblemOpts prob;
  gt::StageConfig cfg;
  std::vector<std::string> axis_specs;
  uint32_t trials = 100;
  uint64_t seed = 1;
  bool fixed_defectives = false;
  std::string format = "csv";
  std::string out;
};

gt::SweepAxis parse_axis(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size())
    throw std::invalid_argument("bad --axis '" + spec + "': expected name=v1,v2,...");
  gt::SweepAxis ax;
  ax.name = spec.substr(0, eq);
  std::string rest = spec.substr(eq + 1);
  size_t pos = 0;
  while (pos <= rest.size()) {
    size_t comma = rest.find(',', pos);
    std::string tok =
        comma == std::string::npos ? rest.substr(pos) : rest.substr(pos, comma - pos);
    if (tok.empty()) throw std::invalid_argument("bad --axis '" + spec + "': empty value");
    try {
      ax.values.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad --axis '" + spec + "': cannot parse '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return ax;
}

int run_sweep(const SweepOpts& o) {
  gt::SweepSpec spec;
  spec.p = o.prob.p;
  spec.rho = o.prob.rho;
  spec.base = o.cfg;
  spec.trials = o.trials;
  spec.seed = o.seed;
  spec.resample_defectives = !o.fixed_defectives;

  bool has_theta_axis = false, has_k_axis = false;
  for (const std::string& s : o.axis_specs) {
    gt::SweepAxis ax = parse_axis(s);
    has_theta_axis |= ax.name == "theta";
    has_k_axis |= ax.name == "k";
    spec.axes.push_back(std::move(ax));
  }
  if (o.prob.k > 0) {
    spec.k = o.prob.k;
  } else if (o.prob.theta > 0.0 && !has_theta_axis && !has_k_axis) {
    // carried as a one-value axis so a p axis re-derives k per point
    spec.axes.push_back({"theta", {o.prob.theta}});
  } else if (!has_k_axis && !has_theta_axis) {
    throw std::invalid_argument("one of --k, --theta, or a k/theta axis is required");
  }

  std::vector<gt::SweepPoint> points = gt::sweep(spec);

  Sink sink(o.out);
  std::ostream& os = sink.stream();
  if (o.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (const gt::SweepPoint& pt : points) {
      nlohmann::json coords;
      for (const auto& [name, v] : pt.coords) coords[name] = v;
      rows.push_back({{"index", pt.index},
                      {"coords", coords},
                      {"p", pt.p},
                      {"k", pt.k},
                      {"rho", pt.rho},
                      {"total_budget", pt.total_budget},
                      {"stats", stats_json(pt.stats)}});
    }
    nlohmann::json j{{"tool", "gt sweep"},
                     {"version", kVersion},
                     {"trials", o.trials},
                     {"seed", o.seed},
                     {"config", config_json(o.cfg)},
                     {"points", rows}};
    os << j.dump(2) << "\n";
  } else {
    os << "# gt sweep " << kVersion << "\n";
    os << "# base p=" << spec.p << " k=" << spec.k << " rho=" << fmt6(spec.rho)
       << " trials=" << o.trials << " seed=" << o.seed << "\n";
    os << config_line(o.cfg) << "\n";
    os << "index";
    for (const gt::SweepAxis& ax : spec.axes) os << "," << ax.name;
    os << ",p,k,rho,budget,trials,failures,pe,pe_lo,pe_hi,mean_tests";
    for (int s = 0; s < gt::kNumStages; ++s) os << ",mean_" << gt::kStageNames[s];
    os << "\n";
    for (const gt::SweepPoint& pt : points) {
      os << pt.index;
      for (const gt::SweepAxis& ax : spec.axes) os << "," << fmt6(pt.coords.at(ax.name));
      os << "," << pt.p << "," << pt.k << "," << fmt6(pt.rho) << "," << fmt6(pt.total_budget)
         << "," << pt.stats.trials << "," << pt.stats.failures << "," << fmt6(pt.stats.pe)
         << "," << fmt6(pt.stats.pe_ci.lo) << "," << fmt6(pt.stats.pe_ci.hi) << ","
         << fmt6(pt.stats.mean_tests);
      for (int s = 0; s < gt::kNumStages; ++s) os << "," << fmt6(pt.stats.mean_stage_tests[s]);
      os << "\n";
    }
  }
  return 0;
}

// -------------------------------------------------------------- calibrate

struct CalibrateOpts {
  ProblemOpts prob;
  gt::StageConfig cfg;
  std::string field;
  std::vector<double> values;
  uint32_t trials = 200;
  uint64_t seed = 1;
  bool fixed_defectives = false;
  std::string format = "csv";
  std::string out;
};

int run_calibrate(const CalibrateOpts& o) {
  uint32_t k = o.prob.resolve_k();

  struct Row {
    double value;
    gt::ErrorStats stats;
    double frac_stage1_ok, frac_bins_ok;
    double mean_s1_fp, mean_s1_fn;
    double mean_fn_missed_bin, mean_fn_collision, mean_fn_decode;
    double mean_fp_empty_bin, mean_fp_collision, mean_fp_decode;
  };
  std::vector<Row> rows;

  for (size_t i = 0; i < o.values.size(); ++i) {
    double v = o.values[i];
    gt::StageConfig cfg = o.cfg;
    if (o.field == "budget_mult") {
      cfg.total_budget = v * gt::multistage_tests(o.prob.p, k, o.prob.rho);
    } else if (!gt::set_config_field(cfg, o.field, v)) {
      throw std::invalid_argument("calibrate: unknown field '" + o.field + "'");
    }

    gt::MonteCarloConfig mc;
    mc.trials = o.trials;
    mc.seed = gt::mix_seed(o.seed, static_cast<uint64_t>(gt::Stream::SweepPoint), i);
    mc.resample_defectives = !o.fixed_defectives;
    gt::MonteCarloResult res = gt::monte_carlo(o.prob.p, k, o.prob.rho, cfg, mc);

    Row row{};
    row.value = v;
    row.stats = res.stats;
    double stage1_budget = cfg.alpha1 * k;
    double bin_budget = cfg.alpha1 / 3.0 * k;
    uint32_t s1_ok = 0, bins_ok = 0;
    for (const gt::RunReport& r : res.reports) {
      if (std::max(r.s1_fp, r.s1_fn) <= stage1_budget) ++s1_ok;
      if (std::max(r.bin_fp, r.bin_fn) <= bin_budget) ++bins_ok;
      row.mean_s1_fp += r.s1_fp;
      row.mean_s1_fn += r.s1_fn;
      row.mean_fn_missed_bin += r.fn_missed_bin;
      row.mean_fn_collision += r.fn_collision;
      row.mean_fn_decode += r.fn_decode;
      row.mean_fp_empty_bin += r.fp_empty_bin;
      row.mean_fp_collision += r.fp_collision;
      row.mean_fp_decode += r.fp_decode;
    }
    double n = std::max<uint32_t>(1, o.trials);
    row.frac_stage1_ok = s1_ok / n;
    row.frac_bins_ok = bins_ok / n;
    for (double* m : {&row.mean_s1_fp, &row.mean_s1_fn, &row.mean_fn_missed_bin,
                      &row.mean_fn_collision, &row.mean_fn_decode, &row.mean_fp_empty_bin,
                      &row.mean_fp_collision, &row.mean_fp_decode})
      *m /= n;
    rows.push_back(row);
  }

  Sink sink(o.out);
  std::ostream& os = sink.stream();
  if (o.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const Row& r : rows)
      arr.push_back({{"value", r.value},
                     {"stats", stats_json(r.stats)},
                     {"frac_stage1_ok", r.frac_stage1_ok},
                     {"frac_bins_ok", r.frac_bins_ok},
                     {"mean_s1_fp", r.mean_s1_fp},
                     {"mean_s1_fn", r.mean_s1_fn},
                     {"mean_fn_missed_bin", r.mean_fn_missed_bin},
                     {"mean_fn_collision", r.mean_fn_collision},
                     {"mean_fn_decode", r.mean_fn_decode},
                     {"mean_fp_empty_bin", r.mean_fp_empty_bin},
                     {"mean_fp_collision", r.mean_fp_collision},
                     {"mean_fp_decode", r.mean_fp_decode}});
    nlohmann::json j{{"tool", "gt calibrate"},
                     {"version", kVersion},
                     {"field", o.field},
                     {"p", o.prob.p},
                     {"k", k},
                     {"rho", o.prob.rho},
                     {"trials", o.trials},
                     {"seed", o.seed},
                     {"config", config_json(o.cfg)},
                     {"rows", arr}};
    os << j.dump(2) << "\n";
  } else {
    os << "# gt calibrate " << kVersion << "\n";
    os << "# field=" << o.field << " p=" << o.prob.p << " k=" << k
       << " rho=" << fmt6(o.prob.rho) << " trials=" << o.trials << " seed=" << o.seed << "\n";
    os << config_line(o.cfg) << "\n";
    os << "value,trials,failures,pe,pe_lo,pe_hi,frac_stage1_ok,frac_bins_ok,mean_tests,"
          "mean_s1_fp,mean_s1_fn,mean_fn_missed_bin,mean_fn_collision,mean_fn_decode,"
          "mean_fp_empty_bin,mean_fp_collision,mean_fp_decode\n";
    for (const Row& r : rows) {
      os << fmt6(r.value) << "," << r.stats.trials << "," << r.stats.failures << ","
         << fmt6(r.stats.pe) << "," << fmt6(r.stats.pe_ci.lo) << "," << fmt6(r.stats.pe_ci.hi)
         << "," << fmt6(r.frac_stage1_ok) << "," << fmt6(r.frac_bins_ok) << ","
         << fmt6(r.stats.mean_tests) << "," << fmt6(r.mean_s1_fp) << "," << fmt6(r.mean_s1_fn)
         << "," << fmt6(r.mean_fn_missed_bin) << "," << fmt6(r.mean_fn_collision) << ","
         << fmt6(r.mean_fn_decode) << "," << fmt6(r.mean_fp_empty_bin) << ","
         << fmt6(r.mean_fp_collision) << "," << fmt6(r.mean_fp_decode) << "\n";
    }
  }
  return 0;
}

// -------------------------------------------------------------- codes-test

struct CodesOpts {
  uint32_t pprime = 64;
  std::vector<uint32_t> nprimes;
  std::vector<double> mults;
  uint32_t base_p = 0, base_bins = 0;
  double rho = 0.11;
  double eta = 0.5;
  uint32_t trials = 10000;
  uint64_t seed = 1;
  std::string format = "csv";
  std::string out;
};

int run_codes_test(const CodesOpts& o) {
  std::vector<uint32_t> nprimes = o.nprimes;
  uint32_t base_len = 0;
  if (!o.mults.empty()) {
    if (o.base_p == 0 || o.base_bins == 0)
      throw std::invalid_argument("--mults needs --base-p and --base-bins");
    base_len = gt::required_code_length(o.base_p, o.base_bins, o.rho, o.eta);
    for (double m : o.mults)
      nprimes.push_back(static_cast<uint32_t>(std::ceil(m * base_len)));
  }
  if (nprimes.empty())
    throw std::invalid_argument("no code lengths: pass --nprime or --mults");

  struct Row {
    uint32_t nprime, errors;
    gt::Interval ci;
  };
  std::vector<Row> rows;
  for (uint32_t np : nprimes) {
    uint32_t errors = 0;
    for (uint32_t t = 0; t < o.trials; ++t) {
      uint64_t s = gt::mix_seed(o.seed, np, t);
      gt::Rng cb_rng = gt::make_rng(s, gt::Stream::Codebook);
      gt::Codebook cb = gt::build_codebook(o.pprime, np, cb_rng);
      gt::Rng pick_rng = gt::make_rng(s, gt::Stream::DefectiveSet);
      uint32_t truth = static_cast<uint32_t>(pick_rng.below(o.pprime));
      gt::Rng noise = gt::make_rng(s, gt::Stream::Noise);
      gt::Bits received(np);
      for (uint32_t r = 0; r < np; ++r) {
        bool bit = cb.columns[truth].test(r);
        if (noise.bernoulli(o.rho)) bit = !bit;
        received.set(r, bit);
      }
      if (gt::ml_decode(received, cb) != truth) ++errors;
    }
    rows.push_back({np, errors, gt::wilson_interval(errors, o.trials)});
  }

  Sink sink(o.out);
  std::ostream& os = sink.stream();
  if (o.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const Row& r : rows)
      arr.push_back({{"nprime", r.nprime},
                     {"trials", o.trials},
                     {"errors", r.errors},
                     {"error_rate", static_cast<double>(r.errors) / o.trials},
                     {"ci_lo", r.ci.lo},
                     {"ci_hi", r.ci.hi}});
    nlohmann::json j{{"tool", "gt codes-test"},
                     {"version", kVersion},
                     {"pprime", o.pprime},
                     {"rho", o.rho},
                     {"trials", o.trials},
                     {"seed", o.seed},
                     {"rows", arr}};
    if (base_len > 0) j["required_length"] = base_len;
    os << j.dump(2) << "\n";
  } else {
    os << "# gt codes-test " << kVersion << "\n";
    os << "# pprime=" << o.pprime << " rho=" << fmt6(o.rho) << " trials=" << o.trials
       << " seed=" << o.seed << "\n";
    if (base_len > 0) os << "# required_length=" << base_len << "\n";
    os << "nprime,trials,errors,error_rate,ci_lo,ci_hi\n";
    for (const Row& r : rows)
      os << r.nprime << "," << o.trials << "," << r.errors << ","
         << fmt6(static_cast<double>(r.errors) / o.trials) << "," << fmt6(r.ci.lo) << ","
         << fmt6(r.ci.hi) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noisy adaptive group testing workbench"};
  app.require_subcommand(1);

  BoundsOpts bo;
  auto* bounds = app.add_subcommand("bounds", "information bounds and rate curves");
  add_problem_opts(bounds, bo.prob);
  bounds->add_option("--thetas", bo.thetas, "theta grid: emit a rate curve instead")
      ->delimiter(',');
  bounds->add_option("--format", bo.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  bounds->add_option("--out", bo.out, "output file (default stdout)");

  SimulateOpts so;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo runs of the full procedure");
  add_problem_opts(sim, so.prob);
  add_config_opts(sim, so.cfg);
  sim->add_option("--trials", so.trials, "number of trials")->check(CLI::PositiveNumber);
  sim->add_option("--seed", so.seed, "root seed");
  sim->add_flag("--fixed-defectives", so.fixed_defectives,
                "use one defective set for all trials");
  auto* budget = sim->add_option("--budget", so.budget, "total test budget");
  auto* bmult = sim->add_option("--budget-mult", so.budget_mult,
                                "budget as a multiple of the multistage bound");
  budget->excludes(bmult);
  bmult->excludes(budget);
  sim->add_flag("--per-trial", so.per_trial, "include per-trial detail in json output");
  sim->add_flag("--trace", so.trace, "dump every test of trial 0 to stdout");
  sim->add_option("--format", so.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("--out", so.out, "output file (default stdout)");

  SweepOpts wo;
  auto* sw = app.add_subcommand("sweep", "Monte Carlo over a parameter grid");
  add_problem_opts(sw, wo.prob);
  add_config_opts(sw, wo.cfg);
  sw->add_option("--axis", wo.axis_specs, "axis as name=v1,v2,... (repeatable)")->required();
  sw->add_option("--trials", wo.trials, "trials per point")->check(CLI::PositiveNumber);
  sw->add_option("--seed", wo.seed, "root seed");
  sw->add_flag("--fixed-defectives", wo.fixed_defectives, "use one defective set per point");
  sw->add_option("--format", wo.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sw->add_option("--out", wo.out, "output file (default stdout)");

  CalibrateOpts co;
  auto* cal = app.add_subcommand("calibrate", "grid one constant, report stage health");
  add_problem_opts(cal, co.prob);
  add_config_opts(cal, co.cfg);
  cal->add_option("--field", co.field, "config field or budget_mult")->required();
  cal->add_option("--values", co.values, "grid values")->required()->delimiter(',');
  cal->add_option("--trials", co.trials, "trials per value")->check(CLI::PositiveNumber);
  cal->add_option("--seed", co.seed, "root seed");
  cal->add_flag("--fixed-defectives", co.fixed_defectives,
                "use one defective set per value");
  cal->add_option("--format", co.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cal->add_option("--out", co.out, "output file (default stdout)");

  CodesOpts ko;
  auto* codes = app.add_subcommand("codes-test", "random code + ML decode error rates");
  codes->add_option("--pprime", ko.pprime, "codebook size (items per bin)")
      ->check(CLI::PositiveNumber);
  codes->add_option("--nprime", ko.nprimes, "code lengths to test")->delimiter(',');
  codes->add_option("--mults", ko.mults, "lengths as multiples of the required length")
      ->delimiter(',');
  codes->add_option("--base-p", ko.base_p, "population for the required length");
  codes->add_option("--base-bins", ko.base_bins, "bin count for the required length");
  codes->add_option("--rho", ko.rho, "flip probability");
  codes->add_option("--eta", ko.eta, "code length slack");
  codes->add_option("--trials", ko.trials, "trials per length")->check(CLI::PositiveNumber);
  codes->add_option("--seed", ko.seed, "root seed");
  codes->add_option("--format", ko.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  codes->add_option("--out", ko.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*bounds) return run_bounds(bo);
    if (*sim) return run_simulate(so);
    if (*sw) return run_sweep(wo);
    if (*cal) return run_calibrate(co);
    if (*codes) return run_codes_test(ko);
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
