#include "gt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gt/theory.hpp"

namespace gt {

Interval wilson_interval(uint32_t successes, uint32_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  double n = trials;
  double phat = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (phat + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

ErrorStats summarize(const std::vector<RunReport>& reports) {
  ErrorStats s;
  s.trials = static_cast<uint32_t>(reports.size());
  for (const RunReport& r : reports) {
    if (!r.success) ++s.failures;
    s.mean_tests += r.n_total;
    for (int i = 0; i < kNumStages; ++i) s.mean_stage_tests[i] += r.n_per_stage[i];
    s.mean_fp += r.fp;
    s.mean_fn += r.fn;
    s.max_fp = std::max(s.max_fp, r.fp);
    s.max_fn = std::max(s.max_fn, r.fn);
  }
  if (s.trials > 0) {
    double n = s.trials;
    s.pe = s.failures / n;
    s.mean_tests /= n;
    for (auto& v : s.mean_stage_tests) v /= n;
    s.mean_fp /= n;
    s.mean_fn /= n;
  }
  s.pe_ci = wilson_interval(s.failures, s.trials);
  return s;
}

RunReport run_trial(uint32_t p, uint32_t k, double rho, const StageConfig& cfg,
                    uint64_t root_seed, uint32_t trial_index, bool resample_defectives) {
  uint64_t trial_seed = mix_seed(root_seed, static_cast<uint64_t>(Stream::Trial), trial_index);
  uint64_t instance_seed = resample_defectives ? trial_seed : root_seed;
  ProblemInstance inst = make_instance(p, k, rho, instance_seed);
  return full_algorithm(inst, cfg, trial_seed);
}

MonteCarloResult monte_carlo(uint32_t p, uint32_t k, double rho, const StageConfig& cfg,
                             const MonteCarloConfig& mc) {
  MonteCarloResult out;
  out.reports.reserve(mc.trials);
  for (uint32_t t = 0; t < mc.trials; ++t)
    out.reports.push_back(run_trial(p, k, rho, cfg, mc.seed, t, mc.resample_defectives));
  out.stats = summarize(out.reports);
  return out;
}

bool set_config_field(StageConfig& cfg, const std::string& name, double value) {
  if (name == "epsilon")
    cfg.epsilon = value;
  else if (name == "alpha1")
    cfg.alpha1 = value;
  else if (name == "alpha2")
    cfg.alpha2 = value;
  else if (name == "eta")
    cfg.eta = value;
  else if (name == "nprime_mult")
    cfg.nprime_mult = value;
  else if (name == "c_ncomp")
    cfg.c_ncomp = value;
  else if (name == "c_ncomp_exact")
    cfg.c_ncomp_exact = value;
  else if (name == "c_check")
    cfg.c_check = value;
  else if (name == "c_tilde")
    cfg.c_tilde = value;
  else if (name == "delta")
    cfg.delta = value;
  else if (name == "nu")
    cfg.nu = value;
  else if (name == "screen_frac")
    cfg.screen_frac = value;
  else if (name == "code_frac")
    cfg.code_frac = value;
  else if (name == "total_budget")
    cfg.total_budget = value;
  else
    return false;
  return true;
}

namespace {

// Applies one axis value to the point-local problem/config state.
struct PointState {
  uint32_t p;
  double k;  // double so a theta axis can overwrite it late
  double rho;
  double theta = -1.0;
  double budget_mult = 0.0;
  StageConfig cfg;
};

void apply_axis(PointState& st, const std::string& name, double v) {
  if (name == "p") {
    if (v < 1.0) throw std::invalid_argument("sweep: p must be >= 1");
    st.p = static_cast<uint32_t>(v);
  } else if (name == "k")
    st.k = v;
  else if (name == "theta")
    st.theta = v;
  else if (name == "rho")
    st.rho = v;
  else if (name == "budget_mult")
    st.budget_mult = v;
  else if (!set_config_field(st.cfg, name, v))
    throw std::invalid_argument("sweep: unknown axis '" + name + "'");
}

}  // namespace

std::vector<SweepPoint> sweep(const SweepSpec& spec) {
  uint64_t n_points = 1;
  for (const SweepAxis& ax : spec.axes) {
    if (ax.values.empty()) throw std::invalid_argument("sweep: axis '" + ax.name + "' is empty");
    n_points *= ax.values.size();
    if (n_points > 10000) throw std::invalid_argument("sweep: more than 10000 points");
  }

  std::vector<SweepPoint> out;
  out.reserve(n_points);
  std::vector<size_t> idx(spec.axes.size(), 0);
  for (uint64_t flat = 0; flat < n_points; ++flat) {
    PointState st{spec.p, static_cast<double>(spec.k), spec.rho, -1.0, 0.0, spec.base};

    SweepPoint pt;
    pt.index = static_cast<uint32_t>(flat);
    for (size_t a = 0; a < spec.axes.size(); ++a) {
      double v = spec.axes[a].values[idx[a]];
      apply_axis(st, spec.axes[a].name, v);
      pt.coords[spec.axes[a].name] = v;
    }

    uint32_t k = st.theta > 0.0 ? k_from_theta(st.p, st.theta)
                                : static_cast<uint32_t>(std::llround(st.k));
    if (st.budget_mult > 0.0)
      st.cfg.total_budget = st.budget_mult * multistage_tests(st.p, k, st.rho);

    MonteCarloConfig mc;
    mc.trials = spec.trials;
    mc.seed = mix_seed(spec.seed, static_cast<uint64_t>(Stream::SweepPoint), flat);
    mc.resample_defectives = spec.resample_defectives;

    MonteCarloResult res = monte_carlo(st.p, k, st.rho, st.cfg, mc);
    pt.p = st.p;
    pt.k = k;
    pt.rho = st.rho;
    pt.total_budget = st.cfg.total_budget;
    pt.stats = res.stats;
    out.push_back(std::move(pt));

    for (size_t a = spec.axes.size(); a-- > 0;) {
      if (++idx[a] < spec.axes[a].values.size()) break;
      idx[a] = 0;
    }
  }
  return out;
}

double binomial(uint32_t n, uint32_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (uint32_t i = 1; i <= k; ++i) {
    c *= static_cast<double>(n - k + i) / i;
    if (c > std::numeric_limits<double>::max() / 2) return std::numeric_limits<double>::infinity();
  }
  return c;
}

std::vector<uint32_t> map_oracle(const TestLedger& ledger, uint32_t p, uint32_t k, double rho,
                                 uint64_t limit) {
  if (!ledger.stores_pools())
    throw std::invalid_argument("map_oracle: ledger does not store pools");
  if (k == 0 || k > p) throw std::invalid_argument("map_oracle: need 0 < k <= p");
  if (rho < 0.0 || rho >= 0.5)
    throw std::invalid_argument("map_oracle: rho must lie in [0, 1/2)");
  double subsets = binomial(p, k);
  if (!(subsets <= static_cast<double>(limit)))
    throw std::invalid_argument("map_oracle: C(p, k) exceeds the subset limit");

  // Membership masks per test (item ids are 1-based).
  const auto& recs = ledger.records();
  std::vector<Bits> pool_mask;
  pool_mask.reserve(recs.size());
  for (const TestRecord& t : recs) {
    Bits m(p + 1);
    for (uint32_t item : t.pool) m.set(item, true);
    pool_mask.push_back(std::move(m));
  }

  // Under iid flips with rho < 1/2, likelihood is monotone in the number of
  // agreeing tests, so ML = most agreements; rho = 0 degenerates to the same
  // rule. First subset in lex order wins ties.
  std::vector<uint32_t> subset(k), best;
  for (uint32_t i = 0; i < k; ++i) subset[i] = i + 1;
  long best_score = -1;
  while (true) {
    long score = 0;
    for (size_t t = 0; t < recs.size(); ++t) {
      bool hit = false;
      for (uint32_t item : subset)
        if (pool_mask[t].test(item)) {
          hit = true;
          break;
        }
      if (hit == recs[t].outcome) ++score;
    }
    if (score > best_score) {
      best_score = score;
      best = subset;
    }

    // next k-combination of {1..p} in lex order
    int pos = static_cast<int>(k) - 1;
    while (pos >= 0 && subset[pos] == p - k + 1 + pos) --pos;
    if (pos < 0) break;
    ++subset[pos];
    for (uint32_t i = pos + 1; i < k; ++i) subset[i] = subset[i - 1] + 1;
  }
  return best;
}

}  // namespace gt
