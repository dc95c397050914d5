#include "gt/stages.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "gt/theory.hpp"

namespace gt {

double StageConfig::resolve_delta(double rho) const {
  if (delta >= 0.0) return delta;
  return std::clamp((0.5 - rho) / 2.0, 0.02, 0.15);
}

namespace {

uint32_t ceil_u32(double x) { return static_cast<uint32_t>(std::ceil(x)); }

uint32_t make_odd(uint32_t n) { return (n % 2 == 0) ? n + 1 : n; }

// Smallest row count a codebook over p_prime columns can have.
uint32_t min_code_rows(uint32_t p_prime) {
  uint32_t rows = 1;
  while (rows < 62 && (uint64_t{1} << rows) < p_prime) ++rows;
  return rows;
}

// With inclusion probability q = nu / kmax, a pool holding m of the kmax
// sought items is raw-positive with rate 1 - (1-q)^m.  For small kmax the
// nominal nu pushes that rate past the decode threshold even before noise
// (kmax = 1 gives q = nu itself), so cap q at 1 - 2^(-1/kmax), which pins
// the fully-saturated rate at 1/2.  The cap agrees with nu/kmax to first
// order as kmax grows.
double capped_nu(double nu, uint32_t kmax) {
  double kk = static_cast<double>(std::max<uint32_t>(1, kmax));
  double q_cap = -std::expm1(-std::log(2.0) / kk);
  return std::min(nu, kk * q_cap);
}

uint32_t recheck_keep_target(uint32_t k, double alpha2) {
  uint32_t drop = ceil_u32(alpha2 * k);
  return drop >= k ? 0 : k - drop;
}

StagePlan plan_formula(uint32_t p, uint32_t k, double rho, const StageConfig& cfg) {
  StagePlan plan;
  plan.delta = cfg.resolve_delta(rho);

  double b_raw = std::round(std::pow(static_cast<double>(k), 1.0 + cfg.epsilon));
  uint64_t b = b_raw < 1.0 ? 1 : static_cast<uint64_t>(b_raw);
  // The screen needs more bins than defectives; the partition needs bins to
  // be nonempty.
  b = std::clamp<uint64_t>(b, uint64_t{k} + 1, p);
  plan.bins = static_cast<uint32_t>(b);

  plan.n_screen = approx_tests_needed(k, plan.bins, cfg.alpha1 / 3.0, cfg.c_ncomp);

  if (plan.bins < p) {
    uint32_t base = required_code_length(p, plan.bins, rho, cfg.eta);
    plan.n_code = ceil_u32(cfg.nprime_mult * base);
  } else {
    plan.n_code = 1;  // every bin is a singleton; no codes are ever built
  }

  // The sweep must tolerate the misses stage 1 actually produces: the
  // alpha1*k allowance, but never less than the expected collision count
  // k^2/(2B) plus one for fluctuation, which dominates at small k.
  double mean_col = static_cast<double>(k) * k / (2.0 * plan.bins);
  plan.kmax_sweep = std::max<uint32_t>({1, ceil_u32(cfg.alpha1 * k), 1 + ceil_u32(mean_col)});
  plan.n_sweep =
      ceil_u32(cfg.c_ncomp_exact * plan.kmax_sweep * std::log(static_cast<double>(p)));

  if (rho > 0.0) {
    double d = noise_functionals(rho).kl_flip_nats;
    double logk = std::log(static_cast<double>(std::max<uint32_t>(k, 2)));
    plan.n_check = ceil_u32(cfg.c_check * logk / d);
    plan.n_vote = make_odd(ceil_u32(cfg.c_tilde * logk / d));
  } else {
    plan.n_check = 1;
    plan.n_vote = 1;
  }
  return plan;
}

StagePlan plan_budget(uint32_t p, uint32_t k, double rho, const StageConfig& cfg) {
  StagePlan ref = plan_formula(p, k, rho, cfg);
  double T = cfg.total_budget;

  StagePlan plan;
  plan.bins = ref.bins;
  plan.kmax_sweep = ref.kmax_sweep;
  plan.delta = ref.delta;

  plan.n_screen = std::max<uint32_t>(1, static_cast<uint32_t>(std::llround(cfg.screen_frac * T)));
  double code_total = cfg.code_frac * T;
  // Sized for the expected number of flagged bins, with a little headroom
  // for screen false positives.
  plan.n_code =
      std::max<uint32_t>(1, static_cast<uint32_t>(std::floor(code_total / (1.25 * k))));

  double rest = T - plan.n_screen - std::floor(code_total);
  if (rest < 3.0) rest = 3.0;

  uint32_t check_items = std::max<uint32_t>(1, k);
  uint32_t vote_items = std::max<uint32_t>(1, ceil_u32(cfg.alpha2 * k));
  double w_sweep = ref.n_sweep;
  double w_check = static_cast<double>(ref.n_check) * check_items;
  double w_vote = static_cast<double>(ref.n_vote) * vote_items;
  double w = w_sweep + w_check + w_vote;
  if (w <= 0.0) {
    w_sweep = w_check = w_vote = 1.0;
    w = 3.0;
  }

  plan.n_sweep = std::max<uint32_t>(1, static_cast<uint32_t>(std::llround(rest * w_sweep / w)));
  plan.n_check = std::max<uint32_t>(
      1, static_cast<uint32_t>(std::floor(rest * w_check / w / check_items)));
  plan.n_vote = make_odd(std::max<uint32_t>(
      1, static_cast<uint32_t>(std::floor(rest * w_vote / w / vote_items))));
  return plan;
}

}  // namespace

StagePlan plan_stages(uint32_t p, uint32_t k, double rho, const StageConfig& cfg) {
  if (p == 0 || k == 0 || k >= p)
    throw std::invalid_argument("plan_stages: need 0 < k < p");
  if (rho < 0.0 || rho >= 0.5)
    throw std::invalid_argument("plan_stages: rho must lie in [0, 1/2)");
  if (cfg.epsilon <= 0.0) throw std::invalid_argument("plan_stages: epsilon must be positive");
  if (cfg.alpha1 <= 0.0 || cfg.alpha1 >= 1.0)
    throw std::invalid_argument("plan_stages: alpha1 must lie in (0, 1)");
  if (cfg.alpha2 <= 0.0 || cfg.alpha2 >= 1.0)
    throw std::invalid_argument("plan_stages: alpha2 must lie in (0, 1)");

  StagePlan plan =
      cfg.total_budget > 0.0 ? plan_budget(p, k, rho, cfg) : plan_formula(p, k, rho, cfg);

  // Fail early if the screen threshold cannot separate defective bins from
  // clean ones at this noise level.
  NcompParams screen;
  screen.delta = plan.delta;
  screen.nu = cfg.nu;
  screen.kmax = k;
  screen.mode = NcompMode::Approximate;
  validate_ncomp_params(screen, rho);
  return plan;
}

BinAssignment partition_bins(uint32_t p, uint32_t B, Rng& rng) {
  if (B == 0 || B > p) throw std::invalid_argument("partition_bins: need 0 < B <= p");
  std::vector<uint32_t> items(p);
  std::iota(items.begin(), items.end(), 1u);
  for (uint32_t i = p - 1; i > 0; --i) {
    uint64_t j = rng.below(uint64_t{i} + 1);
    std::swap(items[i], items[j]);
  }

  BinAssignment assign;
  assign.bins.resize(B);
  assign.bin_of.assign(p + 1, 0);
  uint32_t base = p / B, extra = p % B, pos = 0;
  for (uint32_t b = 0; b < B; ++b) {
    uint32_t size = base + (b < extra ? 1 : 0);
    auto& bin = assign.bins[b];
    bin.assign(items.begin() + pos, items.begin() + pos + size);
    std::sort(bin.begin(), bin.end());
    for (uint32_t item : bin) assign.bin_of[item] = b;
    pos += size;
  }
  return assign;
}

uint32_t collision_count(const BinAssignment& assign, const ProblemInstance& inst) {
  std::vector<uint32_t> cnt(assign.bins.size(), 0);
  for (uint32_t d : inst.defectives) ++cnt[assign.bin_of[d]];
  uint32_t col = 0;
  for (uint32_t c : cnt)
    if (c >= 2) col += c;
  return col;
}

std::vector<uint32_t> identify_defective_bins(const BinAssignment& assign,
                                              const ProblemInstance& inst,
                                              const StagePlan& plan,
                                              const StageConfig& cfg, TestLedger& ledger,
                                              Rng& design_rng, Rng& noise_rng) {
  NcompParams params;
  params.delta = plan.delta;
  params.kmax = std::max<uint32_t>(1, inst.k);
  params.nu = capped_nu(cfg.nu, params.kmax);
  params.mode = NcompMode::Approximate;

  BernoulliDesign design = ncomp_design(plan.bins, plan.n_screen, params, design_rng);

  std::vector<uint8_t> outcomes(design.n, 0);
  std::vector<uint32_t> pool;
  for (uint32_t t = 0; t < design.n; ++t) {
    pool.clear();
    for (uint32_t b : design.rows[t])
      pool.insert(pool.end(), assign.bins[b].begin(), assign.bins[b].end());
    outcomes[t] = run_test(pool, inst, ledger, Stage::BinScreen, noise_rng) ? 1 : 0;
  }
  return ncomp_decode(design, outcomes, params, inst.rho);
}

InnerResult inner_adaptive(const ProblemInstance& inst, const StageConfig& cfg,
                           const StagePlan& plan, TestLedger& ledger, uint64_t root_seed,
                           Rng& noise_rng) {
  Rng binning_rng = make_rng(root_seed, Stream::Binning);
  BinAssignment assign = partition_bins(inst.p, plan.bins, binning_rng);

  Rng screen_rng = make_rng(root_seed, Stream::Design, 0);
  InnerResult res;
  res.flagged =
      identify_defective_bins(assign, inst, plan, cfg, ledger, screen_rng, noise_rng);

  std::vector<uint32_t> defect_cnt(plan.bins, 0);
  for (uint32_t d : inst.defectives) ++defect_cnt[assign.bin_of[d]];
  for (uint32_t c : defect_cnt) {
    if (c >= 1) ++res.bins_defective;
    if (c >= 2) res.n_col += c;
  }

  std::vector<uint8_t> is_flagged(plan.bins, 0);
  for (uint32_t b : res.flagged) {
    is_flagged[b] = 1;
    if (defect_cnt[b] == 0) ++res.bin_fp;
  }
  for (uint32_t b = 0; b < plan.bins; ++b)
    if (defect_cnt[b] >= 1 && !is_flagged[b]) ++res.bin_fn;

  // One decoded candidate per flagged bin. Singleton bins need no tests.
  std::vector<uint32_t> chosen(plan.bins, 0);
  for (uint32_t b : res.flagged) {
    const auto& items = assign.bins[b];
    uint32_t pick;
    if (items.size() == 1) {
      pick = items[0];
    } else {
      uint32_t rows = std::max(plan.n_code, min_code_rows(static_cast<uint32_t>(items.size())));
      Rng cb_rng = make_rng(root_seed, Stream::Codebook, b + 1);
      Codebook cb = build_codebook(static_cast<uint32_t>(items.size()), rows, cb_rng);
      Bits received = run_bin_tests(items, cb, inst, ledger, noise_rng);
      pick = items[ml_decode(received, cb)];
    }
    chosen[b] = pick;
    res.s1.push_back(pick);
  }
  std::sort(res.s1.begin(), res.s1.end());

  for (uint32_t d : inst.defectives) {
    uint32_t b = assign.bin_of[d];
    if (!is_flagged[b]) {
      ++res.fn_missed_bin;
    } else if (chosen[b] != d) {
      if (defect_cnt[b] >= 2)
        ++res.fn_collision;
      else
        ++res.fn_decode;
    }
  }
  for (uint32_t b : res.flagged) {
    if (inst.is_defective(chosen[b])) continue;
    if (defect_cnt[b] == 0)
      ++res.fp_empty_bin;
    else if (defect_cnt[b] >= 2)
      ++res.fp_collision;
    else
      ++res.fp_decode;
  }
  return res;
}

std::vector<uint32_t> sweep_missed(const std::vector<uint32_t>& s1,
                                   const ProblemInstance& inst, const StagePlan& plan,
                                   const StageConfig& cfg, TestLedger& ledger,
                                   Rng& design_rng, Rng& noise_rng) {
  // Complement of s1 in 1..p (s1 is sorted).
  std::vector<uint32_t> population;
  population.reserve(inst.p - s1.size());
  size_t j = 0;
  for (uint32_t item = 1; item <= inst.p; ++item) {
    if (j < s1.size() && s1[j] == item) {
      ++j;
      continue;
    }
    population.push_back(item);
  }
  if (population.empty()) return {};

  NcompParams params;
  params.delta = plan.delta;
  params.kmax = plan.kmax_sweep;
  params.nu = capped_nu(cfg.nu, params.kmax);
  params.mode = NcompMode::Exact;

  BernoulliDesign design =
      ncomp_design(static_cast<uint32_t>(population.size()), plan.n_sweep, params, design_rng);

  std::vector<uint8_t> outcomes(design.n, 0);
  std::vector<uint32_t> pool;
  for (uint32_t t = 0; t < design.n; ++t) {
    pool.clear();
    pool.reserve(design.rows[t].size());
    for (uint32_t pos : design.rows[t]) pool.push_back(population[pos]);
    outcomes[t] = run_test(pool, inst, ledger, Stage::SweepMissed, noise_rng) ? 1 : 0;
  }

  std::vector<uint32_t> found;
  for (uint32_t pos : ncomp_decode(design, outcomes, params, inst.rho))
    found.push_back(population[pos]);
  return found;  // ascending because population and positions are
}

RecheckResult recheck_candidates(const std::vector<uint32_t>& s1, const ProblemInstance& inst,
                                 const StagePlan& plan, const StageConfig& cfg,
                                 TestLedger& ledger, Rng& noise_rng) {
  std::vector<uint32_t> positives(s1.size(), 0);
  for (size_t i = 0; i < s1.size(); ++i) {
    uint32_t pool[1] = {s1[i]};
    for (uint32_t t = 0; t < plan.n_check; ++t)
      if (run_test(pool, inst, ledger, Stage::Recheck, noise_rng)) ++positives[i];
  }

  size_t keep = std::min<size_t>(s1.size(), recheck_keep_target(inst.k, cfg.alpha2));
  std::vector<size_t> order(s1.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (positives[a] != positives[b]) return positives[a] > positives[b];
    return s1[a] < s1[b];
  });

  RecheckResult res;
  for (size_t i = 0; i < order.size(); ++i) {
    // Keeping an item outright needs both rank and a strict majority of its
    // own tests; anything doubtful is adjudicated by the final vote instead.
    bool majority = 2 * positives[order[i]] > plan.n_check;
    (i < keep && majority ? res.kept : res.residual).push_back(s1[order[i]]);
  }
  std::sort(res.kept.begin(), res.kept.end());
  std::sort(res.residual.begin(), res.residual.end());
  return res;
}

std::vector<uint32_t> final_vote(const std::vector<uint32_t>& residual,
                                 const ProblemInstance& inst, const StagePlan& plan,
                                 TestLedger& ledger, Rng& noise_rng) {
  std::vector<uint32_t> kept;
  for (uint32_t item : residual) {
    uint32_t pool[1] = {item};
    uint32_t pos = 0;
    for (uint32_t t = 0; t < plan.n_vote; ++t)
      if (run_test(pool, inst, ledger, Stage::FinalVote, noise_rng)) ++pos;
    if (2 * pos > plan.n_vote) kept.push_back(item);
  }
  return kept;
}

RunReport full_algorithm(const ProblemInstance& inst, const StageConfig& cfg,
                         uint64_t root_seed, TestLedger* ledger_out) {
  StagePlan plan = plan_stages(inst.p, inst.k, inst.rho, cfg);

  TestLedger local(cfg.store_pools);
  TestLedger& ledger = ledger_out ? *ledger_out : local;

  Rng noise_rng = make_rng(root_seed, Stream::Noise);

  InnerResult inner = inner_adaptive(inst, cfg, plan, ledger, root_seed, noise_rng);

  Rng sweep_rng = make_rng(root_seed, Stream::Design, 1);
  std::vector<uint32_t> swept =
      sweep_missed(inner.s1, inst, plan, cfg, ledger, sweep_rng, noise_rng);
  RecheckResult rc = recheck_candidates(inner.s1, inst, plan, cfg, ledger, noise_rng);
  std::vector<uint32_t> voted = final_vote(rc.residual, inst, plan, ledger, noise_rng);

  // The three parts are disjoint: swept avoids s1, kept and voted partition
  // disjoint subsets of s1.
  std::vector<uint32_t> estimate;
  estimate.reserve(swept.size() + rc.kept.size() + voted.size());
  std::merge(swept.begin(), swept.end(), rc.kept.begin(), rc.kept.end(),
             std::back_inserter(estimate));
  std::vector<uint32_t> merged;
  merged.reserve(estimate.size() + voted.size());
  std::merge(estimate.begin(), estimate.end(), voted.begin(), voted.end(),
             std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  RunReport r;
  r.p = inst.p;
  r.k = inst.k;
  r.rho = inst.rho;
  r.seed = root_seed;
  r.n_per_stage = ledger.stage_counts();
  r.n_total = ledger.total();

  Mistakes final = mistakes(merged, inst.defectives);
  r.fp = final.fp;
  r.fn = final.fn;
  r.success = (final.fp == 0 && final.fn == 0);

  Mistakes first = mistakes(inner.s1, inst.defectives);
  r.s1_size = static_cast<uint32_t>(inner.s1.size());
  r.s1_fp = first.fp;
  r.s1_fn = first.fn;

  r.bins = plan.bins;
  r.bins_defective = inner.bins_defective;
  r.bins_flagged = static_cast<uint32_t>(inner.flagged.size());
  r.bin_fp = inner.bin_fp;
  r.bin_fn = inner.bin_fn;
  r.n_col = inner.n_col;
  r.fn_missed_bin = inner.fn_missed_bin;
  r.fn_collision = inner.fn_collision;
  r.fn_decode = inner.fn_decode;
  r.fp_empty_bin = inner.fp_empty_bin;
  r.fp_collision = inner.fp_collision;
  r.fp_decode = inner.fp_decode;

  r.plan = plan;
  r.adaptive_rounds = 4;
  r.rounds_with_tests = ledger.rounds_used();
  r.estimate = std::move(merged);
  return r;
}

std::string report_to_json(const RunReport& r, int indent) {
  nlohmann::json stages;
  for (int s = 0; s < kNumStages; ++s) stages[kStageNames[s]] = r.n_per_stage[s];

  nlohmann::json j{
      {"p", r.p},
      {"k", r.k},
      {"rho", r.rho},
      {"seed", r.seed},
      {"n_total", r.n_total},
      {"n_per_stage", stages},
      {"fp", r.fp},
      {"fn", r.fn},
      {"success", r.success},
      {"s1", {{"size", r.s1_size}, {"fp", r.s1_fp}, {"fn", r.s1_fn}}},
      {"bins",
       {{"count", r.bins},
        {"defective", r.bins_defective},
        {"flagged", r.bins_flagged},
        {"fp", r.bin_fp},
        {"fn", r.bin_fn},
        {"collided_defectives", r.n_col}}},
      {"mistake_breakdown",
       {{"fn_missed_bin", r.fn_missed_bin},
        {"fn_collision", r.fn_collision},
        {"fn_decode", r.fn_decode},
        {"fp_empty_bin", r.fp_empty_bin},
        {"fp_collision", r.fp_collision},
        {"fp_decode", r.fp_decode}}},
      {"plan",
       {{"bins", r.plan.bins},
        {"n_screen", r.plan.n_screen},
        {"n_code", r.plan.n_code},
        {"n_sweep", r.plan.n_sweep},
        {"n_check", r.plan.n_check},
        {"n_vote", r.plan.n_vote},
        {"kmax_sweep", r.plan.kmax_sweep},
        {"delta", r.plan.delta}}},
      {"adaptive_rounds", r.adaptive_rounds},
      {"rounds_with_tests", r.rounds_with_tests},
      {"estimate", r.estimate},
  };
  return indent < 0 ? j.dump() : j.dump(indent);
}

}  // namespace gt
