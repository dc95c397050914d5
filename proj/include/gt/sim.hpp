#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gt/stages.hpp"

namespace gt {

// 95% Wilson score interval for a binomial proportion.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

Interval wilson_interval(uint32_t successes, uint32_t trials, double z = 1.959964);

struct ErrorStats {
  uint32_t trials = 0;
  uint32_t failures = 0;  // trials with fp + fn > 0
  double pe = 0.0;
  Interval pe_ci;
  double mean_tests = 0.0;
  std::array<double, kNumStages> mean_stage_tests{};
  double mean_fp = 0.0, mean_fn = 0.0;
  uint32_t max_fp = 0, max_fn = 0;
};

ErrorStats summarize(const std::vector<RunReport>& reports);

struct MonteCarloConfig {
  uint32_t trials = 100;
  uint64_t seed = 1;
  bool resample_defectives = true;  // false: one defective set shared by all trials
};

struct MonteCarloResult {
  ErrorStats stats;
  std::vector<RunReport> reports;  // one per trial, in trial order
};

// One full run. The trial seed is derived from (root seed, trial index), so
// any single trial can be replayed in isolation.
RunReport run_trial(uint32_t p, uint32_t k, double rho, const StageConfig& cfg,
                    uint64_t root_seed, uint32_t trial_index, bool resample_defectives);

MonteCarloResult monte_carlo(uint32_t p, uint32_t k, double rho, const StageConfig& cfg,
                             const MonteCarloConfig& mc);

// Parameter sweep: the cartesian product of the axes, Monte Carlo at each
// point. Axis names: p, k, theta, rho, budget_mult, or any numeric stage
// knob (epsilon, alpha1, alpha2, eta, nprime_mult, c_ncomp, c_ncomp_exact,
// c_check, c_tilde, delta, nu, screen_frac, code_frac, total_budget).
struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepSpec {
  uint32_t p = 1024;
  uint32_t k = 10;
  double rho = 0.0;
  StageConfig base;
  std::vector<SweepAxis> axes;
  uint32_t trials = 100;
  uint64_t seed = 1;
  bool resample_defectives = true;
};

struct SweepPoint {
  uint32_t index = 0;                    // flat index in the cartesian product
  std::map<std::string, double> coords;  // axis name -> value at this point
  uint32_t p = 0, k = 0;
  double rho = 0.0;
  double total_budget = 0.0;  // resolved budget (0 = formula mode)
  ErrorStats stats;
};

std::vector<SweepPoint> sweep(const SweepSpec& spec);

// Sets a StageConfig field by its sweep-axis name. Returns false if the name
// is not a config field.
bool set_config_field(StageConfig& cfg, const std::string& name, double value);

// Exhaustive maximum-likelihood decoding over every k-subset, using the
// pools and outcomes recorded in the ledger. Ties go to the lexically
// smallest subset. Requires a pool-storing ledger and C(p, k) <= limit.
std::vector<uint32_t> map_oracle(const TestLedger& ledger, uint32_t p, uint32_t k, double rho,
                                 uint64_t limit = 1000000);

// C(n, k) as a double; +inf on overflow.
double binomial(uint32_t n, uint32_t k);

}  // namespace gt
