#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gt/codes.hpp"
#include "gt/core.hpp"
#include "gt/ncomp.hpp"
#include "gt/rng.hpp"

namespace gt {

// Every constant the procedure needs that is not determined by (p, k, rho).
// Defaults were frozen from the calibration runs shipped under the
// `calibrate` command; see README for the protocol.
struct StageConfig {
  double epsilon = 0.55;     // bin count exponent: B = round(k^(1+epsilon))
  double alpha1 = 0.15;      // first-stage mistake budget, as a fraction of k
  double alpha2 = 0.20;      // recheck keeps k - ceil(alpha2 * k) candidates
  double eta = 0.5;          // code length slack
  double nprime_mult = 1.8;  // multiplier on the required code length
  double c_ncomp = 27.0;        // bin screen test constant (approximate recovery)
  double c_ncomp_exact = 30.0;  // missed-defective sweep constant (exact recovery)
  double c_check = 4.0;         // recheck repetitions constant
  double c_tilde = 4.0;         // final vote repetitions constant
  double delta = -1.0;          // threshold margin; < 0 derives clamp((1/2-rho)/2, 0.02, 0.15)
  double nu = 0.6931471805599453;  // design density: inclusion probability nu/kmax

  // Budget mode: when total_budget > 0 the per-stage test counts are derived
  // from it instead of the formulas above. screen_frac and code_frac are the
  // shares handed to the first two rounds; the remainder is split across the
  // clean-up stages in proportion to their formula-mode sizes.
  double total_budget = 0.0;
  double screen_frac = 0.35;
  double code_frac = 0.30;

  bool store_pools = false;  // keep full pools in the ledger (memory-heavy)

  double resolve_delta(double rho) const;
};

// Concrete per-stage test counts for one run.
struct StagePlan {
  uint32_t bins = 0;        // B
  uint32_t n_screen = 0;    // bin screen tests
  uint32_t n_code = 0;      // code rows per flagged bin
  uint32_t n_sweep = 0;     // sweep tests
  uint32_t n_check = 0;     // individual tests per recheck candidate
  uint32_t n_vote = 0;      // individual tests per final-vote candidate (odd)
  uint32_t kmax_sweep = 0;  // defective bound the sweep design is sized for
  double delta = 0.0;       // resolved threshold margin
};

StagePlan plan_stages(uint32_t p, uint32_t k, double rho, const StageConfig& cfg);

// Uniformly random balanced partition of {1..p} into B bins (sizes differ by
// at most one).
struct BinAssignment {
  std::vector<std::vector<uint32_t>> bins;
  std::vector<uint32_t> bin_of;  // size p + 1, indexed by item id
};

BinAssignment partition_bins(uint32_t p, uint32_t B, Rng& rng);

// Number of defectives that share a bin with another defective.
uint32_t collision_count(const BinAssignment& assign, const ProblemInstance& inst);

// Bin screen: threshold decoding over bins treated as super-items. Returns
// the flagged bin indices, ascending.
std::vector<uint32_t> identify_defective_bins(const BinAssignment& assign,
                                              const ProblemInstance& inst,
                                              const StagePlan& plan,
                                              const StageConfig& cfg, TestLedger& ledger,
                                              Rng& design_rng, Rng& noise_rng);

// Outcome of the first two rounds plus the bookkeeping used to attribute
// every first-stage mistake to its cause.
struct InnerResult {
  std::vector<uint32_t> s1;       // one decoded item per flagged bin, sorted
  std::vector<uint32_t> flagged;  // flagged bins
  uint32_t bins_defective = 0;    // bins holding at least one defective
  uint32_t n_col = 0;
  uint32_t bin_fp = 0, bin_fn = 0;
  // s1 false negatives: defective in an unflagged bin / lost to a bin mate /
  // lost to a decode error in a single-defective bin.
  uint32_t fn_missed_bin = 0, fn_collision = 0, fn_decode = 0;
  // s1 false positives: decoded from a defective-free bin / from a collision
  // bin / from a decode error in a single-defective bin.
  uint32_t fp_empty_bin = 0, fp_collision = 0, fp_decode = 0;
};

InnerResult inner_adaptive(const ProblemInstance& inst, const StageConfig& cfg,
                           const StagePlan& plan, TestLedger& ledger, uint64_t root_seed,
                           Rng& noise_rng);

// Sweep for defectives outside s1: exact-mode threshold decoding over the
// complement population.
std::vector<uint32_t> sweep_missed(const std::vector<uint32_t>& s1,
                                   const ProblemInstance& inst, const StagePlan& plan,
                                   const StageConfig& cfg, TestLedger& ledger,
                                   Rng& design_rng, Rng& noise_rng);

struct RecheckResult {
  std::vector<uint32_t> kept;      // sorted
  std::vector<uint32_t> residual;  // s1 minus kept, sorted
};

// Tests every s1 candidate individually n_check times and keeps the
// min(|s1|, k - ceil(alpha2 k)) items with the most positives (ties to the
// smaller item id).
RecheckResult recheck_candidates(const std::vector<uint32_t>& s1, const ProblemInstance& inst,
                                 const StagePlan& plan, const StageConfig& cfg,
                                 TestLedger& ledger, Rng& noise_rng);

// Majority vote over n_vote individual tests per residual candidate.
std::vector<uint32_t> final_vote(const std::vector<uint32_t>& residual,
                                 const ProblemInstance& inst, const StagePlan& plan,
                                 TestLedger& ledger, Rng& noise_rng);

struct RunReport {
  uint32_t p = 0, k = 0;
  double rho = 0.0;
  uint64_t seed = 0;

  uint32_t n_total = 0;
  std::array<uint32_t, kNumStages> n_per_stage{};
  uint32_t fp = 0, fn = 0;
  bool success = false;

  uint32_t s1_size = 0, s1_fp = 0, s1_fn = 0;
  uint32_t bins = 0, bins_defective = 0, bins_flagged = 0;
  uint32_t bin_fp = 0, bin_fn = 0, n_col = 0;
  uint32_t fn_missed_bin = 0, fn_collision = 0, fn_decode = 0;
  uint32_t fp_empty_bin = 0, fp_collision = 0, fp_decode = 0;

  StagePlan plan;
  int adaptive_rounds = 0;    // protocol rounds executed; a round may issue zero tests
  int rounds_with_tests = 0;  // ledger rounds that issued at least one test

  std::vector<uint32_t> estimate;
};

// Runs all four rounds against the instance. The ledger, if supplied, is
// filled with every executed test.
RunReport full_algorithm(const ProblemInstance& inst, const StageConfig& cfg,
                         uint64_t root_seed, TestLedger* ledger_out = nullptr);

std::string report_to_json(const RunReport& r, int indent = -1);

}  // namespace gt
