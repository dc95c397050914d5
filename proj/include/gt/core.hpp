#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gt/bits.hpp"
#include "gt/rng.hpp"

namespace gt {

// Stages of the testing procedure, in the order they may issue tests.
// BinScreen and BinDecode are separate adaptive rounds; SweepMissed and
// Recheck run inside the same round; FinalVote is the last round.
enum class Stage : int {
  BinScreen = 0,   // which bins contain at least one defective
  BinDecode = 1,   // one-defective recovery inside each flagged bin
  SweepMissed = 2, // search for defectives outside the first-stage estimate
  Recheck = 3,     // individual re-testing of first-stage candidates
  FinalVote = 4,   // majority re-test of the candidates not kept by Recheck
};

inline constexpr int kNumStages = 5;
inline constexpr std::array<const char*, kNumStages> kStageNames = {
    "bin_screen", "bin_decode", "sweep_missed", "recheck", "final_vote"};

// Adaptive round a stage belongs to (1-based). SweepMissed and Recheck share
// a round: neither depends on the other's outcomes.
inline int round_of(Stage s) {
  switch (s) {
    case Stage::BinScreen: return 1;
    case Stage::BinDecode: return 2;
    case Stage::SweepMissed:
    case Stage::Recheck: return 3;
    case Stage::FinalVote: return 4;
  }
  return 0;
}

// One instance of the recovery problem. Items are numbered 1..p; exactly k
// of them are defective. rho is the probability that a test outcome is
// flipped, independently per test; rho = 0 means noiseless.
struct ProblemInstance {
  uint32_t p = 0;
  uint32_t k = 0;
  double rho = 0.0;
  double theta = -1.0;  // informational; < 0 when the instance was built from explicit k
  std::vector<uint32_t> defectives;  // sorted, 1-based
  Bits defective_mask;               // size p + 1, indexed by item id

  bool is_defective(uint32_t item) const { return defective_mask.test(item); }
};

// Uniformly random k-subset of {1..p}, sorted.
std::vector<uint32_t> sample_defective_set(uint32_t p, uint32_t k, Rng& rng);

ProblemInstance make_instance(uint32_t p, uint32_t k, double rho, uint64_t root_seed);

// k derived from the sparsity exponent: k = round(p^theta), clamped to [1, p].
uint32_t k_from_theta(uint32_t p, double theta);

struct TestRecord {
  uint32_t seq = 0;  // 1-based position in the ledger
  Stage stage = Stage::BinScreen;
  uint32_t pool_size = 0;
  bool outcome = false;
  std::vector<uint32_t> pool;  // item ids; kept only when the ledger stores pools
};

// Append-only record of every executed test; the single source of truth for
// how many tests a run used. Rejects tests whose stage would move to an
// earlier adaptive round than one already present.
class TestLedger {
 public:
  explicit TestLedger(bool store_pools = true) : store_pools_(store_pools) {}

  uint32_t append(Stage stage, std::span<const uint32_t> pool, bool outcome);

  const std::vector<TestRecord>& records() const { return records_; }
  uint32_t total() const { return static_cast<uint32_t>(records_.size()); }
  uint32_t stage_count(Stage s) const { return stage_counts_[static_cast<int>(s)]; }
  const std::array<uint32_t, kNumStages>& stage_counts() const { return stage_counts_; }

  // Distinct adaptive rounds that issued at least one test.
  int rounds_used() const;

  bool stores_pools() const { return store_pools_; }

 private:
  bool store_pools_;
  int max_round_ = 0;
  std::array<uint32_t, kNumStages> stage_counts_{};
  std::vector<TestRecord> records_;
};

// Executes one pooled test against the instance: the raw result is positive
// iff the pool contains a defective, then the result is flipped with
// probability rho using noise_rng. The test is appended to the ledger.
bool run_test(std::span<const uint32_t> pool, const ProblemInstance& inst,
              TestLedger& ledger, Stage stage, Rng& noise_rng);

struct Mistakes {
  uint32_t fp = 0;
  uint32_t fn = 0;
};

// Set differences between a sorted estimate and the sorted truth.
Mistakes mistakes(std::span<const uint32_t> estimate, std::span<const uint32_t> truth);

}  // namespace gt
