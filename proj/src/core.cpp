#include "gt/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gt {

std::vector<uint32_t> sample_defective_set(uint32_t p, uint32_t k, Rng& rng) {
  if (k > p) throw std::invalid_argument("sample_defective_set: k exceeds p");
  std::vector<uint32_t> items(p);
  std::iota(items.begin(), items.end(), 1u);
  // Partial Fisher-Yates: after i swaps the prefix holds a uniform i-subset.
  for (uint32_t i = 0; i < k; ++i) {
    uint32_t j = i + static_cast<uint32_t>(rng.below(p - i));
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  std::sort(items.begin(), items.end());
  return items;
}

ProblemInstance make_instance(uint32_t p, uint32_t k, double rho, uint64_t root_seed) {
  if (p == 0) throw std::invalid_argument("make_instance: p must be positive");
  if (k == 0 || k > p) throw std::invalid_argument("make_instance: need 1 <= k <= p");
  if (rho < 0.0 || rho >= 0.5)
    throw std::invalid_argument("make_instance: rho must lie in [0, 1/2)");
  ProblemInstance inst;
  inst.p = p;
  inst.k = k;
  inst.rho = rho;
  Rng rng = make_rng(root_seed, Stream::DefectiveSet);
  inst.defectives = sample_defective_set(p, k, rng);
  inst.defective_mask = Bits(p + 1);
  for (uint32_t d : inst.defectives) inst.defective_mask.set(d);
  return inst;
}

uint32_t k_from_theta(uint32_t p, double theta) {
  if (theta <= 0.0 || theta >= 1.0)
    throw std::invalid_argument("k_from_theta: theta must lie in (0, 1)");
  double k = std::round(std::pow(static_cast<double>(p), theta));
  if (k < 1.0) k = 1.0;
  if (k > static_cast<double>(p)) k = static_cast<double>(p);
  return static_cast<uint32_t>(k);
}

uint32_t TestLedger::append(Stage stage, std::span<const uint32_t> pool, bool outcome) {
  int r = round_of(stage);
  if (r < max_round_)
    throw std::logic_error("TestLedger: test issued for an already-closed round");
  max_round_ = r;
  TestRecord rec;
  rec.seq = static_cast<uint32_t>(records_.size()) + 1;
  rec.stage = stage;
  rec.pool_size = static_cast<uint32_t>(pool.size());
  rec.outcome = outcome;
  if (store_pools_) rec.pool.assign(pool.begin(), pool.end());
  stage_counts_[static_cast<int>(stage)] += 1;
  records_.push_back(std::move(rec));
  return rec.seq;
}

int TestLedger::rounds_used() const {
  std::array<bool, 5> seen{};
  for (int s = 0; s < kNumStages; ++s)
    if (stage_counts_[s] > 0) seen[round_of(static_cast<Stage>(s))] = true;
  int n = 0;
  for (int r = 1; r <= 4; ++r) n += seen[r] ? 1 : 0;
  return n;
}

bool run_test(std::span<const uint32_t> pool, const ProblemInstance& inst,
              TestLedger& ledger, Stage stage, Rng& noise_rng) {
  bool hit = false;
  for (uint32_t item : pool) {
    if (inst.defective_mask.test(item)) {
      hit = true;
      break;
    }
  }
  bool outcome = hit;
  if (inst.rho > 0.0 && noise_rng.bernoulli(inst.rho)) outcome = !outcome;
  ledger.append(stage, pool, outcome);
  return outcome;
}

Mistakes mistakes(std::span<const uint32_t> estimate, std::span<const uint32_t> truth) {
  Mistakes m;
  std::size_t i = 0, j = 0;
  while (i < estimate.size() && j < truth.size()) {
    if (estimate[i] == truth[j]) {
      ++i, ++j;
    } else if (estimate[i] < truth[j]) {
      ++m.fp, ++i;
    } else {
      ++m.fn, ++j;
    }
  }
  m.fp += static_cast<uint32_t>(estimate.size() - i);
  m.fn += static_cast<uint32_t>(truth.size() - j);
  return m;
}

}  // namespace gt
