#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gt/bits.hpp"
#include "gt/core.hpp"
#include "gt/rng.hpp"

namespace gt {

// Column-major binary codebook: one column per candidate item, one row per
// test. Columns are i.i.d. fair-coin words, resampled until distinct.
struct Codebook {
  uint32_t n_rows = 0;
  std::vector<Bits> columns;  // each of length n_rows

  uint32_t n_cols() const { return static_cast<uint32_t>(columns.size()); }
};

// Smallest code length with slack eta for isolating one defective among
// p/B candidates: ceil((1 + eta) * log(p/B) / capacity_nats), or
// ceil((1 + eta) * log2(p/B)) when rho = 0.
uint32_t required_code_length(double p, double B, double rho, double eta);

// Throws if p_prime columns cannot be distinct in n_prime bits, or if the
// bounded resampling budget is exhausted.
Codebook build_codebook(uint32_t p_prime, uint32_t n_prime, Rng& rng);

// Runs one test per codebook row against the instance: row t's pool is the
// set of bin items whose column has bit t set. Returns the received word.
Bits run_bin_tests(std::span<const uint32_t> bin_items, const Codebook& cb,
                   const ProblemInstance& inst, TestLedger& ledger, Rng& noise_rng);

// Index of the column nearest to the received word in Hamming distance,
// smallest index on ties.
uint32_t ml_decode(const Bits& received, const Codebook& cb);

}  // namespace gt
