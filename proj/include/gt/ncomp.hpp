#pragma once

#include <cstdint>
#include <vector>

#include "gt/rng.hpp"

namespace gt {

enum class NcompMode { Exact, Approximate };

// Parameters of the Bernoulli-design threshold decoder. Each population
// member enters each test independently with probability nu / kmax.
struct NcompParams {
  double delta = 0.15;  // threshold margin; declared iff positives >= (1 - rho - delta) * inclusions
  double nu = 0.6931471805599453;
  uint32_t kmax = 1;  // defective count the design is sized against
  NcompMode mode = NcompMode::Approximate;
};

// Random test design over an abstract population 0..population-1. Rows list
// the included members in increasing order.
struct BernoulliDesign {
  uint32_t population = 0;
  uint32_t n = 0;
  double q = 0.0;
  std::vector<std::vector<uint32_t>> rows;
};

BernoulliDesign ncomp_design(uint32_t population, uint32_t n, const NcompParams& params,
                             Rng& rng);

// Per-member inclusion and positive-inclusion counts.
struct NcompStats {
  std::vector<uint32_t> included;       // tests containing the member
  std::vector<uint32_t> positive_incl;  // of those, tests with a positive outcome
};

NcompStats ncomp_stats(const BernoulliDesign& design, const std::vector<uint8_t>& outcomes);

// Members with at least one inclusion whose positive fraction clears the
// threshold 1 - rho - delta. Members never included are declared clean.
std::vector<uint32_t> ncomp_decode(const BernoulliDesign& design,
                                   const std::vector<uint8_t>& outcomes,
                                   const NcompParams& params, double rho);

// Diagnostic event counts against a known truth:
//   low_inclusion   members with included <= n q / 2
//   missed_defective defectives below threshold (or never included)
//   flagged_clean   non-defectives at or above threshold
// The decode rule itself uses only the threshold; low inclusion counts are
// informational.
struct NcompTelemetry {
  uint32_t low_inclusion = 0;
  uint32_t missed_defective = 0;
  uint32_t flagged_clean = 0;
};

NcompTelemetry ncomp_telemetry(const BernoulliDesign& design,
                               const std::vector<uint8_t>& outcomes,
                               const NcompParams& params, double rho,
                               const std::vector<uint32_t>& truth);

// Test budget for approximate recovery of k defectives out of a population:
// ceil(c * k * log(population / k)).
uint32_t approx_tests_needed(uint32_t k, uint32_t population, double alpha, double c);

// Configuration-time feasibility: the positive-rate gap between a defective
// member (1 - rho) and a member riding on a saturated design
// (rho + (1 - 2 rho)(1 - e^{-nu})) must be at least delta. Throws otherwise.
void validate_ncomp_params(const NcompParams& params, double rho);

}  // namespace gt
