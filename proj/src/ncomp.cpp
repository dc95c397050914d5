#include "gt/ncomp.hpp"

#include <cmath>
#include <stdexcept>

namespace gt {

BernoulliDesign ncomp_design(uint32_t population, uint32_t n, const NcompParams& params,
                             Rng& rng) {
  if (population == 0) throw std::invalid_argument("ncomp_design: empty population");
  if (params.kmax == 0) throw std::invalid_argument("ncomp_design: kmax must be positive");
  double q = params.nu / params.kmax;
  if (q <= 0.0 || q > 1.0)
    throw std::invalid_argument("ncomp_design: inclusion probability outside (0, 1]");
  BernoulliDesign d;
  d.population = population;
  d.n = n;
  d.q = q;
  d.rows.resize(n);
  for (uint32_t t = 0; t < n; ++t) {
    auto& row = d.rows[t];
    if (q >= 1.0) {
      row.resize(population);
      for (uint32_t j = 0; j < population; ++j) row[j] = j;
      continue;
    }
    uint64_t pos = rng.geometric_skip(q);
    while (pos < population) {
      row.push_back(static_cast<uint32_t>(pos));
      pos += 1 + rng.geometric_skip(q);
    }
  }
  return d;
}

NcompStats ncomp_stats(const BernoulliDesign& design, const std::vector<uint8_t>& outcomes) {
  if (outcomes.size() != design.n)
    throw std::invalid_argument("ncomp_stats: outcome count does not match design");
  NcompStats s;
  s.included.assign(design.population, 0);
  s.positive_incl.assign(design.population, 0);
  for (uint32_t t = 0; t < design.n; ++t) {
    bool y = outcomes[t] != 0;
    for (uint32_t j : design.rows[t]) {
      s.included[j] += 1;
      if (y) s.positive_incl[j] += 1;
    }
  }
  return s;
}

std::vector<uint32_t> ncomp_decode(const BernoulliDesign& design,
                                   const std::vector<uint8_t>& outcomes,
                                   const NcompParams& params, double rho) {
  NcompStats s = ncomp_stats(design, outcomes);
  double thr = 1.0 - rho - params.delta;
  std::vector<uint32_t> declared;
  for (uint32_t j = 0; j < design.population; ++j) {
    if (s.included[j] == 0) continue;
    if (static_cast<double>(s.positive_incl[j]) >= thr * static_cast<double>(s.included[j]))
      declared.push_back(j);
  }
  return declared;
}

NcompTelemetry ncomp_telemetry(const BernoulliDesign& design,
                               const std::vector<uint8_t>& outcomes,
                               const NcompParams& params, double rho,
                               const std::vector<uint32_t>& truth) {
  NcompStats s = ncomp_stats(design, outcomes);
  std::vector<uint8_t> is_defective(design.population, 0);
  for (uint32_t j : truth) {
    if (j >= design.population) throw std::invalid_argument("ncomp_telemetry: truth index out of range");
    is_defective[j] = 1;
  }
  double thr = 1.0 - rho - params.delta;
  double low = static_cast<double>(design.n) * design.q / 2.0;
  NcompTelemetry t;
  for (uint32_t j = 0; j < design.population; ++j) {
    bool over = s.included[j] > 0 &&
                static_cast<double>(s.positive_incl[j]) >= thr * static_cast<double>(s.included[j]);
    if (static_cast<double>(s.included[j]) <= low) t.low_inclusion += 1;
    if (is_defective[j] && !over) t.missed_defective += 1;
    if (!is_defective[j] && over) t.flagged_clean += 1;
  }
  return t;
}

uint32_t approx_tests_needed(uint32_t k, uint32_t population, double alpha, double c) {
  if (k == 0 || k >= population)
    throw std::invalid_argument("approx_tests_needed: need 0 < k < population");
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("approx_tests_needed: alpha must lie in (0, 1)");
  if (c <= 0.0) throw std::invalid_argument("approx_tests_needed: c must be positive");
  double n = c * static_cast<double>(k) *
             std::log(static_cast<double>(population) / static_cast<double>(k));
  return static_cast<uint32_t>(std::ceil(n));
}

void validate_ncomp_params(const NcompParams& params, double rho) {
  if (rho < 0.0 || rho >= 0.5)
    throw std::invalid_argument("validate_ncomp_params: rho must lie in [0, 1/2)");
  if (params.delta <= 0.0 || params.delta >= 0.5 - rho)
    throw std::invalid_argument("validate_ncomp_params: delta must lie in (0, 1/2 - rho)");
  if (params.nu <= 0.0) throw std::invalid_argument("validate_ncomp_params: nu must be positive");
  double saturated = rho + (1.0 - 2.0 * rho) * (1.0 - std::exp(-params.nu));
  double gap = (1.0 - rho) - saturated;
  if (gap < params.delta)
    throw std::invalid_argument(
        "validate_ncomp_params: threshold margin exceeds the defective/clean rate gap");
}

}  // namespace gt
