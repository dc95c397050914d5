#include "gt/codes.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "gt/theory.hpp"

namespace gt {

uint32_t required_code_length(double p, double B, double rho, double eta) {
  if (!(p > 0.0) || !(B > 0.0)) throw std::invalid_argument("required_code_length: p, B must be positive");
  if (B >= p) throw std::invalid_argument("required_code_length: need B < p");
  if (eta < 0.0) throw std::invalid_argument("required_code_length: eta must be >= 0");
  if (rho < 0.0 || rho >= 0.5)
    throw std::invalid_argument("required_code_length: rho must lie in [0, 1/2)");
  double ratio = std::log(p / B);
  double n;
  if (rho == 0.0) {
    n = (1.0 + eta) * ratio / std::numbers::ln2;
  } else {
    n = (1.0 + eta) * ratio / noise_functionals(rho).capacity_nats;
  }
  return static_cast<uint32_t>(std::ceil(n));
}

Codebook build_codebook(uint32_t p_prime, uint32_t n_prime, Rng& rng) {
  if (p_prime == 0) throw std::invalid_argument("build_codebook: p_prime must be positive");
  if (n_prime == 0) throw std::invalid_argument("build_codebook: n_prime must be positive");
  if (n_prime < 63 && (uint64_t{1} << n_prime) < p_prime)
    throw std::invalid_argument("build_codebook: p_prime distinct columns do not fit in n_prime bits");

  Codebook cb;
  cb.n_rows = n_prime;
  cb.columns.reserve(p_prime);
  std::set<std::vector<uint64_t>> seen;
  const int kMaxRetries = 10000;
  for (uint32_t j = 0; j < p_prime; ++j) {
    Bits col(n_prime);
    int tries = 0;
    for (;;) {
      for (auto& w : col.words()) w = rng.u64();
      col.trim();
      if (seen.insert(col.words()).second) break;
      if (++tries >= kMaxRetries)
        throw std::runtime_error("build_codebook: could not find a distinct column");
    }
    cb.columns.push_back(std::move(col));
  }
  return cb;
}

Bits run_bin_tests(std::span<const uint32_t> bin_items, const Codebook& cb,
                   const ProblemInstance& inst, TestLedger& ledger, Rng& noise_rng) {
  if (bin_items.size() != cb.columns.size())
    throw std::invalid_argument("run_bin_tests: bin size does not match codebook width");
  Bits received(cb.n_rows);
  std::vector<uint32_t> pool;
  pool.reserve(bin_items.size());
  for (uint32_t t = 0; t < cb.n_rows; ++t) {
    pool.clear();
    for (uint32_t j = 0; j < bin_items.size(); ++j)
      if (cb.columns[j].test(t)) pool.push_back(bin_items[j]);
    bool y = run_test(pool, inst, ledger, Stage::BinDecode, noise_rng);
    received.set(t, y);
  }
  return received;
}

uint32_t ml_decode(const Bits& received, const Codebook& cb) {
  if (cb.columns.empty()) throw std::invalid_argument("ml_decode: empty codebook");
  uint32_t best = 0;
  std::size_t best_d = Bits::hamming(received, cb.columns[0]);
  for (uint32_t j = 1; j < cb.columns.size(); ++j) {
    std::size_t d = Bits::hamming(received, cb.columns[j]);
    if (d < best_d) {
      best = j;
      best_d = d;
    }
  }
  return best;
}

}  // namespace gt
