#include <doctest.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "gt/ncomp.hpp"

using namespace gt;

namespace {

BernoulliDesign tiny_design() {
  // population 3, rows listing included members
  BernoulliDesign d;
  d.population = 3;
  d.n = 3;
  d.q = 0.5;
  d.rows = {{0, 1}, {1}, {0, 2}};
  return d;
}

}  // namespace

TEST_CASE("ncomp_design rows are sorted, unique, in range, dense as q") {
  NcompParams params;
  params.nu = 0.6931471805599453;
  params.kmax = 4;  // q = ln2 / 4 = 0.1733
  Rng rng = make_rng(2, Stream::Design);
  BernoulliDesign d = ncomp_design(500, 400, params, rng);
  CHECK(d.population == 500);
  CHECK(d.n == 400);
  CHECK(d.q == doctest::Approx(0.6931471805599453 / 4.0));

  uint64_t total = 0;
  for (const auto& row : d.rows) {
    CHECK(std::is_sorted(row.begin(), row.end()));
    CHECK(std::adjacent_find(row.begin(), row.end()) == row.end());
    if (!row.empty()) CHECK(row.back() < 500);
    total += row.size();
  }
  double frac = static_cast<double>(total) / (500.0 * 400.0);
  CHECK(frac > d.q * 0.95);
  CHECK(frac < d.q * 1.05);

  Rng rng2 = make_rng(2, Stream::Design);
  BernoulliDesign d2 = ncomp_design(500, 400, params, rng2);
  CHECK(d2.rows == d.rows);
}

TEST_CASE("ncomp_design saturates at q = 1 and rejects q > 1") {
  NcompParams params;
  params.nu = 1.0;
  params.kmax = 1;  // q = 1: every member in every test
  Rng rng = make_rng(3, Stream::Design);
  BernoulliDesign d = ncomp_design(20, 5, params, rng);
  for (const auto& row : d.rows) CHECK(row.size() == 20);

  params.nu = 1.5;  // q = 1.5 is not a probability
  CHECK_THROWS_AS(ncomp_design(20, 5, params, rng), std::invalid_argument);
}

TEST_CASE("ncomp_stats counts inclusions and positive inclusions") {
  BernoulliDesign d = tiny_design();
  std::vector<uint8_t> outcomes = {1, 0, 1};
  NcompStats st = ncomp_stats(d, outcomes);
  CHECK(st.included == std::vector<uint32_t>{2, 2, 1});
  CHECK(st.positive_incl == std::vector<uint32_t>{2, 1, 1});

  std::vector<uint8_t> bad = {1, 0};
  CHECK_THROWS_AS(ncomp_stats(d, bad), std::invalid_argument);
}

TEST_CASE("ncomp_decode applies the positive-fraction threshold") {
  BernoulliDesign d;
  d.population = 3;
  d.n = 4;
  d.q = 0.5;
  d.rows = {{0, 1}, {0, 1}, {0, 1}, {0, 1}};
  NcompParams params;
  params.delta = 0.15;  // threshold 1 - 0.1 - 0.15 = 0.75 with rho = 0.1

  // member 0 and 1 both see 3/4 = 0.75 positives: exactly at threshold
  std::vector<uint8_t> outcomes = {1, 1, 1, 0};
  auto flagged = ncomp_decode(d, outcomes, params, 0.1);
  CHECK(flagged == std::vector<uint32_t>{0, 1});  // member 2 never included

  // 2/4 = 0.5 below threshold
  outcomes = {1, 1, 0, 0};
  flagged = ncomp_decode(d, outcomes, params, 0.1);
  CHECK(flagged.empty());
}

TEST_CASE("ncomp_decode is invariant to test order") {
  NcompParams params;
  params.delta = 0.1;
  params.nu = 0.6931471805599453;
  params.kmax = 3;
  Rng rng = make_rng(8, Stream::Design);
  BernoulliDesign d = ncomp_design(30, 60, params, rng);
  Rng orng = make_rng(9, Stream::Noise);
  std::vector<uint8_t> outcomes(d.n);
  for (auto& o : outcomes) o = orng.bernoulli(0.4) ? 1 : 0;

  auto base = ncomp_decode(d, outcomes, params, 0.2);

  // reverse the rows together with the outcomes
  BernoulliDesign rev = d;
  std::reverse(rev.rows.begin(), rev.rows.end());
  std::vector<uint8_t> rev_out(outcomes.rbegin(), outcomes.rend());
  CHECK(ncomp_decode(rev, rev_out, params, 0.2) == base);
}

TEST_CASE("flipping an outcome positive can only grow the flagged set") {
  NcompParams params;
  params.delta = 0.1;
  params.nu = 0.6931471805599453;
  params.kmax = 3;
  Rng rng = make_rng(14, Stream::Design);
  BernoulliDesign d = ncomp_design(25, 40, params, rng);
  Rng orng = make_rng(15, Stream::Noise);
  std::vector<uint8_t> outcomes(d.n);
  for (auto& o : outcomes) o = orng.bernoulli(0.35) ? 1 : 0;

  auto base = ncomp_decode(d, outcomes, params, 0.2);
  for (uint32_t t = 0; t < d.n; ++t) {
    if (outcomes[t]) continue;
    std::vector<uint8_t> bumped = outcomes;
    bumped[t] = 1;
    auto grown = ncomp_decode(d, bumped, params, 0.2);
    CHECK(std::includes(grown.begin(), grown.end(), base.begin(), base.end()));
  }
}

TEST_CASE("ncomp telemetry attributes events against the truth") {
  BernoulliDesign d = tiny_design();
  d.q = 0.9;  // n q / 2 = 1.35, so member 2 with one inclusion is low
  NcompParams params;
  params.delta = 0.15;

  // truth: member 0 defective. outcomes make member 1 clear the threshold too.
  std::vector<uint8_t> outcomes = {1, 1, 0};
  std::vector<uint32_t> truth = {0};
  NcompTelemetry tel = ncomp_telemetry(d, outcomes, params, 0.1, truth);
  // member 0: 1/2 positives = 0.5 < 0.75 threshold -> missed
  CHECK(tel.missed_defective == 1);
  // member 1: 2/2 = 1.0 >= 0.75, not in truth -> flagged clean
  CHECK(tel.flagged_clean == 1);
  CHECK(tel.low_inclusion == 1);
}

TEST_CASE("approx_tests_needed pins the formula") {
  // ceil(27 * 50 * ln(239/50)) = ceil(2111.99) = 2112
  CHECK(approx_tests_needed(50, 239, 0.05, 27.0) == 2112);
  // ceil(15 * 1 * ln 100) = 70
  CHECK(approx_tests_needed(1, 100, 0.1, 15.0) == 70);
  CHECK_THROWS_AS(approx_tests_needed(0, 100, 0.1, 15.0), std::invalid_argument);
  CHECK_THROWS_AS(approx_tests_needed(100, 100, 0.1, 15.0), std::invalid_argument);
  CHECK_THROWS_AS(approx_tests_needed(5, 100, 0.0, 15.0), std::invalid_argument);
  CHECK_THROWS_AS(approx_tests_needed(5, 100, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("validate_ncomp_params accepts sane setups and rejects broken ones") {
  NcompParams params;
  params.delta = 0.15;
  params.nu = 0.6931471805599453;
  params.kmax = 10;
  CHECK_NOTHROW(validate_ncomp_params(params, 0.11));
  CHECK_NOTHROW(validate_ncomp_params(params, 0.0));

  NcompParams big = params;
  big.delta = 0.45;  // larger than 1/2 - rho
  CHECK_THROWS_AS(validate_ncomp_params(big, 0.11), std::invalid_argument);

  NcompParams tight = params;  // gap (1-2 rho) e^{-nu} = 0.01 < delta
  CHECK_THROWS_AS(validate_ncomp_params(tight, 0.49), std::invalid_argument);

  NcompParams bad_nu = params;
  bad_nu.nu = 0.0;
  CHECK_THROWS_AS(validate_ncomp_params(bad_nu, 0.11), std::invalid_argument);

  CHECK_THROWS_AS(validate_ncomp_params(params, 0.5), std::invalid_argument);
}
