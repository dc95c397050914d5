#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "gt/sim.hpp"
#include "gt/theory.hpp"

using namespace gt;
using doctest::Approx;

TEST_CASE("wilson interval pins hand-computed endpoints") {
  // 3/100 at z = 1.959964: center 0.047387, half-width 0.037132
  Interval ci = wilson_interval(3, 100);
  CHECK(ci.lo == Approx(0.0102545).epsilon(2e-4));
  CHECK(ci.hi == Approx(0.0845195).epsilon(2e-4));

  CHECK(wilson_interval(0, 50).lo == Approx(0.0));
  CHECK(wilson_interval(50, 50).hi == Approx(1.0));
  Interval empty = wilson_interval(0, 0);
  CHECK(empty.lo == 0.0);
  CHECK(empty.hi == 1.0);

  // interval always contains the point estimate
  for (uint32_t f : {0u, 1u, 7u, 25u, 50u}) {
    Interval c = wilson_interval(f, 50);
    double phat = f / 50.0;
    CHECK(c.lo <= phat + 1e-12);
    CHECK(c.hi >= phat - 1e-12);
  }
}

TEST_CASE("summarize aggregates reports") {
  RunReport a, b;
  a.success = true;
  a.n_total = 100;
  a.n_per_stage = {50, 20, 10, 10, 10};
  a.fp = 0;
  a.fn = 0;
  b.success = false;
  b.n_total = 200;
  b.n_per_stage = {100, 40, 20, 20, 20};
  b.fp = 2;
  b.fn = 1;

  ErrorStats st = summarize({a, b});
  CHECK(st.trials == 2);
  CHECK(st.failures == 1);
  CHECK(st.pe == Approx(0.5));
  CHECK(st.mean_tests == Approx(150.0));
  CHECK(st.mean_stage_tests[0] == Approx(75.0));
  CHECK(st.mean_fp == Approx(1.0));
  CHECK(st.mean_fn == Approx(0.5));
  CHECK(st.max_fp == 2);
  CHECK(st.max_fn == 1);
}

TEST_CASE("run_trial is reproducible and trial-indexed") {
  StageConfig cfg;
  RunReport r1 = run_trial(128, 3, 0.05, cfg, 42, 7, true);
  RunReport r2 = run_trial(128, 3, 0.05, cfg, 42, 7, true);
  CHECK(r1.seed == r2.seed);
  CHECK(r1.estimate == r2.estimate);
  CHECK(r1.n_total == r2.n_total);

  RunReport r3 = run_trial(128, 3, 0.05, cfg, 42, 8, true);
  CHECK(r3.seed != r1.seed);
}

TEST_CASE("fixed defectives reuse one instance, resampling varies it") {
  StageConfig cfg;
  MonteCarloConfig mc;
  mc.trials = 40;
  mc.seed = 7;

  // noiseless with k=1 recovers the planted item exactly, making the
  // defective set visible through the estimate
  mc.resample_defectives = false;
  MonteCarloResult fixed = monte_carlo(1000, 1, 0.0, cfg, mc);
  std::set<std::vector<uint32_t>> fixed_sets;
  for (const RunReport& r : fixed.reports) fixed_sets.insert(r.estimate);
  CHECK(fixed_sets.size() == 1);

  mc.resample_defectives = true;
  MonteCarloResult vary = monte_carlo(1000, 1, 0.0, cfg, mc);
  std::set<std::vector<uint32_t>> vary_sets;
  for (const RunReport& r : vary.reports) vary_sets.insert(r.estimate);
  CHECK(vary_sets.size() > 5);
}

TEST_CASE("sweep enumerates the cartesian product deterministically") {
  SweepSpec spec;
  spec.p = 128;
  spec.k = 3;
  spec.rho = 0.05;
  spec.trials = 5;
  spec.seed = 99;
  spec.axes = {{"c_check", {2.0, 4.0}}, {"nu", {0.5, 0.6931471805599453, 0.9}}};

  auto pts = sweep(spec);
  REQUIRE(pts.size() == 6);
  for (uint32_t i = 0; i < 6; ++i) CHECK(pts[i].index == i);
  CHECK(pts[0].coords.at("c_check") == 2.0);
  CHECK(pts[0].coords.at("nu") == 0.5);
  CHECK(pts[1].coords.at("nu") == Approx(0.6931471805599453));
  CHECK(pts[3].coords.at("c_check") == 4.0);  // second block
  CHECK(pts[5].coords.at("nu") == 0.9);

  auto again = sweep(spec);
  for (size_t i = 0; i < pts.size(); ++i) {
    CHECK(again[i].stats.pe == pts[i].stats.pe);
    CHECK(again[i].stats.mean_tests == pts[i].stats.mean_tests);
  }
}

TEST_CASE("sweep handles theta and budget_mult axes") {
  SweepSpec spec;
  spec.p = 256;
  spec.rho = 0.08;
  spec.trials = 3;
  spec.seed = 5;
  spec.axes = {{"theta", {0.3, 0.5}}};
  auto pts = sweep(spec);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].k == k_from_theta(256, 0.3));
  CHECK(pts[1].k == k_from_theta(256, 0.5));

  spec.axes = {{"budget_mult", {3.0}}};
  spec.k = 4;
  auto bpts = sweep(spec);
  REQUIRE(bpts.size() == 1);
  CHECK(bpts[0].total_budget == Approx(3.0 * multistage_tests(256, 4, 0.08)));

  // budget multiples lean on the noisy bound, so rho = 0 is rejected
  spec.rho = 0.0;
  CHECK_THROWS_AS(sweep(spec), std::domain_error);
}

TEST_CASE("sweep rejects unknown axes, empty axes, and oversized grids") {
  SweepSpec spec;
  spec.k = 3;
  spec.axes = {{"bogus", {1.0}}};
  CHECK_THROWS_AS(sweep(spec), std::invalid_argument);

  spec.axes = {{"c_check", {}}};
  CHECK_THROWS_AS(sweep(spec), std::invalid_argument);

  std::vector<double> many(101, 1.0);
  spec.axes = {{"c_check", many}, {"nu", many}};  // 10201 points
  CHECK_THROWS_AS(sweep(spec), std::invalid_argument);
}

TEST_CASE("set_config_field maps names onto fields") {
  StageConfig cfg;
  CHECK(set_config_field(cfg, "epsilon", 0.7));
  CHECK(cfg.epsilon == 0.7);
  CHECK(set_config_field(cfg, "c_ncomp", 12.0));
  CHECK(cfg.c_ncomp == 12.0);
  CHECK(set_config_field(cfg, "total_budget", 500.0));
  CHECK(cfg.total_budget == 500.0);
  CHECK_FALSE(set_config_field(cfg, "nonsense", 1.0));
}

TEST_CASE("binomial coefficients") {
  CHECK(binomial(5, 2) == 10.0);
  CHECK(binomial(0, 0) == 1.0);
  CHECK(binomial(10, 11) == 0.0);
  CHECK(binomial(52, 5) == Approx(2598960.0));
  CHECK(std::isinf(binomial(3000, 1500)));
}

TEST_CASE("map_oracle finds the planted set from individual tests") {
  ProblemInstance inst = make_instance(10, 2, 0.0, 3);
  TestLedger ledger(true);
  Rng noise = make_rng(3, Stream::Noise);
  for (uint32_t item = 1; item <= 10; ++item) {
    std::vector<uint32_t> pool = {item};
    run_test(pool, inst, ledger, Stage::BinScreen, noise);
  }
  CHECK(map_oracle(ledger, 10, 2, 0.0) == inst.defectives);
}

TEST_CASE("map_oracle picks the best-agreeing subset under noise") {
  // hand-built: p = 4, k = 1, tests {1}:+, {2}:-, {1,2}:+, {3,4}:-
  // agreements: item1: 4, item2: 2, item3: 1... item4: 1 -> item 1 wins
  TestLedger ledger(true);
  ledger.append(Stage::BinScreen, std::vector<uint32_t>{1}, true);
  ledger.append(Stage::BinScreen, std::vector<uint32_t>{2}, false);
  ledger.append(Stage::BinScreen, std::vector<uint32_t>{1, 2}, true);
  ledger.append(Stage::BinScreen, std::vector<uint32_t>{3, 4}, false);
  CHECK(map_oracle(ledger, 4, 1, 0.1) == std::vector<uint32_t>{1});
}

TEST_CASE("map_oracle ties resolve to the lexically smallest subset") {
  TestLedger ledger(true);
  ledger.append(Stage::BinScreen, std::vector<uint32_t>{1, 2}, true);
  // items 1 and 2 are symmetric: {1} wins the tie against {2}
  CHECK(map_oracle(ledger, 3, 1, 0.1) == std::vector<uint32_t>{1});
}

TEST_CASE("map_oracle ranking ignores uninformative empty-pool tests") {
  ProblemInstance inst = make_instance(9, 2, 0.12, 31);
  TestLedger ledger(true);
  Rng noise = make_rng(77, Stream::Noise);
  Rng design = make_rng(78, Stream::Design);
  for (int t = 0; t < 25; ++t) {
    std::vector<uint32_t> pool;
    for (uint32_t item = 1; item <= 9; ++item)
      if (design.bernoulli(0.3)) pool.push_back(item);
    run_test(pool, inst, ledger, Stage::BinScreen, noise);
  }
  auto base = map_oracle(ledger, 9, 2, 0.12);

  ledger.append(Stage::BinScreen, std::vector<uint32_t>{}, false);
  CHECK(map_oracle(ledger, 9, 2, 0.12) == base);
}

TEST_CASE("map_oracle guards its domain") {
  TestLedger no_pools(false);
  no_pools.append(Stage::BinScreen, std::vector<uint32_t>{1}, true);
  CHECK_THROWS_AS(map_oracle(no_pools, 4, 1, 0.1), std::invalid_argument);

  TestLedger ok(true);
  ok.append(Stage::BinScreen, std::vector<uint32_t>{1}, true);
  CHECK_THROWS_AS(map_oracle(ok, 4, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(map_oracle(ok, 4, 1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(map_oracle(ok, 60, 30, 0.1), std::invalid_argument);  // too many subsets
}
