#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gt/theory.hpp"

using namespace gt;
using doctest::Approx;

// Expected values below were worked out independently from the defining
// formulas and frozen before the implementation existed.

TEST_CASE("binary entropy endpoints and symmetry") {
  CHECK(binary_entropy_nats(0.0) == 0.0);
  CHECK(binary_entropy_nats(1.0) == 0.0);
  CHECK(binary_entropy_nats(0.5) == Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(binary_entropy_nats(0.2) == Approx(binary_entropy_nats(0.8)).epsilon(1e-14));
  CHECK_THROWS_AS(binary_entropy_nats(-0.01), std::domain_error);
  CHECK_THROWS_AS(binary_entropy_nats(1.01), std::domain_error);
}

TEST_CASE("entropy of 0.11 against hand-computed value") {
  // -0.11 ln 0.11 - 0.89 ln 0.89 = 0.3465153369193...
  CHECK(binary_entropy_nats(0.11) == Approx(0.3465153369193).epsilon(1e-11));
}

TEST_CASE("noise functionals at rho = 0.11") {
  NoiseFunctionals nf = noise_functionals(0.11);
  CHECK(nf.h2_nats == Approx(0.3465153369193).epsilon(1e-11));
  CHECK(nf.capacity_nats == Approx(0.3466318436406).epsilon(1e-10));
  CHECK(nf.kl_flip_nats == Approx(1.6307780556).epsilon(1e-9));
  CHECK(nf.h2_bits() == Approx(0.4999159584).epsilon(1e-7));
  CHECK(nf.capacity_bits() == Approx(0.5000840416).epsilon(1e-7));
}

TEST_CASE("noise functionals domain") {
  CHECK_THROWS_AS(noise_functionals(0.0), std::domain_error);
  CHECK_THROWS_AS(noise_functionals(0.5), std::domain_error);
  CHECK_THROWS_AS(noise_functionals(0.6), std::domain_error);
  CHECK_THROWS_AS(noise_functionals(-0.2), std::domain_error);
  CHECK_NOTHROW(noise_functionals(1e-9));
  CHECK_NOTHROW(noise_functionals(0.4999));
}

TEST_CASE("bernoulli KL basics") {
  CHECK(bernoulli_kl_nats(0.3, 0.3) == Approx(0.0).epsilon(1e-14));
  // KL(rho || 1-rho) is the flip separation
  CHECK(bernoulli_kl_nats(0.11, 0.89) == Approx(noise_functionals(0.11).kl_flip_nats).epsilon(1e-12));
  CHECK(bernoulli_kl_nats(0.2, 0.7) > 0.0);
}

TEST_CASE("converse test count at the standard point") {
  // 100 * ln(10^6 / 100) / capacity_nats(0.11) = 2657.096...
  CHECK(converse_tests(1e6, 100, 0.11) == Approx(2657.096).epsilon(2e-5));
  CHECK_THROWS_AS(converse_tests(100, 0, 0.11), std::domain_error);
  CHECK_THROWS_AS(converse_tests(100, 101, 0.11), std::domain_error);
}

TEST_CASE("multistage test count at the standard point") {
  // converse + 100 ln(100) / KL = 2657.096 + 282.391 = 2939.487
  CHECK(multistage_tests(1e6, 100, 0.11) == Approx(2939.487).epsilon(2e-5));
  CHECK(multistage_tests(1e6, 100, 0.11) > converse_tests(1e6, 100, 0.11));
}

TEST_CASE("converse rate is the capacity, independent of theta") {
  double cap = noise_functionals(0.11).capacity_bits();
  CHECK(rate_at(0.2, 0.11, BoundKind::Converse) == Approx(cap).epsilon(1e-12));
  CHECK(rate_at(0.9, 0.11, BoundKind::Converse) == Approx(cap).epsilon(1e-12));
}

TEST_CASE("multistage rate at theta 0.5, rho 0.11") {
  // (1/C + (theta/(1-theta))/D)^-1 in bits = 0.412421...
  CHECK(rate_at(0.5, 0.11, BoundKind::MultiStage) == Approx(0.412421).epsilon(3e-6));
}

TEST_CASE("rates at extreme parameters") {
  // nearly noiseless: converse rate approaches 1 bit/test
  CHECK(rate_at(0.5, 1e-4, BoundKind::Converse) == Approx(0.9985269).epsilon(3e-6));
  // vanishing theta: multistage rate approaches the converse rate
  double cap = noise_functionals(0.11).capacity_bits();
  CHECK(rate_at(0.01, 0.11, BoundKind::MultiStage) == Approx(cap).epsilon(0.005));
}

TEST_CASE("multistage rate decreases in theta") {
  double prev = rate_at(0.05, 0.11, BoundKind::MultiStage);
  for (double th = 0.15; th < 1.0; th += 0.1) {
    double cur = rate_at(th, 0.11, BoundKind::MultiStage);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("rate_at domain") {
  CHECK_THROWS_AS(rate_at(0.0, 0.11, BoundKind::MultiStage), std::domain_error);
  CHECK_THROWS_AS(rate_at(1.0, 0.11, BoundKind::MultiStage), std::domain_error);
  CHECK_THROWS_AS(rate_at(0.5, 0.0, BoundKind::MultiStage), std::domain_error);
}

TEST_CASE("rate_curve matches pointwise evaluation") {
  std::vector<double> thetas = {0.1, 0.33, 0.5, 0.77};
  auto pts = rate_curve(0.11, thetas, BoundKind::MultiStage);
  REQUIRE(pts.size() == thetas.size());
  for (size_t i = 0; i < thetas.size(); ++i) {
    CHECK(pts[i].theta == thetas[i]);
    CHECK(pts[i].rate_bits_per_test ==
          Approx(rate_at(thetas[i], 0.11, BoundKind::MultiStage)).epsilon(1e-14));
  }
}
