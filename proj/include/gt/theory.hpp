#pragma once

#include <cstdint>
#include <vector>

namespace gt {

// All internal entropy quantities are in nats; *_bits accessors convert.

// Binary entropy H(x) in nats, defined on [0, 1] with 0 log 0 = 0.
double binary_entropy_nats(double x);

// KL divergence between Bernoulli(a) and Bernoulli(b) in nats.
double bernoulli_kl_nats(double a, double b);

struct NoiseFunctionals {
  double h2_nats = 0.0;        // entropy of the flip probability
  double capacity_nats = 0.0;  // log 2 - h2
  double kl_flip_nats = 0.0;   // KL(rho || 1 - rho) = (1 - 2 rho) log((1-rho)/rho)

  double h2_bits() const;
  double capacity_bits() const;
  double kl_flip_bits() const;
};

// Requires 0 < rho < 1/2; throws std::domain_error otherwise.
NoiseFunctionals noise_functionals(double rho);

// Minimum number of tests below which exact recovery fails with probability
// bounded away from zero: k log(p/k) / capacity.
double converse_tests(double p, double k, double rho);

// Leading-order test count of the four-stage procedure implemented here:
// converse_tests + k log k / KL(rho || 1 - rho).
double multistage_tests(double p, double k, double rho);

enum class BoundKind { Converse, MultiStage };

struct BoundPoint {
  double theta = 0.0;
  double rate_bits_per_test = 0.0;
  BoundKind which = BoundKind::Converse;
};

// Rate in bits per test as a function of the sparsity exponent theta.
// Converse: 1 - h2(rho) in bits, constant in theta.
// MultiStage: [1/capacity_bits + (theta/(1-theta))/kl_bits]^{-1}.
double rate_at(double theta, double rho, BoundKind which);

std::vector<BoundPoint> rate_curve(double rho, const std::vector<double>& thetas,
                                   BoundKind which);

}  // namespace gt
