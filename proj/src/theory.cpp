#include "gt/theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gt {

namespace {
constexpr double kLn2 = std::numbers::ln2;

void check_rho(double rho) {
  if (!(rho > 0.0) || !(rho < 0.5))
    throw std::domain_error("rho must lie in the open interval (0, 1/2)");
}
}  // namespace

double binary_entropy_nats(double x) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("binary_entropy_nats: x outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log(x) - (1.0 - x) * std::log(1.0 - x);
}

double bernoulli_kl_nats(double a, double b) {
  if (a < 0.0 || a > 1.0 || b <= 0.0 || b >= 1.0)
    throw std::domain_error("bernoulli_kl_nats: arguments outside domain");
  double t = 0.0;
  if (a > 0.0) t += a * std::log(a / b);
  if (a < 1.0) t += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
  return t;
}

double NoiseFunctionals::h2_bits() const { return h2_nats / kLn2; }
double NoiseFunctionals::capacity_bits() const { return capacity_nats / kLn2; }
double NoiseFunctionals::kl_flip_bits() const { return kl_flip_nats / kLn2; }

NoiseFunctionals noise_functionals(double rho) {
  check_rho(rho);
  NoiseFunctionals f;
  f.h2_nats = binary_entropy_nats(rho);
  f.capacity_nats = kLn2 - f.h2_nats;
  f.kl_flip_nats = (1.0 - 2.0 * rho) * std::log((1.0 - rho) / rho);
  return f;
}

double converse_tests(double p, double k, double rho) {
  if (!(p > 0.0) || !(k > 0.0) || k > p)
    throw std::domain_error("converse_tests: need 0 < k <= p");
  NoiseFunctionals f = noise_functionals(rho);
  return k * std::log(p / k) / f.capacity_nats;
}

double multistage_tests(double p, double k, double rho) {
  if (!(p > 0.0) || !(k > 0.0) || k > p)
    throw std::domain_error("multistage_tests: need 0 < k <= p");
  NoiseFunctionals f = noise_functionals(rho);
  return converse_tests(p, k, rho) + k * std::log(k) / f.kl_flip_nats;
}

double rate_at(double theta, double rho, BoundKind which) {
  if (!(theta > 0.0) || !(theta < 1.0))
    throw std::domain_error("rate_at: theta must lie in (0, 1)");
  NoiseFunctionals f = noise_functionals(rho);
  if (which == BoundKind::Converse) return f.capacity_bits();
  double inv = 1.0 / f.capacity_bits() + (theta / (1.0 - theta)) / f.kl_flip_bits();
  return 1.0 / inv;
}

std::vector<BoundPoint> rate_curve(double rho, const std::vector<double>& thetas,
                                   BoundKind which) {
  std::vector<BoundPoint> out;
  out.reserve(thetas.size());
  for (double t : thetas) out.push_back({t, rate_at(t, rho, which), which});
  return out;
}

}  // namespace gt
