#include "sqs/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sqs {

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

double CounterRng::next_normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u1 = 1.0 - next_double();  // (0, 1], log-safe
  double u2 = next_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_normal_ = true;
  return r * std::cos(theta);
}

double CounterRng::next_log_gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::invalid_argument("next_log_gamma: shape must be positive");
  }
  if (shape < 1.0) {
    // G(a) =d G(a+1) * U^{1/a}; take logs so tiny shapes don't underflow.
    double log_boost = std::log(1.0 - next_double()) / shape;
    return next_log_gamma(shape + 1.0) + log_boost;
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x = next_normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) {
      continue;
    }
    double v = t * t * t;
    double u = 1.0 - next_double();  // (0, 1]
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d) + std::log(v);
    }
  }
}

}  // namespace sqs
