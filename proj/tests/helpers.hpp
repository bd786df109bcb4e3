#pragma once

#include <cstdint>
#include <vector>

#include "sqs/distribution.hpp"
#include "sqs/rng.hpp"

namespace sqs::test {

// Dirichlet(concentration, ..., concentration) draw over vocab_size tokens,
// built from log-gamma variates so skewed (concentration << 1) draws stay
// numerically stable.
inline TokenDistribution random_distribution(CounterRng& rng, std::uint32_t vocab_size,
                                             double concentration = 1.0) {
  std::vector<double> log_draws(vocab_size);
  for (auto& d : log_draws) {
    d = rng.next_log_gamma(concentration);
  }
  return apply_temperature(log_draws, 1.0);
}

}  // namespace sqs::test
