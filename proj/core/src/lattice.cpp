#include "sqs/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sqs {

LatticeDistribution lattice_quantize(const SparseDistribution& s, std::uint32_t resolution) {
  if (resolution == 0) {
    throw std::invalid_argument("lattice_quantize: resolution must be positive");
  }
  const std::size_t k = s.support.size();
  if (k == 0) {
    throw std::invalid_argument("lattice_quantize: empty support");
  }
  LatticeDistribution out;
  out.resolution = resolution;
  out.support = s.support;
  out.counts.resize(k);

  const double ell = static_cast<double>(resolution);
  std::vector<double> zeta(k);  // rounding residual b'[i] - ell*m[i], in (-1/2, 1/2]
  std::int64_t total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double scaled = ell * s.masses[i];
    double rounded = std::floor(scaled + 0.5);
    out.counts[i] = static_cast<std::uint32_t>(rounded);
    zeta[i] = rounded - scaled;
    total += static_cast<std::int64_t>(rounded);
  }

  std::int64_t excess = total - static_cast<std::int64_t>(resolution);
  if (excess != 0) {
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    if (excess > 0) {
      // Overshot: take back one unit from the entries rounded up the most.
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (zeta[a] != zeta[b]) {
          return zeta[a] > zeta[b];
        }
        return a < b;
      });
      for (std::int64_t j = 0; j < excess; ++j) {
        std::size_t i = order[static_cast<std::size_t>(j)];
        if (out.counts[i] == 0) {
          // Unreachable: an entry with surplus-maximal zeta was rounded up.
          throw std::logic_error("lattice_quantize: correction hit a zero count");
        }
        --out.counts[i];
      }
    } else {
      // Undershot: hand one unit to the entries rounded down the most.
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (zeta[a] != zeta[b]) {
          return zeta[a] < zeta[b];
        }
        return a < b;
      });
      for (std::int64_t j = 0; j < -excess; ++j) {
        ++out.counts[order[static_cast<std::size_t>(j)]];
      }
    }
  }
  return out;
}

TokenDistribution densify(const LatticeDistribution& q, std::uint32_t vocab_size) {
  TokenDistribution out;
  out.probs.assign(vocab_size, 0.0);
  for (std::size_t i = 0; i < q.support.size(); ++i) {
    if (q.support[i] >= vocab_size) {
      throw std::invalid_argument("densify: support id out of range");
    }
    out.probs[q.support[i]] = q.mass(i);
  }
  return out;
}

}  // namespace sqs
