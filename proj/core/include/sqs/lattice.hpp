#pragma once

#include <cstdint>
#include <vector>

#include "sqs/distribution.hpp"

namespace sqs {

// A sparse distribution snapped to the lattice { b/resolution : sum b = resolution }.
struct LatticeDistribution {
  std::vector<std::uint32_t> counts;  // aligned with support, sums to resolution
  std::uint32_t resolution = 0;
  std::vector<TokenId> support;       // strictly increasing

  std::uint32_t support_size() const { return static_cast<std::uint32_t>(support.size()); }
  double mass(std::size_t i) const {
    return static_cast<double>(counts[i]) / static_cast<double>(resolution);
  }
};

// Nearest-lattice rounding with exact sum correction: round each mass to
// counts b'[i] = floor(resolution * m + 1/2); if the total misses the
// resolution, fix it on the entries where rounding moved the most in the
// offending direction (ties to the smaller support position). The result's
// TV distance to the input is at most support_size / (4 * resolution).
LatticeDistribution lattice_quantize(const SparseDistribution& s, std::uint32_t resolution);

// Dense distribution with counts[i]/resolution at each support id.
TokenDistribution densify(const LatticeDistribution& q, std::uint32_t vocab_size);

}  // namespace sqs
