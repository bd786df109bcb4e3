#pragma once

#include <cstdint>
#include <vector>

namespace sqs {

using TokenId = std::uint32_t;

// Dense categorical distribution over token ids [0, vocab_size).
struct TokenDistribution {
  std::vector<double> probs;

  TokenDistribution() = default;
  explicit TokenDistribution(std::vector<double> p) : probs(std::move(p)) {}

  std::uint32_t vocab_size() const { return static_cast<std::uint32_t>(probs.size()); }
  double operator[](std::size_t i) const { return probs[i]; }
  bool is_valid(double tol = 1e-9) const;
};

// Distribution restricted to a sorted support set and renormalized.
// dropped_mass is the pre-normalization probability outside the support.
struct SparseDistribution {
  std::vector<TokenId> support;  // strictly increasing
  std::vector<double> masses;    // renormalized, aligned with support
  double dropped_mass = 0.0;

  std::uint32_t support_size() const { return static_cast<std::uint32_t>(support.size()); }
};

// 1/2 * sum |a - b|. Throws std::invalid_argument on dimension mismatch.
double tv_distance(const TokenDistribution& a, const TokenDistribution& b);

// softmax(logits / temperature). temperature == 0 is the argmax limit
// (smallest index on ties). Throws on negative temperature or non-finite
// logits.
TokenDistribution apply_temperature(const std::vector<double>& logits, double temperature);

// Keep the k largest-probability tokens (ties to the smaller id),
// renormalize. Throws if k is outside [1, V].
SparseDistribution sparsify_top_k(const TokenDistribution& q, std::uint32_t k);

// Keep { x : q(x) >= beta }, renormalize. An empty support set falls back
// to the argmax singleton so a draft token can always be produced.
SparseDistribution sparsify_threshold(const TokenDistribution& q, double beta);

// Expand back to a dense vector over [0, vocab_size). Throws if any
// support id is out of range.
TokenDistribution densify(const SparseDistribution& s, std::uint32_t vocab_size);

}  // namespace sqs
