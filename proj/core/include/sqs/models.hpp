#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "sqs/distribution.hpp"

namespace sqs {

// Token history the models condition on (full history across batches).
struct Context {
  std::vector<TokenId> token_ids;

  void push(TokenId id) { token_ids.push_back(id); }
  std::size_t size() const { return token_ids.size(); }
};

// A (draft, target) pair of conditional next-token models over a shared
// vocabulary. Logit functions are deterministic in (construction
// parameters, context); instances are immutable after construction apart
// from the public temperature knobs, and safe for concurrent queries.
class ModelPair {
 public:
  virtual ~ModelPair() = default;

  std::uint32_t vocab_size() const { return vocab_size_; }

  virtual std::vector<double> draft_logits(const Context& ctx) const = 0;
  virtual std::vector<double> target_logits(const Context& ctx) const = 0;

  TokenDistribution draft_distribution(const Context& ctx) const {
    return apply_temperature(draft_logits(ctx), temperature_draft);
  }
  TokenDistribution target_distribution(const Context& ctx) const {
    return apply_temperature(target_logits(ctx), temperature_target);
  }

  double temperature_draft = 1.0;
  double temperature_target = 1.0;

 protected:
  explicit ModelPair(std::uint32_t vocab_size) : vocab_size_(vocab_size) {}

 private:
  std::uint32_t vocab_size_;
};

// Synthetic stand-in for a small/large LM pair. The target is a seeded
// order-`markov_order` Markov source with Dirichlet(concentration)-style
// heavy-head logits; the draft perturbs the target's logits with seeded
// noise scaled by `divergence`, so divergence = 0 makes the pair identical
// and the average draft-target TV distance grows monotonically with it.
//
// A `flat_fraction` share of conditioning windows are "uncertain" states:
// their logits are low-contrast Gaussian draws (stddev `flat_spread`)
// instead of heavy-head draws. Language models show the same mix — most
// positions are near-deterministic, a minority spread mass widely — and
// the minority is what distinguishes temperature regimes: at low
// temperature even uncertain states sharpen to a handful of tokens, while
// at high temperature their support widens across much of the vocabulary.
struct SyntheticModelSpec {
  std::uint32_t vocab_size = 64;
  std::uint32_t markov_order = 1;
  double divergence = 0.05;     // in [0, 1]
  double concentration = 0.02;  // > 0; smaller = more skewed
  double flat_fraction = 0.08;  // in [0, 1): share of uncertain windows
  double flat_spread = 0.3;     // >= 0; logit stddev inside uncertain windows
  std::uint64_t seed = 1;
};

std::unique_ptr<ModelPair> synthetic_pair(const SyntheticModelSpec& spec);

}  // namespace sqs
