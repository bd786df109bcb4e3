#include "sqs/models.hpp"

#include <stdexcept>

#include "sqs/rng.hpp"

namespace sqs {

namespace {

// Stream-id tags separating the target table, and the draft perturbation,
// per conditioning window.
constexpr std::uint64_t kTargetTag = 0x7461726765740000ULL;
constexpr std::uint64_t kDraftTag = 0x6472616674000000ULL;

class SyntheticModel final : public ModelPair {
 public:
  explicit SyntheticModel(const SyntheticModelSpec& spec)
      : ModelPair(spec.vocab_size), spec_(spec) {
    if (spec.vocab_size == 0) {
      throw std::invalid_argument("synthetic_pair: vocab_size must be positive");
    }
    if (spec.divergence < 0.0 || spec.divergence > 1.0) {
      throw std::invalid_argument("synthetic_pair: divergence must be in [0, 1]");
    }
    if (!(spec.concentration > 0.0)) {
      throw std::invalid_argument("synthetic_pair: concentration must be positive");
    }
    if (spec.flat_fraction < 0.0 || spec.flat_fraction >= 1.0) {
      throw std::invalid_argument("synthetic_pair: flat_fraction must be in [0, 1)");
    }
    if (spec.flat_spread < 0.0) {
      throw std::invalid_argument("synthetic_pair: flat_spread must be >= 0");
    }
  }

  std::vector<double> draft_logits(const Context& ctx) const override {
    std::vector<double> logits = target_logits(ctx);
    if (spec_.divergence > 0.0) {
      CounterRng rng(spec_.seed, window_stream(ctx, kDraftTag));
      for (double& l : logits) {
        l += spec_.divergence * rng.next_normal();
      }
    }
    return logits;
  }

  std::vector<double> target_logits(const Context& ctx) const override {
    CounterRng rng(spec_.seed, window_stream(ctx, kTargetTag));
    std::vector<double> logits(vocab_size());
    // The first draw decides the window's character and is consumed either
    // way so both branches leave the stream in a deterministic state.
    const bool uncertain = rng.next_double() < spec_.flat_fraction;
    if (uncertain) {
      for (double& l : logits) {
        l = spec_.flat_spread * rng.next_normal();
      }
    } else {
      for (double& l : logits) {
        // Softmax of log-gamma draws is a Dirichlet(concentration) sample:
        // a skewed heavy-head distribution at concentration < 1.
        l = rng.next_log_gamma(spec_.concentration);
      }
    }
    return logits;
  }

 private:
  // Hash of the last markov_order tokens; the window is the whole state.
  std::uint64_t window_stream(const Context& ctx, std::uint64_t tag) const {
    std::size_t start =
        ctx.token_ids.size() > spec_.markov_order ? ctx.token_ids.size() - spec_.markov_order : 0;
    std::uint64_t h = mix64(tag);
    for (std::size_t i = start; i < ctx.token_ids.size(); ++i) {
      h = hash_combine(h, ctx.token_ids[i]);
    }
    return h;
  }

  SyntheticModelSpec spec_;
};

}  // namespace

std::unique_ptr<ModelPair> synthetic_pair(const SyntheticModelSpec& spec) {
  return std::make_unique<SyntheticModel>(spec);
}

}  // namespace sqs
