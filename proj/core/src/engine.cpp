#include "sqs/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sqs/errors.hpp"

namespace sqs {
namespace {

// Per-token uplink cost. Finite resolutions use the lattice-payload
// accounting; resolution 0 means the masses travel as raw 64-bit floats
// (in-process experimentation only), so the payload is 64 bits per
// support token and the support description keeps its usual form.
BitCost token_cost(Scheme scheme, std::uint32_t vocab_size, std::uint32_t k,
                   std::uint32_t resolution) {
  if (resolution > 0) return total_bits(scheme, vocab_size, k, resolution);
  BitCost cost;
  cost.scheme = scheme;
  cost.payload_bits_real = 64.0 * static_cast<double>(k);
  cost.payload_bits_wire = 64u * k;
  if (scheme == Scheme::CSqs) {
    cost.subset_bits_wire = subset_bits_topk_wire(vocab_size, k);
    cost.subset_bits_real = static_cast<double>(cost.subset_bits_wire);
    cost.cardinality_bits = ceil_log2(vocab_size);
  } else {
    if (scheme == Scheme::QsDense && k != vocab_size) {
      throw std::invalid_argument("dense scheme requires full-vocabulary support");
    }
    cost.subset_bits_real = subset_bits_topk(vocab_size, k);
    cost.subset_bits_wire = subset_bits_topk_wire(vocab_size, k);
  }
  cost.total_wire_bits = cost.subset_bits_wire + cost.cardinality_bits + cost.payload_bits_wire;
  return cost;
}

// Index into the lattice support by exact integer arithmetic: the uniform
// picks cell floor(u * resolution) of the count CDF, so equal-count
// distributions sample identically regardless of float summation order.
std::size_t sample_lattice_index(const LatticeDistribution& q, double u) {
  auto cell = static_cast<std::uint64_t>(u * static_cast<double>(q.resolution));
  if (cell >= q.resolution) cell = q.resolution - 1;
  std::uint64_t cum = 0;
  for (std::size_t i = 0; i < q.counts.size(); ++i) {
    cum += q.counts[i];
    if (cell < cum) return i;
  }
  // Unreachable when counts sum to the resolution; keep a defined answer.
  return q.counts.size() - 1;
}

std::size_t sample_mass_index(const std::vector<double>& masses, double u) {
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (masses[i] > 0.0) last_positive = i;
    cum += masses[i];
    if (u < cum) return i;
  }
  return last_positive;
}

void check_same_vocab(const TokenDistribution& a, const TokenDistribution& b) {
  if (a.vocab_size() != b.vocab_size()) {
    throw std::invalid_argument("distribution dimensions differ");
  }
}

}  // namespace

TokenDistribution DraftToken::effective_distribution(std::uint32_t vocab_size) const {
  if (quantized.resolution > 0) return densify(quantized, vocab_size);
  return densify(sparse, vocab_size);
}

TokenId sample_from(const TokenDistribution& d, double u) {
  if (d.vocab_size() == 0) throw std::invalid_argument("cannot sample an empty distribution");
  return static_cast<TokenId>(sample_mass_index(d.probs, u));
}

bool verify_token(const TokenDistribution& q_hat, const TokenDistribution& p, TokenId x,
                  double u) {
  check_same_vocab(q_hat, p);
  if (x >= q_hat.vocab_size()) throw std::invalid_argument("token id out of range");
  const double qx = q_hat[x];
  const double px = p[x];
  if (qx <= 0.0) {
    throw ProtocolError("drafted token has zero draft probability");
  }
  const double ratio = px >= qx ? 1.0 : px / qx;
  return u < ratio;
}

TokenDistribution residual_distribution(const TokenDistribution& p,
                                        const TokenDistribution& q_hat) {
  check_same_vocab(q_hat, p);
  std::vector<double> r(p.vocab_size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double excess = p[i] - q_hat[i];
    if (excess > 0.0) {
      r[i] = excess;
      total += excess;
    }
  }
  if (total <= 0.0) {
    throw std::invalid_argument("residual undefined: target does not exceed draft anywhere");
  }
  for (double& v : r) v /= total;
  return TokenDistribution(std::move(r));
}

TokenId residual_sample(const TokenDistribution& p, const TokenDistribution& q_hat,
                        CounterRng& rng) {
  return sample_from(residual_distribution(p, q_hat), rng.next_double());
}

TokenDistribution exactness_oracle(const TokenDistribution& q_hat, const TokenDistribution& p) {
  check_same_vocab(q_hat, p);
  const std::size_t v = q_hat.vocab_size();
  // Acceptance channel: q_hat(x) * min(1, p(x)/q_hat(x)).
  std::vector<double> m(v, 0.0);
  for (std::size_t i = 0; i < v; ++i) {
    if (q_hat[i] > 0.0) m[i] = q_hat[i] * std::min(1.0, p[i] / q_hat[i]);
  }
  // Rejection channel: reaches the residual with probability TV(q_hat, p).
  const double tv = tv_distance(q_hat, p);
  if (tv > 0.0) {
    const TokenDistribution residual = residual_distribution(p, q_hat);
    for (std::size_t i = 0; i < v; ++i) m[i] += tv * residual[i];
  }
  return TokenDistribution(std::move(m));
}

DraftBatch edge_draft_batch(const ModelPair& model, const Context& ctx,
                            const DraftSettings& settings, ThresholdController* controller,
                            CounterRng& rng) {
  const std::uint32_t vocab = model.vocab_size();
  if (settings.scheme == Scheme::CSqs) {
    if (controller == nullptr) {
      throw std::invalid_argument("adaptive scheme requires a threshold controller");
    }
    controller->begin_batch();
  } else if (settings.scheme == Scheme::KSqs) {
    if (settings.top_k == 0 || settings.top_k > vocab) {
      throw std::invalid_argument("top_k must be in [1, vocab_size]");
    }
  }
  if (!(settings.budget_bits >= 0.0) || !std::isfinite(settings.budget_bits)) {
    throw std::invalid_argument("budget_bits must be finite and non-negative");
  }

  DraftBatch batch;
  Context cur = ctx;
  while (batch.tokens.size() < settings.l_max) {
    TokenDistribution q = model.draft_distribution(cur);
    SparseDistribution sparse;
    switch (settings.scheme) {
      case Scheme::KSqs:
        sparse = sparsify_top_k(q, settings.top_k);
        break;
      case Scheme::CSqs:
        sparse = sparsify_threshold(q, controller->beta());
        break;
      case Scheme::QsDense:
        sparse = sparsify_top_k(q, vocab);
        break;
    }
    const std::uint32_t k = sparse.support_size();
    const BitCost cost = token_cost(settings.scheme, vocab, k, settings.resolution);
    double charge = cost.budget_bits();
    if (settings.charge_token_bits) charge += static_cast<double>(ceil_log2(k));
    // Stop before the token whose cost would exceed the remaining budget.
    if (batch.bits_used + charge > settings.budget_bits) break;

    // The position is now committed; the adaptive controller observes its
    // dropped mass (the threshold used above predates this update).
    if (settings.scheme == Scheme::CSqs) controller->draft_step(sparse.dropped_mass);

    DraftToken token;
    token.position = static_cast<std::uint32_t>(batch.tokens.size());
    const double u = rng.next_double();
    if (settings.resolution > 0) {
      token.quantized = lattice_quantize(sparse, settings.resolution);
      token.token_id = token.quantized.support[sample_lattice_index(token.quantized, u)];
    } else {
      token.token_id = sparse.support[sample_mass_index(sparse.masses, u)];
    }
    token.draft_dist = std::move(q);
    token.sparse = std::move(sparse);
    token.cost = cost;
    batch.bits_used += charge;
    batch.wire_bits += cost.total_wire_bits;
    cur.push(token.token_id);
    batch.tokens.push_back(std::move(token));
  }
  return batch;
}

BatchOutcome cloud_verify_batch(const ModelPair& model, const Context& ctx,
                                const DraftBatch& batch, CounterRng& rng) {
  const std::uint32_t vocab = model.vocab_size();
  BatchOutcome outcome;
  outcome.drafted_count = batch.length();
  outcome.bits_used = batch.bits_used;
  outcome.wire_bits = batch.wire_bits;
  Context cur = ctx;
  for (const DraftToken& draft : batch.tokens) {
    const TokenDistribution p = model.target_distribution(cur);
    const TokenDistribution q_hat = draft.effective_distribution(vocab);
    const double u = rng.next_double();
    if (verify_token(q_hat, p, draft.token_id, u)) {
      outcome.tokens_emitted.push_back(draft.token_id);
      cur.push(draft.token_id);
      ++outcome.accepted_count;
      continue;
    }
    outcome.rejected_resampled = true;
    outcome.final_token = residual_sample(p, q_hat, rng);
    outcome.tokens_emitted.push_back(outcome.final_token);
    return outcome;
  }
  // Every draft passed (or the draft was empty): emit one token from the
  // target model at the extended context.
  const TokenDistribution p = model.target_distribution(cur);
  outcome.final_token = sample_from(p, rng.next_double());
  outcome.tokens_emitted.push_back(outcome.final_token);
  return outcome;
}

}  // namespace sqs
