#pragma once

#include <cstdint>
#include <vector>

#include "sqs/bitcost.hpp"
#include "sqs/conformal.hpp"
#include "sqs/distribution.hpp"
#include "sqs/lattice.hpp"
#include "sqs/models.hpp"
#include "sqs/rng.hpp"

namespace sqs {

// Drafting parameters shared by edge and cloud for a session.
struct DraftSettings {
  Scheme scheme = Scheme::KSqs;
  std::uint32_t top_k = 8;         // KSqs support size
  std::uint32_t resolution = 100;  // lattice resolution; 0 = infinite (no quantization)
  double budget_bits = 5000.0;     // uplink budget per batch (distribution bits)
  std::uint32_t l_max = 16;        // hard cap on drafted tokens per batch
  bool charge_token_bits = false;  // also count the per-token support-index bits against the budget
};

// One drafted position: the token, the distribution it was sampled from
// (lattice-quantized at finite resolution, the bare sparsified form
// otherwise), and its uplink cost.
struct DraftToken {
  TokenId token_id = 0;
  std::uint32_t position = 0;  // 0-based within the batch
  TokenDistribution draft_dist;   // pre-sparsification draft distribution
                                  // (kept for analysis; never transmitted)
  SparseDistribution sparse;   // support + renormalized masses + dropped mass
  LatticeDistribution quantized;  // counts empty in infinite-resolution mode
  BitCost cost;

  // The distribution the token was actually sampled from, densified.
  TokenDistribution effective_distribution(std::uint32_t vocab_size) const;
};

struct DraftBatch {
  std::vector<DraftToken> tokens;
  double bits_used = 0.0;        // budget accounting (scheme-faithful, real-valued)
  std::uint64_t wire_bits = 0;   // integer wire accounting of the distribution fields

  std::uint32_t length() const { return static_cast<std::uint32_t>(tokens.size()); }
};

// Verifier verdict for one batch. tokens_emitted holds the accepted prefix
// plus exactly one final token: the residual resample if a draft was
// rejected, else the bonus token.
struct BatchOutcome {
  std::uint32_t drafted_count = 0;   // L
  std::uint32_t accepted_count = 0;  // T <= L
  bool rejected_resampled = false;   // T < L; at most one resample per batch
  TokenId final_token = 0;
  std::vector<TokenId> tokens_emitted;
  double bits_used = 0.0;       // copied from the verified batch
  std::uint64_t wire_bits = 0;  // copied from the verified batch
};

// Samples the index of u in the distribution's CDF. u in [0, 1).
TokenId sample_from(const TokenDistribution& d, double u);

// Draft-token acceptance test: accept iff u < min(1, p(x)/q(x)).
// q_hat(x) == 0 is a protocol violation (token drafted outside its own
// distribution).
bool verify_token(const TokenDistribution& q_hat, const TokenDistribution& p, TokenId x,
                  double u);

// Residual distribution max(0, p - q_hat) renormalized; defined only when
// p != q_hat.
TokenDistribution residual_distribution(const TokenDistribution& p,
                                        const TokenDistribution& q_hat);
TokenId residual_sample(const TokenDistribution& p, const TokenDistribution& q_hat,
                        CounterRng& rng);

// Analytic one-step output marginal of the accept/resample procedure:
// m(x) = q_hat(x) min(1, p(x)/q_hat(x)) + TV(q_hat, p) * residual(x).
// Equals p identically; computed from the two pieces so the identity is a
// real check, not a tautology.
TokenDistribution exactness_oracle(const TokenDistribution& q_hat, const TokenDistribution& p);

// Autoregressive edge drafting: sparsify per scheme, lattice-quantize,
// sample from the quantized distribution, and accumulate uplink bits,
// stopping before the token whose cost would exceed the remaining budget
// (and at l_max). For the adaptive scheme pass the threshold controller;
// the call opens a controller batch that the caller settles with
// finish_batch once the verdict arrives.
DraftBatch edge_draft_batch(const ModelPair& model, const Context& ctx,
                            const DraftSettings& settings, ThresholdController* controller,
                            CounterRng& rng);

// Parallel verification: accept the drafted prefix greedily, resample from
// the residual at the first rejection, or sample the bonus token when all
// drafts pass. Exactly one uniform per verified token, plus one for the
// final (residual or bonus) token.
BatchOutcome cloud_verify_batch(const ModelPair& model, const Context& ctx,
                                const DraftBatch& batch, CounterRng& rng);

}  // namespace sqs
