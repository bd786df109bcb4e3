#pragma once

#include <cstdint>
#include <vector>

#include "sqs/carrier.hpp"
#include "sqs/conformal.hpp"
#include "sqs/engine.hpp"
#include "sqs/models.hpp"
#include "sqs/packets.hpp"

namespace sqs {

// Stream tags for the two per-role counter RNGs; fixed so in-process and
// socket runs draw identical randomness.
inline constexpr std::uint64_t kEdgeStream = 0xED6E;
inline constexpr std::uint64_t kCloudStream = 0xC10D;

// Everything both endpoints must agree on. The handshake re-checks the
// wire-critical subset (version, scheme, vocabulary, resolution, alpha,
// eta); the rest travels out-of-band in the shared experiment config.
struct SessionConfig {
  DraftSettings draft;
  double alpha = 0.0005;
  double eta = 0.001;
  double beta_initial = 0.0;
  std::uint32_t batches = 1;
  std::uint64_t seed = 1;
};

struct BatchRecord {
  std::uint32_t drafted = 0;
  std::uint32_t accepted = 0;
  bool rejected_resampled = false;
  double bits_used = 0.0;            // budget accounting
  std::uint64_t wire_bits = 0;       // distribution fields, ceiled
  std::uint64_t record_bits = 0;     // distribution fields + token indices (pre-padding)
  double dropped_mass_sum = 0.0;     // over drafted positions
  double beta_after = 0.0;           // adaptive scheme; else beta_initial
};

struct SessionResult {
  std::vector<TokenId> tokens;            // emitted sequence, in order
  std::vector<BatchRecord> batches;
  std::vector<std::vector<std::uint8_t>> transcript;  // edge's ordered frame view
  std::uint64_t transcript_hash = 0;                  // chained FNV-1a over the frames
};

std::vector<std::uint8_t> encode_handshake(const SessionConfig& config,
                                           std::uint32_t vocab_size);
// Throws ProtocolError naming the first mismatching field.
void check_handshake(const std::vector<std::uint8_t>& theirs, const SessionConfig& config,
                     std::uint32_t vocab_size);

std::uint64_t transcript_hash(const std::vector<std::vector<std::uint8_t>>& frames);

// Runs the drafting endpoint over the carrier: handshake, then
// config.batches draft/verdict exchanges. Requires a wire-capable
// configuration (resolution >= 1).
SessionResult run_edge_session(Carrier& carrier, const ModelPair& model,
                               const SessionConfig& config);

// Runs the verifying endpoint; returns its emitted-token view (equal to
// the edge's on a healthy session).
std::vector<TokenId> run_cloud_session(Carrier& carrier, const ModelPair& model,
                                       const SessionConfig& config);

// Convenience: both endpoints over an in-process link, the cloud on a
// worker thread. Exceptions from either endpoint propagate.
SessionResult run_in_process_session(const ModelPair& edge_model, const ModelPair& cloud_model,
                                     const SessionConfig& config);

}  // namespace sqs
