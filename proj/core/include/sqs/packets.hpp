#pragma once

#include <cstdint>
#include <vector>

#include "sqs/bitcost.hpp"
#include "sqs/distribution.hpp"
#include "sqs/lattice.hpp"

namespace sqs {

// Constants a packet codec needs; agreed per session, not repeated per
// packet. top_k is only meaningful for the fixed-cardinality scheme.
struct WireParams {
  Scheme scheme = Scheme::KSqs;
  std::uint32_t vocab_size = 0;
  std::uint32_t resolution = 0;  // must be >= 1 on the wire
  std::uint32_t top_k = 0;
};

// One drafted token as it travels uplink: the quantized distribution and
// the sampled token (as an index into the support).
struct WireDraftToken {
  LatticeDistribution dist;
  TokenId token_id = 0;
};

// Uplink message: header (batch_id u32, scheme tag u8, token count u16,
// little-endian), then per token the bit-packed fields
//   [cardinality-1 : ceil(log2 V) bits]   (adaptive scheme only)
//   [subset rank   : ceil(log2 C(V,K)) bits]
//   [lattice rank  : ceil(log2 C(res+K-1, K-1)) bits]
//   [token index   : ceil(log2 K) bits]
// and zero padding to a byte boundary.
struct DraftPacket {
  std::uint32_t batch_id = 0;
  std::vector<WireDraftToken> tokens;
};

// Downlink message: batch_id u32, accepted count u16, emitted token u32
// (the residual resample on rejection, the bonus token otherwise).
struct VerdictPacket {
  std::uint32_t batch_id = 0;
  std::uint16_t accepted_count = 0;
  TokenId new_token = 0;
};

std::vector<std::uint8_t> encode_draft(const DraftPacket& packet, const WireParams& params);
DraftPacket decode_draft(const std::vector<std::uint8_t>& bytes, const WireParams& params);

std::vector<std::uint8_t> encode_verdict(const VerdictPacket& packet);
VerdictPacket decode_verdict(const std::vector<std::uint8_t>& bytes);

// Throws DecodeError{CountMismatch} unless the verdict matches the draft
// (same batch_id, accepted_count <= token count).
void validate_verdict(const VerdictPacket& verdict, const DraftPacket& draft);

// Pre-padding bit length of one token's records on the wire: the
// distribution fields (cost accounting's wire total) plus the token index.
std::uint64_t wire_token_bits(const WireParams& params, std::uint32_t k);

// Pre-padding bit length of the packet's token records (header excluded).
std::uint64_t wire_record_bits(const DraftPacket& packet, const WireParams& params);

}  // namespace sqs
