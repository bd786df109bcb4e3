#include "sqs/packets.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sqs/bitstream.hpp"
#include "sqs/errors.hpp"
#include "sqs/ranking.hpp"

namespace sqs {
namespace {

void check_params(const WireParams& params) {
  if (params.vocab_size == 0) throw std::invalid_argument("wire params: vocab_size must be > 0");
  if (params.resolution == 0) {
    throw std::invalid_argument("wire params: resolution must be >= 1 on the wire");
  }
  if (params.scheme == Scheme::KSqs &&
      (params.top_k == 0 || params.top_k > params.vocab_size)) {
    throw std::invalid_argument("wire params: top_k outside [1, vocab_size]");
  }
}

// The support cardinality the decoder expects before reading a token
// record; the adaptive scheme transmits it per token instead.
std::uint32_t fixed_cardinality(const WireParams& params) {
  return params.scheme == Scheme::KSqs ? params.top_k : params.vocab_size;
}

void check_token(const WireDraftToken& token, const WireParams& params) {
  const LatticeDistribution& d = token.dist;
  const std::uint32_t k = d.support_size();
  if (k == 0) throw std::invalid_argument("draft token: empty support");
  if (d.counts.size() != d.support.size()) {
    throw std::invalid_argument("draft token: counts/support size mismatch");
  }
  if (d.resolution != params.resolution) {
    throw std::invalid_argument("draft token: resolution differs from session constant");
  }
  if (params.scheme != Scheme::CSqs && k != fixed_cardinality(params)) {
    throw std::invalid_argument("draft token: cardinality differs from the scheme constant");
  }
  if (k > params.vocab_size) {
    throw std::invalid_argument("draft token: support larger than vocabulary");
  }
  std::uint64_t total = 0;
  for (std::uint32_t c : d.counts) total += c;
  if (total != params.resolution) {
    throw std::invalid_argument("draft token: counts do not sum to the resolution");
  }
  if (!std::binary_search(d.support.begin(), d.support.end(), token.token_id)) {
    throw std::invalid_argument("draft token: token id outside its support");
  }
}

}  // namespace

std::uint64_t wire_token_bits(const WireParams& params, std::uint32_t k) {
  const BitCost cost = total_bits(params.scheme, params.vocab_size, k, params.resolution);
  return static_cast<std::uint64_t>(cost.total_wire_bits) + ceil_log2(k);
}

std::uint64_t wire_record_bits(const DraftPacket& packet, const WireParams& params) {
  std::uint64_t bits = 0;
  for (const WireDraftToken& token : packet.tokens) {
    bits += wire_token_bits(params, token.dist.support_size());
  }
  return bits;
}

std::vector<std::uint8_t> encode_draft(const DraftPacket& packet, const WireParams& params) {
  check_params(params);
  if (packet.tokens.size() > 0xFFFF) {
    throw std::invalid_argument("draft packet: more than 65535 tokens");
  }
  BitWriter w;
  w.append_u32(packet.batch_id);
  w.append_u8(static_cast<std::uint8_t>(params.scheme));
  w.append_u16(static_cast<std::uint16_t>(packet.tokens.size()));
  for (const WireDraftToken& token : packet.tokens) {
    check_token(token, params);
    const std::uint32_t k = token.dist.support_size();
    if (params.scheme == Scheme::CSqs) {
      w.append_bits(std::uint64_t{k - 1}, ceil_log2(params.vocab_size));
    }
    w.append_bits(rank_subset(token.dist.support, params.vocab_size),
                  ceil_log2_binomial(params.vocab_size, k));
    w.append_bits(rank_composition(token.dist.counts, params.resolution),
                  payload_bits_wire(k, params.resolution));
    const auto it =
        std::lower_bound(token.dist.support.begin(), token.dist.support.end(), token.token_id);
    const std::uint64_t index =
        static_cast<std::uint64_t>(it - token.dist.support.begin());
    w.append_bits(index, ceil_log2(k));
  }
  return w.take();
}

DraftPacket decode_draft(const std::vector<std::uint8_t>& bytes, const WireParams& params) {
  check_params(params);
  BitReader r(bytes);
  DraftPacket packet;
  packet.batch_id = r.read_u32();
  const std::uint8_t tag = r.read_u8();
  if (tag != static_cast<std::uint8_t>(params.scheme)) {
    throw DecodeError(DecodeError::Kind::SchemeMismatch,
                      "draft packet scheme tag " + std::to_string(int{tag}) +
                          " differs from the session scheme");
  }
  const std::uint16_t count = r.read_u16();
  packet.tokens.reserve(count);
  for (std::uint16_t n = 0; n < count; ++n) {
    std::uint32_t k = fixed_cardinality(params);
    if (params.scheme == Scheme::CSqs) {
      k = static_cast<std::uint32_t>(r.read_u64_bits(ceil_log2(params.vocab_size))) + 1;
      if (k > params.vocab_size) {
        throw DecodeError(DecodeError::Kind::RankOutOfRange,
                          "cardinality exceeds the vocabulary size");
      }
    }
    const BigInt subset_rank = r.read_bits(ceil_log2_binomial(params.vocab_size, k));
    if (subset_rank >= binomial(params.vocab_size, k)) {
      throw DecodeError(DecodeError::Kind::RankOutOfRange, "subset rank out of range");
    }
    const BigInt lattice_rank = r.read_bits(payload_bits_wire(k, params.resolution));
    if (lattice_rank >= binomial(std::uint64_t{params.resolution} + k - 1, k - 1)) {
      throw DecodeError(DecodeError::Kind::RankOutOfRange, "lattice rank out of range");
    }
    const std::uint64_t index = r.read_u64_bits(ceil_log2(k));
    if (index >= k) {
      throw DecodeError(DecodeError::Kind::RankOutOfRange, "token index out of range");
    }
    WireDraftToken token;
    token.dist.support = unrank_subset(subset_rank, params.vocab_size, k);
    token.dist.counts = unrank_composition(lattice_rank, k, params.resolution);
    token.dist.resolution = params.resolution;
    token.token_id = token.dist.support[static_cast<std::size_t>(index)];
    packet.tokens.push_back(std::move(token));
  }
  r.skip_padding();
  if (r.bits_remaining() != 0) {
    throw DecodeError(DecodeError::Kind::TrailingData, "bytes after the last token record");
  }
  return packet;
}

std::vector<std::uint8_t> encode_verdict(const VerdictPacket& packet) {
  BitWriter w;
  w.append_u32(packet.batch_id);
  w.append_u16(packet.accepted_count);
  w.append_u32(packet.new_token);
  return w.take();
}

VerdictPacket decode_verdict(const std::vector<std::uint8_t>& bytes) {
  BitReader r(bytes);
  VerdictPacket packet;
  packet.batch_id = r.read_u32();
  packet.accepted_count = r.read_u16();
  packet.new_token = r.read_u32();
  if (r.bits_remaining() != 0) {
    throw DecodeError(DecodeError::Kind::TrailingData, "bytes after the verdict fields");
  }
  return packet;
}

void validate_verdict(const VerdictPacket& verdict, const DraftPacket& draft) {
  if (verdict.batch_id != draft.batch_id) {
    throw DecodeError(DecodeError::Kind::CountMismatch,
                      "verdict batch id does not match the draft");
  }
  if (verdict.accepted_count > draft.tokens.size()) {
    throw DecodeError(DecodeError::Kind::CountMismatch,
                      "verdict accepts more tokens than were drafted");
  }
}

}  // namespace sqs
