#include "sqs/session.hpp"

#include <bit>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "sqs/bitstream.hpp"
#include "sqs/errors.hpp"
#include "sqs/rng.hpp"

namespace sqs {
namespace {

constexpr std::uint8_t kHandshakeVersion = 1;
constexpr char kHandshakeMagic[4] = {'S', 'Q', 'S', '1'};

WireParams wire_params(const SessionConfig& config, std::uint32_t vocab_size) {
  WireParams params;
  params.scheme = config.draft.scheme;
  params.vocab_size = vocab_size;
  params.resolution = config.draft.resolution;
  params.top_k = config.draft.top_k;
  return params;
}

void append_f64(BitWriter& w, double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) w.append_u8(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
}

double read_f64(BitReader& r) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(r.read_u8()) << (8 * i);
  return std::bit_cast<double>(bits);
}

DraftPacket to_wire(const DraftBatch& batch, std::uint32_t batch_id) {
  DraftPacket packet;
  packet.batch_id = batch_id;
  packet.tokens.reserve(batch.tokens.size());
  for (const DraftToken& token : batch.tokens) {
    if (token.quantized.resolution == 0) {
      throw std::invalid_argument("session: infinite-resolution drafts cannot travel the wire");
    }
    packet.tokens.push_back(WireDraftToken{token.quantized, token.token_id});
  }
  return packet;
}

DraftBatch from_wire(const DraftPacket& packet, const WireParams& params,
                     bool charge_token_bits) {
  DraftBatch batch;
  batch.tokens.reserve(packet.tokens.size());
  std::uint32_t position = 0;
  for (const WireDraftToken& wire : packet.tokens) {
    DraftToken token;
    token.token_id = wire.token_id;
    token.position = position++;
    token.quantized = wire.dist;
    token.cost = total_bits(params.scheme, params.vocab_size, wire.dist.support_size(),
                            params.resolution);
    double charge = token.cost.budget_bits();
    if (charge_token_bits) charge += ceil_log2(wire.dist.support_size());
    batch.bits_used += charge;
    batch.wire_bits += token.cost.total_wire_bits;
    batch.tokens.push_back(std::move(token));
  }
  return batch;
}

}  // namespace

std::vector<std::uint8_t> encode_handshake(const SessionConfig& config,
                                           std::uint32_t vocab_size) {
  BitWriter w;
  for (char c : kHandshakeMagic) w.append_u8(static_cast<std::uint8_t>(c));
  w.append_u8(kHandshakeVersion);
  w.append_u8(static_cast<std::uint8_t>(config.draft.scheme));
  w.append_u32(vocab_size);
  w.append_u32(config.draft.resolution);
  append_f64(w, config.alpha);
  append_f64(w, config.eta);
  return w.take();
}

void check_handshake(const std::vector<std::uint8_t>& theirs, const SessionConfig& config,
                     std::uint32_t vocab_size) {
  BitReader r(theirs);
  try {
    for (char c : kHandshakeMagic) {
      if (r.read_u8() != static_cast<std::uint8_t>(c)) {
        throw ProtocolError("handshake: bad magic");
      }
    }
    const std::uint8_t version = r.read_u8();
    if (version != kHandshakeVersion) {
      throw ProtocolError("handshake: peer protocol version " + std::to_string(int{version}));
    }
    const std::uint8_t scheme = r.read_u8();
    if (scheme != static_cast<std::uint8_t>(config.draft.scheme)) {
      throw ProtocolError("handshake: scheme mismatch (peer sent " +
                          std::to_string(int{scheme}) + ")");
    }
    const std::uint32_t vocab = r.read_u32();
    if (vocab != vocab_size) {
      throw ProtocolError("handshake: vocabulary size mismatch (peer sent " +
                          std::to_string(vocab) + ", ours is " + std::to_string(vocab_size) +
                          ")");
    }
    const std::uint32_t resolution = r.read_u32();
    if (resolution != config.draft.resolution) {
      throw ProtocolError("handshake: resolution mismatch (peer sent " +
                          std::to_string(resolution) + ")");
    }
    const double alpha = read_f64(r);
    const double eta = read_f64(r);
    if (std::bit_cast<std::uint64_t>(alpha) != std::bit_cast<std::uint64_t>(config.alpha)) {
      throw ProtocolError("handshake: alpha mismatch");
    }
    if (std::bit_cast<std::uint64_t>(eta) != std::bit_cast<std::uint64_t>(config.eta)) {
      throw ProtocolError("handshake: eta mismatch");
    }
    if (r.bits_remaining() != 0) throw ProtocolError("handshake: trailing bytes");
  } catch (const DecodeError&) {
    throw ProtocolError("handshake: frame too short");
  }
}

std::uint64_t transcript_hash(const std::vector<std::vector<std::uint8_t>>& frames) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& frame : frames) {
    std::uint8_t len[4];
    const auto size = static_cast<std::uint32_t>(frame.size());
    for (int i = 0; i < 4; ++i) len[i] = static_cast<std::uint8_t>((size >> (8 * i)) & 0xFF);
    h = fnv1a64(len, 4, h);
    h = fnv1a64(frame.data(), frame.size(), h);
  }
  return h;
}

SessionResult run_edge_session(Carrier& carrier, const ModelPair& model,
                               const SessionConfig& config) {
  if (config.draft.resolution == 0) {
    throw std::invalid_argument("session: wire transport needs resolution >= 1");
  }
  const std::uint32_t vocab = model.vocab_size();
  const WireParams wire = wire_params(config, vocab);

  SessionResult result;
  auto record = [&result](const std::vector<std::uint8_t>& frame) {
    result.transcript.push_back(frame);
  };

  const std::vector<std::uint8_t> hello = encode_handshake(config, vocab);
  carrier.send(hello);
  record(hello);
  const std::vector<std::uint8_t> peer_hello = carrier.receive();
  record(peer_hello);
  check_handshake(peer_hello, config, vocab);

  CounterRng rng(config.seed, kEdgeStream);
  ThresholdController controller(config.beta_initial, config.eta, config.alpha);
  ThresholdController* controller_ptr =
      config.draft.scheme == Scheme::CSqs ? &controller : nullptr;
  Context ctx;

  for (std::uint32_t t = 0; t < config.batches; ++t) {
    const DraftBatch batch = edge_draft_batch(model, ctx, config.draft, controller_ptr, rng);
    const DraftPacket packet = to_wire(batch, t);
    const std::vector<std::uint8_t> draft_bytes = encode_draft(packet, wire);
    carrier.send(draft_bytes);
    record(draft_bytes);

    const std::vector<std::uint8_t> verdict_bytes = carrier.receive();
    record(verdict_bytes);
    const VerdictPacket verdict = decode_verdict(verdict_bytes);
    validate_verdict(verdict, packet);

    const std::uint32_t accepted = verdict.accepted_count;
    if (controller_ptr != nullptr) controller.finish_batch(accepted);

    BatchRecord rec;
    rec.drafted = batch.length();
    rec.accepted = accepted;
    rec.rejected_resampled = accepted < batch.length();
    rec.bits_used = batch.bits_used;
    rec.wire_bits = batch.wire_bits;
    rec.record_bits = wire_record_bits(packet, wire);
    for (const DraftToken& token : batch.tokens) {
      rec.dropped_mass_sum += token.sparse.dropped_mass;
    }
    rec.beta_after = controller.beta();
    result.batches.push_back(rec);

    for (std::uint32_t i = 0; i < accepted; ++i) {
      result.tokens.push_back(batch.tokens[i].token_id);
      ctx.push(batch.tokens[i].token_id);
    }
    result.tokens.push_back(verdict.new_token);
    ctx.push(verdict.new_token);
  }
  result.transcript_hash = transcript_hash(result.transcript);
  return result;
}

std::vector<TokenId> run_cloud_session(Carrier& carrier, const ModelPair& model,
                                       const SessionConfig& config) {
  if (config.draft.resolution == 0) {
    throw std::invalid_argument("session: wire transport needs resolution >= 1");
  }
  const std::uint32_t vocab = model.vocab_size();
  const WireParams wire = wire_params(config, vocab);

  const std::vector<std::uint8_t> peer_hello = carrier.receive();
  // Answer with our own view first so the peer can diagnose a mismatch,
  // then abort locally if the views differ.
  carrier.send(encode_handshake(config, vocab));
  check_handshake(peer_hello, config, vocab);

  CounterRng rng(config.seed, kCloudStream);
  Context ctx;
  std::vector<TokenId> tokens;

  for (std::uint32_t t = 0; t < config.batches; ++t) {
    const DraftPacket packet = decode_draft(carrier.receive(), wire);
    if (packet.batch_id != t) {
      throw ProtocolError("session: draft batch id " + std::to_string(packet.batch_id) +
                          " arrived out of order (expected " + std::to_string(t) + ")");
    }
    const DraftBatch batch = from_wire(packet, wire, config.draft.charge_token_bits);
    const BatchOutcome outcome = cloud_verify_batch(model, ctx, batch, rng);

    VerdictPacket verdict;
    verdict.batch_id = t;
    verdict.accepted_count = static_cast<std::uint16_t>(outcome.accepted_count);
    verdict.new_token = outcome.final_token;
    carrier.send(encode_verdict(verdict));

    for (std::uint32_t i = 0; i < outcome.accepted_count; ++i) {
      tokens.push_back(batch.tokens[i].token_id);
      ctx.push(batch.tokens[i].token_id);
    }
    tokens.push_back(outcome.final_token);
    ctx.push(outcome.final_token);
  }
  return tokens;
}

SessionResult run_in_process_session(const ModelPair& edge_model, const ModelPair& cloud_model,
                                     const SessionConfig& config) {
  auto [edge_end, cloud_end] = make_in_process_link();
  std::exception_ptr cloud_error;
  std::vector<TokenId> cloud_tokens;
  std::thread cloud([&] {
    try {
      cloud_tokens = run_cloud_session(*cloud_end, cloud_model, config);
    } catch (...) {
      cloud_error = std::current_exception();
    }
  });

  SessionResult result;
  std::exception_ptr edge_error;
  try {
    result = run_edge_session(*edge_end, edge_model, config);
  } catch (...) {
    edge_error = std::current_exception();
    // Unblock a cloud endpoint waiting on us.
    edge_end.reset();
  }
  cloud.join();
  if (edge_error) std::rethrow_exception(edge_error);
  if (cloud_error) std::rethrow_exception(cloud_error);
  if (cloud_tokens != result.tokens) {
    throw ProtocolError("session: edge and cloud disagree on the emitted tokens");
  }
  return result;
}

}  // namespace sqs
