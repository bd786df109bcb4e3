#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sqs/models.hpp"

namespace sqs {

// One recorded (context -> logits) entry of an offline model trace.
struct TraceRecord {
  std::vector<TokenId> context;
  std::vector<double> draft_logits;   // length = vocab_size
  std::vector<double> target_logits;  // length = vocab_size
};

// Binary trace file: magic "SQST", version u8, vocab_size u32; then per
// record: context length u16, context ids u32 each, draft logits f64 each,
// target logits f64 each. All fields little-endian; logits roundtrip
// bit-exactly.
void write_trace(const std::string& path, std::uint32_t vocab_size,
                 const std::vector<TraceRecord>& records);

// ModelPair backed by a recorded trace. Querying a context that was never
// recorded throws TraceError(UnknownContext). When a context appears in
// multiple records, the last one wins.
std::unique_ptr<ModelPair> trace_pair(const std::string& path);

}  // namespace sqs
