#pragma once

#include <cstdint>
#include <stdexcept>

namespace sqs {

// Uplink channel: bandwidth, round-trip time, and the per-batch bit budget
// the drafting side must respect.
struct ChannelModel {
  double bandwidth_bits_per_s = 1e6;
  double rtt_s = 0.020;
  double per_batch_budget_bits = 5000.0;

  void validate() const {
    if (!(bandwidth_bits_per_s > 0.0)) {
      throw std::invalid_argument("channel: bandwidth must be positive");
    }
    if (!(rtt_s > 0.0)) throw std::invalid_argument("channel: rtt must be positive");
    if (!(per_batch_budget_bits > 0.0)) {
      throw std::invalid_argument("channel: per-batch budget must be positive");
    }
  }
};

// Per-batch latency decomposition: edge drafting time, uplink transfer,
// cloud verification. The defaults are plausible for a ~100M-parameter
// edge model against a ~1B-parameter cloud model; they are configuration
// knobs, and only relative orderings should be read from them.
struct LatencyModel {
  double t_slm_per_token_s = 0.002;
  double t_llm_verify_per_batch_s = 0.060;

  void validate() const {
    if (t_slm_per_token_s < 0.0 || t_llm_verify_per_batch_s < 0.0) {
      throw std::invalid_argument("latency: components must be nonnegative");
    }
  }

  double uplink_seconds(double bits, const ChannelModel& channel) const {
    return bits / channel.bandwidth_bits_per_s + channel.rtt_s;
  }

  // Total = drafting + uplink + verification, exactly additive.
  double batch_seconds(std::uint32_t drafted, double bits, const ChannelModel& channel) const {
    return static_cast<double>(drafted) * t_slm_per_token_s + uplink_seconds(bits, channel) +
           t_llm_verify_per_batch_s;
  }
};

}  // namespace sqs
