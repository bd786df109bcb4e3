#pragma once

#include <cstdint>
#include <string>

#include "sqs/bitcost.hpp"

namespace sqs {

// Aggregated outcome of one run (one grid point, one seed). Counters are
// doubles so the same struct carries cross-seed means and standard errors;
// per-run values are exact integers well inside double precision.
struct RunMetrics {
  double batches = 0;
  double drafted_tokens = 0;    // sum of L^t
  double accepted_tokens = 0;   // sum of T^t
  double resampled_tokens = 0;  // rejected-and-resampled count
  double tokens_generated = 0;  // sum of T^t + 1

  double resampling_rate = 0.0;        // resampled_tokens / batches
  double avg_total_time = 0.0;         // seconds per batch (drafting + uplink + verify)
  double avg_bits_per_batch = 0.0;     // budget-accounted distribution bits
  double avg_wire_bits_per_batch = 0.0;
  double avg_dropped_mass = 0.0;       // per drafted token

  // Realized rejection-budget decomposition summed over drafted positions:
  // TV(draft, target) + dropped mass + support/(4*resolution).
  double rejection_budget_rhs = 0.0;

  // Adaptive-threshold diagnostics (zero when the scheme has no controller).
  double conformal_steps = 0;           // committed controller updates
  double conformal_avg_dropped = 0.0;   // committed dropped mass / steps
  double dropped_ceiling_rhs = 0.0;            // dropped-mass bound at T = conformal_steps
  double beta_final = 0.0;
};

// One CSV row: a grid point identity plus its metrics. `seed_label` is the
// seed number for per-seed rows, or "mean"/"stderr" for aggregates.
struct ResultRow {
  Scheme scheme = Scheme::KSqs;
  double temperature = 1.0;
  std::uint32_t top_k = 0;  // 0 for schemes without a fixed support size
  double alpha = 0.0;
  double eta = 0.0;
  double beta_initial = 0.0;
  std::string seed_label;
  RunMetrics metrics;
};

}  // namespace sqs
