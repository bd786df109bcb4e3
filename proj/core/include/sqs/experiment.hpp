#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sqs/latency.hpp"
#include "sqs/metrics.hpp"
#include "sqs/models.hpp"
#include "sqs/session.hpp"

namespace sqs {

// A full sweep description: scheme x temperature x (K for the fixed
// scheme) x seed, over a synthetic model pair or a recorded trace.
struct ExperimentConfig {
  std::vector<Scheme> schemes = {Scheme::KSqs, Scheme::CSqs};
  std::vector<double> temperatures = {0.1, 1.0};
  std::vector<std::uint32_t> k_grid = {1, 2, 5, 10};  // fixed-support scheme only

  std::uint32_t resolution = 100;
  double budget_bits = 5000.0;
  std::uint32_t l_max = 16;
  bool charge_token_bits = false;

  double alpha = 0.0005;
  double eta = 0.001;
  double beta_initial = -1.0;  // < 0 means "use 1/vocab_size"

  std::uint32_t seeds = 5;
  std::uint64_t seed_base = 1;
  std::uint32_t tokens_per_run = 2048;

  // When true, every batch starts from a fresh random context instead of
  // extending the generated sequence. Estimates over the context
  // distribution converge much faster than along a single self-driven
  // trajectory, which can lock into low-variety cycles.
  bool context_reset_per_batch = false;

  SyntheticModelSpec model;
  std::string trace_path;  // empty: synthetic model

  LatencyModel latency;
  ChannelModel channel;

  bool runtime_checks = true;  // verify budget/distortion/threshold bounds while running

  void validate() const;  // throws ConfigError naming the field
  // Resolves the 1/V default against the model actually in use.
  double beta_initial_effective(std::uint32_t vocab_size) const;
};

// Flat key-value config text: one `key = value` per line, `#` comments.
// Lists are comma-separated. Unknown keys and unparsable values raise
// ConfigError naming the key.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);  // IoError if unreadable

// Sequential budget rule on a scripted per-token cost sequence: the number
// of tokens drafted before the first one whose cost would exceed what
// remains of `budget`, capped at l_max.
std::uint32_t budget_prefix_length(const std::vector<double>& costs, double budget,
                                   std::uint32_t l_max);

// One run: a single (scheme, temperature, K, seed) point, executed
// in-process (no wire) with the session RNG streams. The model's
// temperatures must already be set. With `context_window` > 0 every batch
// starts from a fresh random context of that length (drawn from a stream
// independent of the draft/verify randomness); with 0 the run extends one
// continuous sequence.
RunMetrics run_single(const ModelPair& model, const SessionConfig& session,
                      const LatencyModel& latency, const ChannelModel& channel,
                      std::uint32_t tokens_per_run, bool runtime_checks,
                      std::uint32_t context_window = 0);

// The full sweep: per-seed rows in deterministic order, with mean and
// standard-error aggregate rows after each grid point's seeds.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

// Monte Carlo check of the rejection-budget bound: `runs` independent
// replicas of `batches_per_run` batches; reports the per-run mean realized
// rejection count against the per-run mean analytic budget.
struct RejectionBudgetResult {
  double mean_rejections = 0.0;
  double mean_rhs = 0.0;
  double stderr_rejections = 0.0;
  double stderr_rhs = 0.0;
  std::uint32_t runs = 0;
  bool holds = false;  // mean_rejections <= mean_rhs + 4 * stderr_rejections
};
RejectionBudgetResult evaluate_rejection_budget(const ExperimentConfig& config, Scheme scheme,
                                                std::uint32_t top_k, double temperature,
                                                std::uint32_t runs,
                                                std::uint32_t batches_per_run);

// CSV rendering: `#`-prefixed config echo, one header row, then data rows;
// byte-identical for identical inputs.
std::string render_csv(const std::vector<ResultRow>& rows, const ExperimentConfig& config);
void emit_csv(const std::vector<ResultRow>& rows, const ExperimentConfig& config,
              const std::string& path);  // IoError on write failure

}  // namespace sqs
