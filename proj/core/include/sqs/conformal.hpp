#pragma once

#include <cstdint>
#include <vector>

namespace sqs {

// Online conformal controller for the adaptive-threshold scheme: after each
// drafted token the threshold moves by -eta * (dropped_mass - alpha), so the
// long-run average dropped mass tracks alpha. Speculative batches record a
// checkpoint per drafted position; when the verifier reports that only the
// first T positions survived, the threshold backtracks bitwise to its value
// after position T's update, discards the rejected positions' updates, and
// applies a single update for the resampled token using the dropped mass the
// edge observed at the rejected position. Cumulative statistics cover
// exactly the committed steps (accepted + resampled).
class ThresholdController {
 public:
  ThresholdController(double beta_initial, double eta, double alpha);

  double beta() const { return beta_; }
  double beta_initial() const { return beta_initial_; }
  double eta() const { return eta_; }
  double alpha() const { return alpha_; }

  // One raw threshold update (no batch bookkeeping).
  void update(double dropped_mass);

  // Speculative-batch protocol. draft_step records the dropped mass of the
  // next drafted position (sparsified at the current threshold) and updates
  // the threshold; finish_batch applies the verifier's verdict.
  void begin_batch();
  void draft_step(double dropped_mass);
  void finish_batch(std::uint32_t accepted_count);
  bool in_batch() const { return in_batch_; }
  std::uint32_t batch_positions() const { return static_cast<std::uint32_t>(batch_.size()); }

  // Committed-step statistics (exclude rolled-back positions).
  std::uint64_t steps_committed() const { return steps_committed_; }
  double dropped_committed() const { return dropped_committed_; }

 private:
  struct Checkpoint {
    double dropped;
    double beta_after;
  };

  double beta_initial_;
  double eta_;
  double alpha_;
  double beta_;
  bool in_batch_ = false;
  double batch_start_beta_ = 0.0;
  std::vector<Checkpoint> batch_;
  std::uint64_t steps_committed_ = 0;
  double dropped_committed_ = 0.0;
};

// Guaranteed ceiling on the average committed dropped mass after t steps:
// alpha + (|beta_initial| + 1 + eta*alpha) / (eta * t).
double average_dropped_ceiling(double beta_initial, double eta, double alpha,
                               std::uint64_t t);

// Variant with the (|beta_initial| + 1 + eta) numerator; the looser of the
// two is what the runtime monitor enforces.
double average_dropped_ceiling_loose(double beta_initial, double eta, double alpha,
                                     std::uint64_t t);

}  // namespace sqs
