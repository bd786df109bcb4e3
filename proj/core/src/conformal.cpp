#include "sqs/conformal.hpp"

#include <cmath>
#include <stdexcept>

namespace sqs {

ThresholdController::ThresholdController(double beta_initial, double eta, double alpha)
    : beta_initial_(beta_initial), eta_(eta), alpha_(alpha), beta_(beta_initial) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("ThresholdController: eta must be finite and >= 0");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument("ThresholdController: alpha must be in (0, 1)");
  }
  if (!std::isfinite(beta_initial)) {
    throw std::invalid_argument("ThresholdController: beta_initial must be finite");
  }
}

void ThresholdController::update(double dropped_mass) {
  if (dropped_mass < 0.0 || dropped_mass > 1.0) {
    throw std::invalid_argument("ThresholdController: dropped_mass outside [0, 1]");
  }
  beta_ -= eta_ * (dropped_mass - alpha_);
}

void ThresholdController::begin_batch() {
  if (in_batch_) {
    throw std::logic_error("ThresholdController: begin_batch inside an open batch");
  }
  in_batch_ = true;
  batch_start_beta_ = beta_;
  batch_.clear();
}

void ThresholdController::draft_step(double dropped_mass) {
  if (!in_batch_) {
    throw std::logic_error("ThresholdController: draft_step outside a batch");
  }
  update(dropped_mass);
  batch_.push_back({dropped_mass, beta_});
}

void ThresholdController::finish_batch(std::uint32_t accepted_count) {
  if (!in_batch_) {
    throw std::logic_error("ThresholdController: finish_batch outside a batch");
  }
  const std::uint32_t drafted = static_cast<std::uint32_t>(batch_.size());
  if (accepted_count > drafted) {
    throw std::logic_error("ThresholdController: accepted_count exceeds drafted positions");
  }
  for (std::uint32_t i = 0; i < accepted_count; ++i) {
    dropped_committed_ += batch_[i].dropped;
  }
  steps_committed_ += accepted_count;
  if (accepted_count < drafted) {
    // Bitwise restore to the value after the last accepted position, then a
    // single update for the cloud-resampled token, fed with the dropped
    // mass the edge computed at the first rejected position.
    beta_ = accepted_count == 0 ? batch_start_beta_ : batch_[accepted_count - 1].beta_after;
    double resampled_dropped = batch_[accepted_count].dropped;
    update(resampled_dropped);
    dropped_committed_ += resampled_dropped;
    steps_committed_ += 1;
  }
  // Full acceptance keeps the threshold as-is; the bonus token is sampled
  // by the verifier and carries no sparsification of its own.
  in_batch_ = false;
  batch_.clear();
}

double average_dropped_ceiling(double beta_initial, double eta, double alpha,
                               std::uint64_t t) {
  if (t == 0 || !(eta > 0.0)) {
    throw std::invalid_argument("average_dropped_ceiling: need t >= 1 and eta > 0");
  }
  return alpha + (std::abs(beta_initial) + 1.0 + eta * alpha) / (eta * static_cast<double>(t));
}

double average_dropped_ceiling_loose(double beta_initial, double eta, double alpha,
                                     std::uint64_t t) {
  if (t == 0 || !(eta > 0.0)) {
    throw std::invalid_argument("average_dropped_ceiling_loose: need t >= 1 and eta > 0");
  }
  return alpha + (std::abs(beta_initial) + 1.0 + eta) / (eta * static_cast<double>(t));
}

}  // namespace sqs
