#include "sqs/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sqs {

namespace {

// Renormalizes the retained masses and clamps bookkeeping to [0, 1].
// A full-vocabulary support keeps its masses verbatim: renormalizing is a
// mathematical no-op there, and skipping it keeps the sparse form bitwise
// identical to the input (so a lossless configuration stays lossless).
SparseDistribution finish_sparse(std::vector<TokenId> support, std::vector<double> raw,
                                 double retained, bool full_support) {
  SparseDistribution out;
  out.support = std::move(support);
  out.masses = std::move(raw);
  if (!full_support) {
    for (double& m : out.masses) {
      m /= retained;
    }
  }
  out.dropped_mass = full_support ? 0.0 : std::clamp(1.0 - retained, 0.0, 1.0);
  return out;
}

std::uint32_t argmax_index(const std::vector<double>& v) {
  return static_cast<std::uint32_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

bool TokenDistribution::is_valid(double tol) const {
  if (probs.empty()) {
    return false;
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      return false;
    }
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

double tv_distance(const TokenDistribution& a, const TokenDistribution& b) {
  if (a.probs.size() != b.probs.size()) {
    throw std::invalid_argument("tv_distance: vocab sizes differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.probs.size(); ++i) {
    acc += std::abs(a.probs[i] - b.probs[i]);
  }
  return 0.5 * acc;
}

TokenDistribution apply_temperature(const std::vector<double>& logits, double temperature) {
  if (logits.empty()) {
    throw std::invalid_argument("apply_temperature: empty logits");
  }
  for (double l : logits) {
    if (!std::isfinite(l)) {
      throw std::invalid_argument("apply_temperature: non-finite logit");
    }
  }
  if (temperature < 0.0) {
    throw std::invalid_argument("apply_temperature: negative temperature");
  }
  TokenDistribution out;
  out.probs.assign(logits.size(), 0.0);
  if (temperature == 0.0) {
    out.probs[argmax_index(logits)] = 1.0;
    return out;
  }
  double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    double e = std::exp((logits[i] - max_logit) / temperature);
    out.probs[i] = e;
    sum += e;
  }
  for (double& p : out.probs) {
    p /= sum;
  }
  return out;
}

SparseDistribution sparsify_top_k(const TokenDistribution& q, std::uint32_t k) {
  const std::uint32_t v = q.vocab_size();
  if (k < 1 || k > v) {
    throw std::invalid_argument("sparsify_top_k: k outside [1, vocab_size]");
  }
  std::vector<TokenId> ids(v);
  std::iota(ids.begin(), ids.end(), 0);
  std::partial_sort(ids.begin(), ids.begin() + k, ids.end(), [&](TokenId a, TokenId b) {
    if (q.probs[a] != q.probs[b]) {
      return q.probs[a] > q.probs[b];
    }
    return a < b;
  });
  ids.resize(k);
  std::sort(ids.begin(), ids.end());

  std::vector<double> raw(k);
  double retained = 0.0;
  for (std::uint32_t i = 0; i < k; ++i) {
    raw[i] = q.probs[ids[i]];
    retained += raw[i];
  }
  return finish_sparse(std::move(ids), std::move(raw), retained, k == v);
}

SparseDistribution sparsify_threshold(const TokenDistribution& q, double beta) {
  const std::uint32_t v = q.vocab_size();
  if (v == 0) {
    throw std::invalid_argument("sparsify_threshold: empty distribution");
  }
  std::vector<TokenId> ids;
  std::vector<double> raw;
  double retained = 0.0;
  for (std::uint32_t i = 0; i < v; ++i) {
    if (q.probs[i] >= beta) {
      ids.push_back(i);
      raw.push_back(q.probs[i]);
      retained += q.probs[i];
    }
  }
  if (ids.empty()) {
    // beta exceeds max q: keep the argmax singleton so drafting can proceed.
    std::uint32_t best = argmax_index(q.probs);
    ids.push_back(best);
    raw.push_back(q.probs[best]);
    retained = q.probs[best];
  }
  return finish_sparse(std::move(ids), std::move(raw), retained,
                       ids.size() == static_cast<std::size_t>(v));
}

TokenDistribution densify(const SparseDistribution& s, std::uint32_t vocab_size) {
  TokenDistribution out;
  out.probs.assign(vocab_size, 0.0);
  for (std::size_t i = 0; i < s.support.size(); ++i) {
    if (s.support[i] >= vocab_size) {
      throw std::invalid_argument("densify: support id out of range");
    }
    if (i > 0 && s.support[i] <= s.support[i - 1]) {
      throw std::invalid_argument("densify: support not strictly increasing");
    }
    out.probs[s.support[i]] = s.masses[i];
  }
  return out;
}

}  // namespace sqs
