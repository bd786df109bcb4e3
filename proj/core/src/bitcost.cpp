#include "sqs/bitcost.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sqs/ranking.hpp"

namespace sqs {

const char* scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::KSqs:
      return "k-sqs";
    case Scheme::CSqs:
      return "c-sqs";
    case Scheme::QsDense:
      return "qs-dense";
  }
  throw std::invalid_argument("scheme_name: unknown scheme");
}

std::uint32_t ceil_log2(std::uint64_t n) {
  if (n == 0) {
    throw std::invalid_argument("ceil_log2: n must be positive");
  }
  return static_cast<std::uint32_t>(std::bit_width(n - 1));
}

std::uint32_t ceil_log2_binomial(std::uint64_t n, std::uint64_t k) {
  BigInt c = binomial(n, k);
  if (c <= 0) {
    throw std::invalid_argument("ceil_log2_binomial: k exceeds n");
  }
  if (c == 1) {
    return 0;
  }
  return static_cast<std::uint32_t>(boost::multiprecision::msb(c - 1)) + 1;
}

double log2_binomial_real(std::uint64_t n, std::uint64_t k) {
  if (k > n) {
    throw std::invalid_argument("log2_binomial_real: k exceeds n");
  }
  double ln = std::lgamma(static_cast<double>(n) + 1.0) -
              std::lgamma(static_cast<double>(k) + 1.0) -
              std::lgamma(static_cast<double>(n - k) + 1.0);
  return ln / std::numbers::ln2;
}

double payload_bits(std::uint32_t k, std::uint32_t resolution) {
  if (k == 0 || resolution == 0) {
    throw std::invalid_argument("payload_bits: k and resolution must be positive");
  }
  return log2_binomial_real(static_cast<std::uint64_t>(resolution) + k - 1, k - 1);
}

std::uint32_t payload_bits_wire(std::uint32_t k, std::uint32_t resolution) {
  if (k == 0 || resolution == 0) {
    throw std::invalid_argument("payload_bits_wire: k and resolution must be positive");
  }
  return ceil_log2_binomial(static_cast<std::uint64_t>(resolution) + k - 1, k - 1);
}

double subset_bits_topk(std::uint32_t vocab_size, std::uint32_t k) {
  if (k == 0 || k > vocab_size) {
    throw std::invalid_argument("subset_bits_topk: k outside [1, vocab_size]");
  }
  return log2_binomial_real(vocab_size, k);
}

std::uint32_t subset_bits_topk_wire(std::uint32_t vocab_size, std::uint32_t k) {
  if (k == 0 || k > vocab_size) {
    throw std::invalid_argument("subset_bits_topk_wire: k outside [1, vocab_size]");
  }
  return ceil_log2_binomial(vocab_size, k);
}

std::uint32_t subset_bits_conformal(std::uint32_t vocab_size, std::uint32_t k) {
  return subset_bits_topk_wire(vocab_size, k) + ceil_log2(vocab_size);
}

BitCost total_bits(Scheme scheme, std::uint32_t vocab_size, std::uint32_t k,
                   std::uint32_t resolution) {
  BitCost cost;
  cost.scheme = scheme;
  cost.payload_bits_real = payload_bits(k, resolution);
  cost.payload_bits_wire = payload_bits_wire(k, resolution);
  switch (scheme) {
    case Scheme::KSqs:
      cost.subset_bits_real = subset_bits_topk(vocab_size, k);
      cost.subset_bits_wire = subset_bits_topk_wire(vocab_size, k);
      break;
    case Scheme::CSqs:
      cost.subset_bits_real = subset_bits_topk(vocab_size, k);
      cost.subset_bits_wire = subset_bits_topk_wire(vocab_size, k);
      cost.cardinality_bits = ceil_log2(vocab_size);
      break;
    case Scheme::QsDense:
      if (k != vocab_size) {
        throw std::invalid_argument("total_bits: QsDense requires k == vocab_size");
      }
      break;
  }
  cost.total_wire_bits = cost.subset_bits_wire + cost.payload_bits_wire + cost.cardinality_bits;
  return cost;
}

}  // namespace sqs
