#pragma once

#include <cstdint>

namespace sqs {

// Uplink compression schemes. KSqs keeps a fixed top-K support; CSqs keeps
// an adaptive threshold support and therefore also transmits the support
// cardinality; QsDense sends the full-vocabulary lattice point.
enum class Scheme : std::uint8_t { KSqs = 0, CSqs = 1, QsDense = 2 };

const char* scheme_name(Scheme scheme);

// Exact ceil(log2 n), n >= 1.
std::uint32_t ceil_log2(std::uint64_t n);
// Exact ceil(log2 C(n, k)) computed on exact big integers; lgamma-based
// rounding can be off by one at integer boundaries.
std::uint32_t ceil_log2_binomial(std::uint64_t n, std::uint64_t k);
// Real-valued log2 C(n, k) via lgamma (analysis form, overflow-safe).
double log2_binomial_real(std::uint64_t n, std::uint64_t k);

// Bits to index a lattice point: log2 C(resolution+k-1, k-1) over the weak
// compositions of the resolution into k parts.
double payload_bits(std::uint32_t k, std::uint32_t resolution);
std::uint32_t payload_bits_wire(std::uint32_t k, std::uint32_t resolution);

// Bits to describe a fixed-cardinality support subset: log2 C(V, k).
double subset_bits_topk(std::uint32_t vocab_size, std::uint32_t k);
std::uint32_t subset_bits_topk_wire(std::uint32_t vocab_size, std::uint32_t k);

// Adaptive-support description: ceil(log2 C(V,k)) subset rank plus a
// ceil(log2 V) cardinality field.
std::uint32_t subset_bits_conformal(std::uint32_t vocab_size, std::uint32_t k);

// Per-token uplink cost of one quantized distribution, split into the
// support-description and lattice-payload components, in both real-valued
// (analysis) and ceiled (wire) forms.
struct BitCost {
  Scheme scheme = Scheme::KSqs;
  double subset_bits_real = 0.0;
  std::uint32_t subset_bits_wire = 0;
  double payload_bits_real = 0.0;
  std::uint32_t payload_bits_wire = 0;
  std::uint32_t cardinality_bits = 0;  // CSqs only, else 0
  std::uint32_t total_wire_bits = 0;

  // The value charged against the uplink budget. KSqs and QsDense charge
  // the real-valued cost; CSqs charges its subset and cardinality fields
  // as the integers they occupy on the wire plus the real payload.
  double budget_bits() const {
    if (scheme == Scheme::CSqs) {
      return static_cast<double>(subset_bits_wire + cardinality_bits) + payload_bits_real;
    }
    return subset_bits_real + payload_bits_real;
  }
};

BitCost total_bits(Scheme scheme, std::uint32_t vocab_size, std::uint32_t k,
                   std::uint32_t resolution);

}  // namespace sqs
