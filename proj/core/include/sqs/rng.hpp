#pragma once

#include <cstddef>
#include <cstdint>

namespace sqs {

// splitmix64 finalizer; bijective on 64-bit ints.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

// FNV-1a over raw bytes; used for transcript digests.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t h = 14695981039346656037ULL);

// Counter-based deterministic generator (splitmix64 sequence). The n-th
// output depends only on (seed, stream, n), so independent streams can be
// handed out per role / per context without coordination.
class CounterRng {
 public:
  CounterRng() : CounterRng(0, 0) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : base_(mix64(seed ^ mix64(stream ^ 0x6A09E667F3BCC909ULL))) {}

  std::uint64_t next_u64() {
    std::uint64_t z = base_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal (Box-Muller; second variate cached).
  double next_normal();

  // log of a Gamma(shape, 1) draw, computed in log space so shape << 1
  // stays finite (Marsaglia-Tsang, with the boost for shape < 1).
  double next_log_gamma(double shape);

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace sqs
