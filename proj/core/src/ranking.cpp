#include "sqs/ranking.hpp"

#include <stdexcept>

namespace sqs {

BigInt binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) {
    return 0;
  }
  if (k > n - k) {
    k = n - k;
  }
  BigInt result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;  // exact: every prefix product of the multiplicative form is integral
  }
  return result;
}

BigInt rank_subset(const std::vector<TokenId>& support, std::uint32_t vocab_size) {
  const std::size_t k = support.size();
  for (std::size_t i = 0; i < k; ++i) {
    if (support[i] >= vocab_size) {
      throw std::invalid_argument("rank_subset: element out of range");
    }
    if (i > 0 && support[i] <= support[i - 1]) {
      throw std::invalid_argument("rank_subset: elements not strictly increasing");
    }
  }
  if (k == 0) {
    return 0;
  }
  // Walk c downward from vocab_size-1 maintaining B = C(c, r), so each step
  // is O(1) big-int operations instead of a fresh binomial.
  BigInt rank = 0;
  BigInt b = binomial(vocab_size - 1, static_cast<std::uint32_t>(k));
  std::uint64_t c = vocab_size - 1;
  std::uint64_t r = k;
  for (std::size_t idx = k; idx-- > 0;) {
    while (c > support[idx]) {
      b *= static_cast<std::int64_t>(c) - static_cast<std::int64_t>(r);
      b /= static_cast<std::int64_t>(c);
      --c;
    }
    rank += b;  // C(support[idx], idx+1)
    if (idx == 0) {
      break;
    }
    if (b == 0) {
      // support[idx] == idx: the remaining prefix is forced to {0..idx-1},
      // contributing nothing.
      break;
    }
    b *= static_cast<std::int64_t>(r);
    b /= static_cast<std::int64_t>(c) - static_cast<std::int64_t>(r) + 1;
    --r;  // b = C(c, r)
  }
  return rank;
}

std::vector<TokenId> unrank_subset(BigInt rank, std::uint32_t vocab_size, std::uint32_t k) {
  if (k > vocab_size) {
    throw std::invalid_argument("unrank_subset: k exceeds vocab_size");
  }
  if (rank < 0 || rank >= binomial(vocab_size, k)) {
    throw std::invalid_argument("unrank_subset: rank out of range");
  }
  std::vector<TokenId> out(k);
  if (k == 0) {
    return out;
  }
  BigInt b = binomial(vocab_size - 1, k);
  std::uint64_t c = vocab_size - 1;
  std::uint64_t r = k;
  for (std::uint32_t idx = k; idx-- > 0;) {
    while (b > rank) {
      b *= static_cast<std::int64_t>(c) - static_cast<std::int64_t>(r);
      b /= static_cast<std::int64_t>(c);
      --c;
    }
    out[idx] = static_cast<TokenId>(c);
    rank -= b;
    if (idx == 0) {
      break;
    }
    if (c == idx) {
      // Forced minimal tail {0..idx-1}; a valid rank has nothing left.
      for (std::uint32_t j = 0; j < idx; ++j) {
        out[j] = j;
      }
      break;
    }
    b *= static_cast<std::int64_t>(r);
    b /= static_cast<std::int64_t>(c) - static_cast<std::int64_t>(r) + 1;
    --r;  // b = C(c, r) with the decremented r
    b *= static_cast<std::int64_t>(c) - static_cast<std::int64_t>(r);
    b /= static_cast<std::int64_t>(c);
    --c;  // candidates for the next element start at one below
  }
  return out;
}

BigInt rank_composition(const std::vector<std::uint32_t>& counts, std::uint32_t resolution) {
  const std::size_t k = counts.size();
  if (k == 0) {
    throw std::invalid_argument("rank_composition: empty counts");
  }
  std::uint64_t total = 0;
  for (auto c : counts) {
    total += c;
  }
  if (total != resolution) {
    throw std::invalid_argument("rank_composition: counts do not sum to the resolution");
  }
  // At position i with remaining sum R and m parts after it, compositions
  // with a smaller value at i number C(R+m, m) - C(R-counts[i]+m, m)
  // (hockey-stick sum over y < counts[i] of C(R-y+m-1, m-1)).
  BigInt rank = 0;
  std::uint64_t remaining = resolution;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    std::uint64_t m = k - i - 1;
    rank += binomial(remaining + m, m) - binomial(remaining - counts[i] + m, m);
    remaining -= counts[i];
  }
  return rank;
}

std::vector<std::uint32_t> unrank_composition(BigInt rank, std::uint32_t k,
                                              std::uint32_t resolution) {
  if (k == 0) {
    throw std::invalid_argument("unrank_composition: k must be positive");
  }
  if (rank < 0 || rank >= binomial(resolution + k - 1, k - 1)) {
    throw std::invalid_argument("unrank_composition: rank out of range");
  }
  std::vector<std::uint32_t> out(k);
  std::uint64_t remaining = resolution;
  for (std::uint32_t i = 0; i + 1 < k; ++i) {
    std::uint64_t m = k - i - 1;
    // Compositions with a value below y at this position number
    // F(y) = C(remaining+m, m) - C(remaining-y+m, m). Binary-search the
    // largest y with F(y) <= rank; C(remaining-y+m, m) decreases in y.
    BigInt whole = binomial(remaining + m, m);
    BigInt target = whole - rank;  // want largest y with C(remaining-y+m, m) >= target
    std::uint64_t lo = 0;
    std::uint64_t hi = remaining;
    while (lo < hi) {
      std::uint64_t mid = lo + (hi - lo + 1) / 2;
      if (binomial(remaining - mid + m, m) >= target) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    rank -= whole - binomial(remaining - lo + m, m);
    out[i] = static_cast<std::uint32_t>(lo);
    remaining -= lo;
  }
  out[k - 1] = static_cast<std::uint32_t>(remaining);
  return out;
}

}  // namespace sqs
