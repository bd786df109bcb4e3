#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <vector>

#include "sqs/distribution.hpp"

namespace sqs {

using BigInt = boost::multiprecision::cpp_int;

// Exact C(n, k); zero when k > n.
BigInt binomial(std::uint64_t n, std::uint64_t k);

// Combinadic (colex) ranking of K-subsets of [0, vocab_size): for ascending
// elements c_0 < ... < c_{K-1}, rank = sum_i C(c_i, i+1). rank is in
// [0, C(vocab_size, K)).
BigInt rank_subset(const std::vector<TokenId>& support, std::uint32_t vocab_size);
std::vector<TokenId> unrank_subset(BigInt rank, std::uint32_t vocab_size, std::uint32_t k);

// Ranking of weak compositions of `resolution` into K parts, in ascending
// lexicographic order of the count vector. rank is in
// [0, C(resolution+K-1, K-1)).
BigInt rank_composition(const std::vector<std::uint32_t>& counts, std::uint32_t resolution);
std::vector<std::uint32_t> unrank_composition(BigInt rank, std::uint32_t k,
                                              std::uint32_t resolution);

}  // namespace sqs
