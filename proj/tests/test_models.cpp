#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sqs/distribution.hpp"
#include "sqs/models.hpp"
#include "sqs/rng.hpp"

using namespace sqs;

namespace {

Context random_context(CounterRng& rng, std::uint32_t vocab_size, std::size_t len) {
  Context ctx;
  for (std::size_t i = 0; i < len; ++i) {
    ctx.push(static_cast<TokenId>(rng.next_u64() % vocab_size));
  }
  return ctx;
}

double mean_tv(const ModelPair& pair, std::uint64_t seed, int contexts) {
  CounterRng rng(seed, 999);
  double total = 0.0;
  for (int i = 0; i < contexts; ++i) {
    Context ctx = random_context(rng, pair.vocab_size(), 1 + rng.next_u64() % 8);
    total += tv_distance(pair.draft_distribution(ctx), pair.target_distribution(ctx));
  }
  return total / contexts;
}

double entropy(const TokenDistribution& d) {
  double h = 0.0;
  for (double p : d.probs) {
    if (p > 0.0) {
      h -= p * std::log2(p);
    }
  }
  return h;
}

}  // namespace

TEST_CASE("zero divergence makes draft and target identical") {
  SyntheticModelSpec spec;
  spec.divergence = 0.0;
  spec.seed = 7;
  auto pair = synthetic_pair(spec);
  CounterRng rng(1, 0);
  for (int i = 0; i < 50; ++i) {
    Context ctx = random_context(rng, spec.vocab_size, i % 5);
    CHECK(tv_distance(pair->draft_distribution(ctx), pair->target_distribution(ctx)) == 0.0);
  }
}

TEST_CASE("model outputs are deterministic in (spec, context)") {
  SyntheticModelSpec spec;
  spec.seed = 42;
  auto a = synthetic_pair(spec);
  auto b = synthetic_pair(spec);
  CounterRng rng(2, 0);
  for (int i = 0; i < 20; ++i) {
    Context ctx = random_context(rng, spec.vocab_size, 3);
    CHECK(a->draft_logits(ctx) == b->draft_logits(ctx));
    CHECK(a->target_logits(ctx) == a->target_logits(ctx));
    CHECK(a->target_logits(ctx) == b->target_logits(ctx));
  }
}

TEST_CASE("markov window: only the last tokens matter") {
  SyntheticModelSpec spec;
  spec.markov_order = 1;
  spec.seed = 5;
  auto pair = synthetic_pair(spec);
  Context a;
  a.token_ids = {1, 2, 3};
  Context b;
  b.token_ids = {9, 9, 3};
  CHECK(pair->target_logits(a) == pair->target_logits(b));
  Context c;
  c.token_ids = {1, 2, 4};
  CHECK(pair->target_logits(a) != pair->target_logits(c));
}

TEST_CASE("mean draft-target TV grows with the divergence knob") {
  double tv_01 = 0.0;
  double tv_03 = 0.0;
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    SyntheticModelSpec lo;
    lo.divergence = 0.1;
    lo.seed = seed;
    SyntheticModelSpec hi;
    hi.divergence = 0.3;
    hi.seed = seed;
    tv_01 += mean_tv(*synthetic_pair(lo), seed, 1000);
    tv_03 += mean_tv(*synthetic_pair(hi), seed, 1000);
  }
  CHECK(tv_03 > tv_01);
  CHECK(tv_01 > 0.0);
}

TEST_CASE("default generator is heavy-headed") {
  SyntheticModelSpec spec;  // defaults: concentration 0.02, V = 64
  spec.seed = 17;
  auto pair = synthetic_pair(spec);
  CounterRng rng(3, 0);
  const int contexts = 300;
  // Top 5% of tokens (ceil(0.05 * 64) = 4) should hold > 0.9 of the mass
  // on average.
  double total_top_mass = 0.0;
  for (int i = 0; i < contexts; ++i) {
    Context ctx = random_context(rng, spec.vocab_size, 1 + i % 6);
    auto p = pair->target_distribution(ctx);
    std::vector<double> sorted = p.probs;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    total_top_mass += sorted[0] + sorted[1] + sorted[2] + sorted[3];
  }
  CHECK(total_top_mass / contexts > 0.9);
}

TEST_CASE("a minority of windows is uncertain, the rest stay peaked") {
  SyntheticModelSpec spec;
  spec.seed = 17;
  auto pair = synthetic_pair(spec);
  CounterRng rng(9, 0);
  const int contexts = 400;
  int uncertain = 0;
  for (int i = 0; i < contexts; ++i) {
    Context ctx = random_context(rng, spec.vocab_size, 1 + i % 6);
    auto p = pair->target_distribution(ctx);
    double top1 = *std::max_element(p.probs.begin(), p.probs.end());
    // The two window kinds are far apart: low-contrast windows top out
    // near uniform (~0.07 at the default spread), heavy-head windows
    // almost always exceed 0.5.
    if (top1 < 0.3) ++uncertain;
  }
  const double share = static_cast<double>(uncertain) / contexts;
  CHECK(share > 0.01);
  CHECK(share < 0.25);

  // Disabling the mixture removes the uncertain windows entirely.
  spec.flat_fraction = 0.0;
  auto pure = synthetic_pair(spec);
  CounterRng rng2(9, 0);
  for (int i = 0; i < contexts; ++i) {
    Context ctx = random_context(rng2, spec.vocab_size, 1 + i % 6);
    auto p = pure->target_distribution(ctx);
    double top4 = 0.0;
    std::vector<double> sorted = p.probs;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (int j = 0; j < 4; ++j) top4 += sorted[j];
    CHECK(top4 > 0.5);
  }
}

TEST_CASE("entropy is nondecreasing in temperature") {
  SyntheticModelSpec spec;
  spec.seed = 23;
  auto pair = synthetic_pair(spec);
  CounterRng rng(4, 0);
  for (int i = 0; i < 30; ++i) {
    Context ctx = random_context(rng, spec.vocab_size, 2);
    double prev = -1.0;
    for (double t : {0.0, 0.1, 0.5, 1.0, 2.0, 10.0}) {
      pair->temperature_target = t;
      double h = entropy(pair->target_distribution(ctx));
      CHECK(h >= prev - 1e-12);
      prev = h;
    }
    pair->temperature_target = 1.0;
  }
}

TEST_CASE("spec validation") {
  SyntheticModelSpec bad;
  bad.divergence = 1.5;
  CHECK_THROWS_AS(synthetic_pair(bad), std::invalid_argument);
  bad.divergence = 0.1;
  bad.concentration = 0.0;
  CHECK_THROWS_AS(synthetic_pair(bad), std::invalid_argument);
  bad.concentration = 1.0;
  bad.vocab_size = 0;
  CHECK_THROWS_AS(synthetic_pair(bad), std::invalid_argument);
  bad.vocab_size = 64;
  bad.flat_fraction = 1.0;
  CHECK_THROWS_AS(synthetic_pair(bad), std::invalid_argument);
  bad.flat_fraction = -0.1;
  CHECK_THROWS_AS(synthetic_pair(bad), std::invalid_argument);
  bad.flat_fraction = 0.1;
  bad.flat_spread = -1.0;
  CHECK_THROWS_AS(synthetic_pair(bad), std::invalid_argument);
}
