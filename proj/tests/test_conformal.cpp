#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sqs/conformal.hpp"
#include "sqs/rng.hpp"

using namespace sqs;

namespace {
constexpr double kEta = 0.001;
constexpr double kAlpha = 0.0005;
}  // namespace

TEST_CASE("update arithmetic") {
  ThresholdController c(0.01, kEta, kAlpha);
  c.update(0.1);
  CHECK(c.beta() == doctest::Approx(0.0099005).epsilon(1e-12));

  ThresholdController neutral(0.42, kEta, kAlpha);
  neutral.update(kAlpha);
  CHECK(neutral.beta() == doctest::Approx(0.42).epsilon(1e-15));

  ThresholdController up(0.0, kEta, kAlpha);
  up.update(0.0);
  CHECK(up.beta() == doctest::Approx(5e-7).epsilon(1e-12));
}

TEST_CASE("every update moves beta by at most the envelope") {
  CounterRng rng(61, 0);
  ThresholdController c(1.0 / 64, kEta, kAlpha);
  for (int i = 0; i < 10000; ++i) {
    double before = c.beta();
    c.update(rng.next_double());
    double delta = c.beta() - before;
    CHECK(delta <= kEta * kAlpha + 1e-15);
    CHECK(delta >= -kEta * (1.0 - kAlpha) - 1e-15);
  }
}

TEST_CASE("full acceptance carries beta forward") {
  ThresholdController c(0.02, kEta, kAlpha);
  c.begin_batch();
  c.draft_step(0.1);
  c.draft_step(0.2);
  c.draft_step(0.0);
  double beta_after_third = c.beta();
  c.finish_batch(3);
  CHECK(c.beta() == beta_after_third);
  CHECK(c.steps_committed() == 3);
  CHECK(c.dropped_committed() == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("partial acceptance backtracks then applies the resampled update") {
  ThresholdController c(0.02, kEta, kAlpha);
  c.begin_batch();
  c.draft_step(0.1);
  double beta_after_first = c.beta();
  c.draft_step(0.25);  // rejected position; its dropped mass feeds the resample update
  c.draft_step(0.4);   // discarded entirely
  c.finish_batch(1);

  double expected = beta_after_first - kEta * (0.25 - kAlpha);
  CHECK(c.beta() == expected);  // bitwise: same op sequence
  CHECK(c.steps_committed() == 2);
  CHECK(c.dropped_committed() == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("immediate rejection restores the batch-start value") {
  ThresholdController c(0.02, kEta, kAlpha);
  double start = c.beta();
  c.begin_batch();
  c.draft_step(0.5);
  c.draft_step(0.5);
  c.finish_batch(0);
  CHECK(c.beta() == start - kEta * (0.5 - kAlpha));
  CHECK(c.steps_committed() == 1);
}

TEST_CASE("backtracking equals sequential replay of committed steps") {
  CounterRng rng(62, 0);
  ThresholdController batched(1.0 / 64, kEta, kAlpha);
  ThresholdController replay(1.0 / 64, kEta, kAlpha);
  for (int batch = 0; batch < 500; ++batch) {
    std::uint32_t drafted = 1 + rng.next_u64() % 8;
    std::vector<double> dropped(drafted);
    for (auto& d : dropped) {
      d = rng.next_double() * 0.05;
    }
    std::uint32_t accepted = rng.next_u64() % (drafted + 1);

    batched.begin_batch();
    for (double d : dropped) {
      batched.draft_step(d);
    }
    batched.finish_batch(accepted);

    for (std::uint32_t i = 0; i < accepted; ++i) {
      replay.update(dropped[i]);
    }
    if (accepted < drafted) {
      replay.update(dropped[accepted]);
    }
    CHECK(batched.beta() == replay.beta());  // bitwise equality expected
  }
}

TEST_CASE("telescoping identity over a long mixed run") {
  CounterRng rng(63, 0);
  ThresholdController c(1.0 / 64, kEta, kAlpha);
  for (int batch = 0; batch < 1000; ++batch) {
    std::uint32_t drafted = 1 + rng.next_u64() % 8;
    c.begin_batch();
    for (std::uint32_t i = 0; i < drafted; ++i) {
      c.draft_step(rng.next_double() * 0.02);
    }
    c.finish_batch(rng.next_u64() % (drafted + 1));
  }
  double lhs = c.dropped_committed();
  double rhs = kAlpha * static_cast<double>(c.steps_committed()) +
               (c.beta_initial() - c.beta()) / kEta;
  CHECK(std::abs(lhs - rhs) < 1e-9);
}

TEST_CASE("average dropped bound arithmetic") {
  double bound = average_dropped_ceiling(0.01, kEta, kAlpha, 10000);
  CHECK(bound == doctest::Approx(0.0005 + (0.01 + 1.0 + 5e-7) / 10.0).epsilon(1e-12));
  CHECK(bound == doctest::Approx(0.10150005).epsilon(1e-9));
  // Large-horizon limit approaches alpha.
  CHECK(average_dropped_ceiling(0.01, kEta, kAlpha, 1ULL << 40) ==
        doctest::Approx(kAlpha).epsilon(1e-3));
  CHECK(average_dropped_ceiling_loose(0.01, kEta, kAlpha, 10000) >
        bound - 1e-15);
}

TEST_CASE("eta zero freezes the threshold") {
  ThresholdController c(0.3, 0.0, kAlpha);
  c.update(1.0);
  c.update(0.0);
  CHECK(c.beta() == 0.3);
}

TEST_CASE("protocol misuse throws") {
  ThresholdController c(0.01, kEta, kAlpha);
  CHECK_THROWS_AS(c.draft_step(0.0), std::logic_error);
  CHECK_THROWS_AS(c.finish_batch(0), std::logic_error);
  c.begin_batch();
  CHECK_THROWS_AS(c.begin_batch(), std::logic_error);
  c.draft_step(0.0);
  CHECK_THROWS_AS(c.finish_batch(2), std::logic_error);
  CHECK_THROWS_AS(c.update(1.5), std::invalid_argument);
}
