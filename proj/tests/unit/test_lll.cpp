#include <doctest.h>

#include <cmath>

#include "discforge/lll.hpp"

using namespace discforge;

TEST_CASE("threshold and default round limit") {
  CHECK(lll_threshold(16) == doctest::Approx(4 * std::sqrt(16 * std::log(16.0))));
  CHECK(lll_threshold(16) == doctest::Approx(26.6).epsilon(2e-3));
  CHECK(lll_default_t_max(1024) == 100L * 1024 * 7);
}

TEST_CASE("trivial instances need no rounds") {
  Instance zero = make_instance(Mat::Zero(6, 6));
  zero.col_sparsity = 2;
  const LllRun z = lll_color(zero, 1);
  CHECK(z.trace.total_rounds == 0);
  CHECK(z.trace.terminated);
  CHECK(z.discrepancy == 0);

  const LllRun id = lll_color(make_instance(Mat::Identity(10, 10)), 1);
  CHECK(id.s == 2);
  CHECK(id.discrepancy <= 1.0);
  CHECK(id.trace.total_rounds == 0);
}

TEST_CASE("resampling with a tight threshold") {
  const Instance a = gen_regular_system(64, 6, 2);
  const LllRun r = lll_color(a, 3, std::nullopt, 2.0);
  CHECK(r.trace.terminated);
  CHECK(r.discrepancy <= 2.0);
  CHECK(r.trace.total_rounds > 0);
  for (const auto& round : r.trace.rounds) CHECK(round.bad >= 1);
  // Deterministic given the seed.
  CHECK(lll_color(a, 3, std::nullopt, 2.0).coloring == r.coloring);
}

TEST_CASE("non-termination carries the trace") {
  const Instance a = gen_regular_system(32, 4, 1);
  try {
    lll_color(a, 1, 5, 0.0);  // every row with an even count of ones can hit 0, but not all at once
    FAIL("expected NonTermination");
  } catch (const NonTermination& e) {
    CHECK(e.code() == ErrorCode::kNonTermination);
    CHECK(e.partial().trace.total_rounds == 5);
    CHECK_FALSE(e.partial().trace.terminated);
  }
}

TEST_CASE("input checks") {
  CHECK_THROWS_AS(lll_color(make_instance(-Mat::Identity(3, 3)), 1), Error);
  Instance lying = make_instance(Mat::Ones(4, 4));
  lying.col_sparsity = 2;
  CHECK_THROWS_AS(lll_color(lying, 1), Error);
}

TEST_CASE("chernoff witness") {
  const ChernoffWitness w = chernoff_witness(16, 100000, 1);
  CHECK(w.exact == 0.0);  // 26.6 > 16: no row of 16 signs can be bad
  CHECK(w.empirical <= w.bound);
  const ChernoffWitness big = chernoff_witness(400, 20000, 2);
  CHECK(big.exact > 0.0);
  CHECK(big.exact <= big.bound);
  CHECK(big.empirical <= big.bound + 1e-12);
}
