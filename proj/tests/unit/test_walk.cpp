#include <doctest.h>

#include <sstream>

#include "discforge/error.hpp"
#include "discforge/trace.hpp"
#include "discforge/verify.hpp"
#include "discforge/walk.hpp"

using namespace discforge;

namespace {

WalkResult full_walk(int n, double L, int threshold = 2) {
  FullSpaceOracle oracle(threshold);
  WalkOptions o;
  o.L = L;
  return run_walk(n, oracle, o);
}

// Oracle that offers R^F but caps every step at a fixed length, so the walk
// needs many short steps.
class ShortStepOracle final : public Oracle {
 public:
  explicit ShortStepOracle(double cap) : cap_(cap) {}
  OracleResult query(const PartialColoring& x) override {
    if (x.k() < 2) return OracleResult::Undefined();
    OracleResult r;
    r.undefined = false;
    r.subspace = full_space(x.F);
    r.sign_form = Vec::Zero(x.n());
    r.diagnostics = {{"k", x.k()}, {"k_cap", x.n()}};
    return r;
  }
  double accept_step(const PartialColoring&, const Vec&, double proposed) override {
    return std::min(proposed, cap_);
  }
  int undefined_threshold() const override { return 2; }

 private:
  double cap_;
};

}  // namespace

TEST_CASE("boundary step and direction picking") {
  PartialColoring pc = PartialColoring::zeros(3);
  pc.x << 0.5, -0.5, 0.0;
  Vec d(3);
  d << 1, 0, 0;
  CHECK(boundary_step(pc, d, 1.0) == doctest::Approx(0.5));
  CHECK(boundary_step(pc, d, 0.1) == doctest::Approx(0.1));
  d << 0, -1, 0;
  CHECK(boundary_step(pc, d, 1.0) == doctest::Approx(0.5));

  const Mat basis = Mat::Identity(3, 3);
  const auto dir = pick_direction(basis, pc.x);
  REQUIRE(dir);
  CHECK(std::abs(dir->dot(pc.x)) < 1e-14);
  CHECK(dir->norm() == doctest::Approx(1.0));
  // A one-dimensional span not orthogonal to x gives nothing.
  Mat line(3, 1);
  line << 1, 0, 0;
  CHECK_FALSE(pick_direction(line, pc.x));
}

TEST_CASE("full-space walk ends at a vertex with the promised bookkeeping") {
  const int n = 40;
  const WalkResult r = full_walk(n, 0.5);
  CHECK((r.coloring.array().abs() == 1.0).all());
  int active = 0;
  for (int j = 0; j < n; ++j) active += std::abs(r.x_final(j)) < 1.0;
  CHECK(active <= 1);
  CHECK(r.sum_sq_steps <= n * (1 + 1e-9));
  CHECK(r.steps <= n / (0.5 * 0.5) + n);
  CHECK(r.trace.steps.size() == static_cast<std::size_t>(r.steps));
}

TEST_CASE("trace round-trip and verification") {
  ShortStepOracle oracle(0.05);
  WalkOptions o;
  o.L = 0.5;
  WalkResult r = run_walk(12, oracle, o);
  r.trace.meta["algorithm"] = "test";
  std::stringstream ss;
  write_trace(r.trace, ss);
  const WalkTrace back = read_trace(ss);
  CHECK(back.n == 12);
  CHECK(back.steps.size() == r.trace.steps.size());
  CHECK(back.x_final == r.trace.x_final);
  CHECK(back.meta.at("algorithm") == "test");

  const Verdict v = verify_trace(back);
  CHECK(v.pass);
  CHECK(v.checks > 0);

  SUBCASE("perturbed direction is caught at that step") {
    WalkTrace bad = back;
    const std::size_t s = bad.steps.size() / 2;
    bad.steps[s].delta[0].second += 1e-3;
    const Verdict vb = verify_trace(bad);
    CHECK_FALSE(vb.pass);
    const VerifyFailure* f = vb.first("orthogonality");
    REQUIRE(f != nullptr);
    CHECK(f->step == static_cast<long>(s));
  }
  SUBCASE("touching a frozen coordinate breaks freezing permanence") {
    WalkTrace bad = back;
    // Find a frozen coordinate and add it to a later step's support.
    for (std::size_t s = 0; s + 1 < bad.steps.size(); ++s) {
      if (bad.steps[s].frozen.empty()) continue;
      bad.steps[s + 1].delta.emplace_back(bad.steps[s].frozen[0], 0.0);
      const Verdict vb = verify_trace(bad);
      CHECK_FALSE(vb.pass);
      CHECK(vb.first("support") != nullptr);
      break;
    }
  }
  SUBCASE("step above L fails the cap") {
    WalkTrace bad = back;
    bad.L = 0.01;
    CHECK(verify_trace(bad).first("step-cap") != nullptr);
  }
  SUBCASE("ledger and cap columns are checked") {
    WalkTrace bad = back;
    bad.steps[0].diagnostics.emplace_back("k", 0.0);
    bad.steps[0].diagnostics = {{"k", 20}, {"k_cap", 12}, {"p_before", 1}, {"p_after", 2}, {"p_budget", 0.5}};
    const Verdict vb = verify_trace(bad);
    CHECK(vb.first("cap:k") != nullptr);
    CHECK(vb.first("ledger:p") != nullptr);
  }
}

TEST_CASE("malformed traces are rejected") {
  std::stringstream ss("not a trace\n");
  CHECK_THROWS_AS(read_trace(ss), Error);
  std::stringstream partial("# n=3\n# L=0.5\nt,step_len\n");
  CHECK_THROWS_AS(read_trace(partial), Error);
}

TEST_CASE("invalid walk options") {
  FullSpaceOracle o;
  WalkOptions w;
  w.L = 0.0;
  CHECK_THROWS_AS(run_walk(4, o, w), Error);
  w.L = 0.5;
  w.max_steps = 1;
  CHECK_THROWS_AS(run_walk(40, o, w), Error);
}

TEST_CASE("round_signs maps zero to +1") {
  Vec x(3);
  x << -0.2, 0.0, 0.7;
  const Vec s = round_signs(x);
  CHECK(s(0) == -1);
  CHECK(s(1) == 1);
  CHECK(s(2) == 1);
}
