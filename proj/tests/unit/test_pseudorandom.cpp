#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "discforge/error.hpp"
#include "discforge/pseudorandom.hpp"
#include "discforge/verify.hpp"

using namespace discforge;

namespace {

// Dense route: largest singular value of (A∘A) P with P = I - 11^T/n.
double lambda_dense(const Mat& a) {
  const auto n = a.cols();
  const Mat p = Mat::Identity(n, n) - Mat::Constant(n, n, 1.0 / n);
  Eigen::JacobiSVD<Mat> svd(a.cwiseAbs2() * p);
  return svd.singularValues()(0);
}

Instance scaled_hadamard(int n) {
  Instance h = gen_hadamard(n);
  h.entries /= std::sqrt(double(n));
  h.col_norm_bound = 1.0;
  return h;
}

}  // namespace

TEST_CASE("lambda agrees with a dense SVD") {
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 20 + 17 * trial;
    const Instance a = trial % 2 ? gen_gaussian(n, trial) : gen_regular_system(n, 4, trial);
    const double dense = lambda_dense(a.entries);
    CHECK(lambda_param(a.entries, 1e-13, 1) == doctest::Approx(dense).epsilon(1e-6));
  }
}

TEST_CASE("lambda of identity and all-ones") {
  CHECK(lambda_param(Mat::Identity(50, 50)) == 1.0);
  CHECK(lambda_param(Mat::Ones(50, 50)) == 0.0);
  CHECK(lambda_param(scaled_hadamard(64).entries) == 0.0);
  CHECK(lambda_param(Mat::Ones(1, 1)) == 0.0);
  CHECK_THROWS_AS(lambda_param(Mat::Ones(2, 3)), Error);
}

TEST_CASE("row groups") {
  CHECK(row_group_index(0.0) == 0);
  CHECK(row_group_index(1.0) == 0);
  CHECK(row_group_index(1.5) == 1);
  CHECK(row_group_index(2.0) == 1);
  CHECK(row_group_index(2.0001) == 2);
  CHECK(row_group_index(1024.0) == 10);
  Mat a = Mat::Zero(4, 4);
  a(3, 0) = 3.0;  // mass 9 -> group 4
  const auto g = row_groups(a);
  CHECK(g.size() == 5);
  CHECK(g[0].size() == 3);
  CHECK(g[4] == IndexSet{3});
}

TEST_CASE("pseudorandom state: exits, anchors and the exceptional-row check") {
  const Instance a = gen_gaussian(32, 3);
  PseudoState st = make_pseudo_state(a);
  CHECK(st.eta == doctest::Approx(std::sqrt(std::log(32.0) / st.lambda_eff)));
  CHECK(st.lambda_eff >= 1.0 / std::log(32.0));
  const double cutoff = 1.0 / (16 * 81 * st.eta * st.eta);
  CHECK(((st.b.array() == 0) || (st.b.array().square() <= cutoff)).all());
  CHECK(psi_proxy(st, Vec::Ones(32)).cwiseAbs().maxCoeff() == 0.0);

  PartialColoring pc = PartialColoring::zeros(32);
  pc.x.setConstant(0.25);
  pseudo_state_update(st, a.entries, pc);
  // Rows with restricted mass <= 8 lambda leave P with their anchor.
  for (int i = 0; i < 32; ++i) {
    if (st.in_p[i]) continue;
    CHECK(st.anchor_value(i) == doctest::Approx(a.entries.row(i).dot(pc.x)));
    CHECK(st.exit_step[i] == 0);
  }
  // psi is zero at the snapshot itself.
  CHECK(psi_proxy(st, pc.x).cwiseAbs().maxCoeff() == 0.0);

  // Forcing lambda = 0 on the identity makes every active row exceptional.
  const Instance id = make_instance(Mat::Identity(32, 32));
  PseudoState bad = make_pseudo_state(id, 0.0);
  PartialColoring half = PartialColoring::zeros(32);
  half.F.resize(8);
  try {
    pseudo_state_update(bad, id.entries, half);
    FAIL("expected an invariant violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvariantViolation);
  }
}

TEST_CASE("komlos on a lambda = 0 matrix exercises the Phi potentials") {
  const Instance a = scaled_hadamard(128);
  KomlosOptions o;
  o.record_trace = true;
  const KomlosRun r = komlos_color(a, o);
  CHECK(r.lambda == 0.0);
  CHECK(r.rows_left_p == 0);
  CHECK(r.discrepancy <= r.certified);
  CHECK(r.max_phi_increase <= 100.0);
  CHECK(r.max_psi_increase <= 1e-8);
  CHECK(r.max_codim_excess <= 0);
  const Verdict v = verify_trace(r.walk.trace);
  CHECK(v.pass);
}

TEST_CASE("komlos on a gaussian matrix") {
  const Instance a = gen_gaussian(96, 2);
  KomlosOptions o;
  o.record_trace = true;
  const KomlosRun r = komlos_color(a, o);
  CHECK(r.discrepancy <= r.certified);
  CHECK(r.psi_start == doctest::Approx(r.psi_start_bound));
  CHECK(r.max_psi_increase <= 1e-8);
  CHECK(r.max_anchor_excess <= 0.0);
  CHECK(r.max_quad_correction_ratio <= 1.0);
  CHECK(r.max_threshold_count <= r.threshold_count_cap);
  CHECK(verify_trace(r.walk.trace).pass);
}

TEST_CASE("komlos preconditions") {
  CHECK_THROWS_AS(komlos_color(make_instance(Mat::Ones(3, 4) / 2)), Error);
  CHECK_THROWS_AS(komlos_color(make_instance(2 * Mat::Identity(8, 8))), Error);
}

TEST_CASE("beck-fiala scales by sqrt(s)") {
  const Instance a = gen_regular_system(128, 4, 5);
  const BeckFialaRun r = beck_fiala_color(a);
  CHECK(r.s == 4);
  CHECK(r.lambda_scaled == doctest::Approx(r.lambda / 4));
  CHECK(r.discrepancy == doctest::Approx((a.entries * r.komlos.coloring).cwiseAbs().maxCoeff()));
  CHECK(r.discrepancy <= 2 * r.komlos.certified + 1e-9);
  CHECK(r.reference == doctest::Approx(2 + std::min(std::sqrt(r.lambda * std::log(128.0)), r.lambda)));
  CHECK_THROWS_AS(beck_fiala_color(gen_gaussian(16, 1)), Error);
}
