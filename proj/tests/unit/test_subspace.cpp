#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "discforge/subspace.hpp"

using namespace discforge;

namespace {

Mat gaussian(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

IndexSet iota(int k) {
  IndexSet f(k);
  for (int i = 0; i < k; ++i) f[i] = i;
  return f;
}

}  // namespace

TEST_CASE("orthogonal complement") {
  std::mt19937_64 rng(1);
  const IndexSet F = iota(12);
  const Mat c = gaussian(rng, 12, 4);
  const SubspaceBasis s = orth_complement_within(F, c);
  CHECK(s.dim() == 8);
  CHECK(s.codim() == 4);
  CHECK(s.orthonormality_error() < 1e-12);
  CHECK((c.transpose() * s.basis).cwiseAbs().maxCoeff() < 1e-12);

  SUBCASE("dependent constraints count once") {
    Mat dup(12, 6);
    dup << c, c.col(0) + c.col(1), 2 * c.col(3);
    CHECK(orth_complement_within(F, dup).dim() == 8);
  }
  SUBCASE("no constraints is the whole space") { CHECK(orth_complement_within(F, Mat(12, 0)).dim() == 12); }
  SUBCASE("zero columns are ignored") { CHECK(orth_complement_within(F, Mat::Zero(12, 3)).dim() == 12); }
}

TEST_CASE("complement_in and intersect agree with explicit constructions") {
  std::mt19937_64 rng(2);
  const IndexSet F = iota(10);
  const Mat c1 = gaussian(rng, 10, 3);
  const Mat c2 = gaussian(rng, 10, 2);
  const SubspaceBasis a = orth_complement_within(F, c1);
  const SubspaceBasis b = orth_complement_within(F, c2);
  Mat both(10, 5);
  both << c1, c2;
  const SubspaceBasis direct = orth_complement_within(F, both);
  const SubspaceBasis via_in = complement_in(a, c2);
  const SubspaceBasis via_int = intersect(a, b);
  CHECK(via_in.dim() == 5);
  CHECK(via_int.dim() == 5);
  // Same subspace: projectors coincide.
  const Mat p = direct.basis * direct.basis.transpose();
  CHECK((via_in.basis * via_in.basis.transpose() - p).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((via_int.basis * via_int.basis.transpose() - p).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("bottom eigenspace minimizes the quadratic form") {
  std::mt19937_64 rng(3);
  const IndexSet F = iota(9);
  const Mat rows = gaussian(rng, 15, 9);
  Vec w = gaussian(rng, 15, 1).cwiseAbs();
  const SubspaceBasis within = orth_complement_within(F, gaussian(rng, 9, 3));
  Vec vals;
  const SubspaceBasis s = bottom_eigs(w, rows, within, 2, &vals);
  CHECK(s.dim() == 2);
  CHECK(s.orthonormality_error() < 1e-12);
  // Inside `within`.
  CHECK((s.basis - within.basis * (within.basis.transpose() * s.basis)).cwiseAbs().maxCoeff() < 1e-12);
  // Independent oracle: restricted matrix eigenvalues.
  const Mat r = rows.transpose() * w.asDiagonal() * rows;
  Eigen::SelfAdjointEigenSolver<Mat> eig(within.basis.transpose() * r * within.basis);
  CHECK(vals(0) == doctest::Approx(eig.eigenvalues()(0)));
  CHECK(vals(1) == doctest::Approx(eig.eigenvalues()(1)));
  const double worst = (s.basis.transpose() * r * s.basis).eigenvalues().real().maxCoeff();
  for (int t = 0; t < 50; ++t) {
    Vec v = within.basis * gaussian(rng, within.dim(), 1);
    v.normalize();
    CHECK(v.dot(r * v) >= eig.eigenvalues()(0) - 1e-10);
  }
  CHECK(worst <= vals(1) + 1e-10);
}

TEST_CASE("top eigenvectors") {
  std::mt19937_64 rng(4);
  const Mat rows = gaussian(rng, 8, 6);
  const Vec w = Vec::Ones(8);
  const Mat top = top_eigvecs(w, rows, 2);
  const Mat r = rows.transpose() * rows;
  Eigen::SelfAdjointEigenSolver<Mat> eig(r);
  CHECK((top.transpose() * r * top).trace() == doctest::Approx(eig.eigenvalues().tail(2).sum()));
  CHECK(top_eigvecs(w, rows, 0).cols() == 0);
}

TEST_CASE("quadratic subspace: inequality holds on the complement and codimension <= alpha k") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 10 + trial;
    const IndexSet F = iota(k);
    const Mat b = gaussian(rng, 30, k);
    const Vec w = gaussian(rng, 30, 1).cwiseAbs();
    const double alpha = trial % 2 ? 0.125 : 0.25;
    const SubspaceBasis s = quadratic_subspace(w, b, alpha, F);
    CHECK(s.codim() <= alpha * k + 1e-9);
    for (int t = 0; t < 20; ++t) {
      const Vec d = s.basis * gaussian(rng, s.dim(), 1);
      const double lhs = (w.cwiseSqrt().asDiagonal() * (b * d)).squaredNorm();
      const double rhs = w.dot(b.cwiseAbs2() * d.cwiseAbs2()) / alpha;
      CHECK(lhs <= rhs * (1 + 1e-10));
    }
  }
}

TEST_CASE("sign_select makes the first-order term nonpositive") {
  Vec g(3), d(3);
  g << 1, 2, 3;
  d << 1, 0, 0;
  CHECK(g.dot(sign_select(g, d)) <= 0.0);
  d << -1, 0, 0;
  CHECK(g.dot(sign_select(g, d)) <= 0.0);
}

TEST_CASE("embed and restrict") {
  Mat a(2, 4);
  a << 1, 2, 3, 4, 5, 6, 7, 8;
  const IndexSet F{1, 3};
  CHECK(restrict_columns(a, F)(1, 1) == 8);
  CHECK(restrict_vector(Vec::LinSpaced(4, 0, 3), F)(1) == 3);
  const SubspaceBasis s = full_space(F);
  const Mat e = s.embed(4);
  CHECK(e(1, 0) == 1.0);
  CHECK(e(3, 1) == 1.0);
  CHECK(e.row(0).norm() == 0.0);
}
