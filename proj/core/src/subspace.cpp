#include "discforge/subspace.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "discforge/error.hpp"

namespace discforge {

namespace {

// Orthonormal basis for the orthogonal complement of span(c) in R^dim.
Mat null_of_columns(const Mat& c, Eigen::Index dim) {
  if (c.cols() == 0) return Mat::Identity(dim, dim);
  Eigen::ColPivHouseholderQR<Mat> qr(c);
  const Vec diag = qr.matrixQR().diagonal().cwiseAbs();
  const double largest = diag.size() ? diag.maxCoeff() : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag(i) > kRankTol * largest && largest > 0.0) ++rank;
  }
  const Mat q = qr.householderQ() * Mat::Identity(dim, dim);
  return q.rightCols(dim - rank);
}

}  // namespace

Mat SubspaceBasis::embed(int n) const {
  Mat out = Mat::Zero(n, basis.cols());
  for (std::size_t r = 0; r < ambient.size(); ++r) out.row(ambient[r]) = basis.row(r);
  return out;
}

double SubspaceBasis::orthonormality_error() const {
  if (basis.cols() == 0) return 0.0;
  return (basis.transpose() * basis - Mat::Identity(basis.cols(), basis.cols()))
      .cwiseAbs()
      .maxCoeff();
}

SubspaceBasis full_space(const IndexSet& F) {
  const auto k = static_cast<Eigen::Index>(F.size());
  return {F, Mat::Identity(k, k)};
}

Mat restrict_columns(const Mat& a, const IndexSet& F) {
  Mat out(a.rows(), F.size());
  for (std::size_t c = 0; c < F.size(); ++c) out.col(c) = a.col(F[c]);
  return out;
}

Vec restrict_vector(const Vec& v, const IndexSet& F) {
  Vec out(F.size());
  for (std::size_t c = 0; c < F.size(); ++c) out(c) = v(F[c]);
  return out;
}

SubspaceBasis orth_complement_within(const IndexSet& F, const Mat& constraints) {
  if (F.empty()) fail(ErrorCode::kInvalidArgument, "orth_complement_within: empty index set");
  const auto k = static_cast<Eigen::Index>(F.size());
  require(constraints.cols() == 0 || constraints.rows() == k,
          "orth_complement_within: constraint length does not match F");
  return {F, null_of_columns(constraints, k)};
}

SubspaceBasis complement_in(const SubspaceBasis& within, const Mat& constraints) {
  if (constraints.cols() == 0 || within.dim() == 0) return within;
  // Coordinates of the constraints inside `within`.
  const Mat local = within.basis.transpose() * constraints;
  return {within.ambient, within.basis * null_of_columns(local, within.dim())};
}

SubspaceBasis intersect(const SubspaceBasis& a, const SubspaceBasis& b) {
  require(a.ambient == b.ambient, "intersect: subspaces live in different coordinate sets");
  if (a.dim() == 0 || b.dim() == 0) return {a.ambient, Mat(a.ambient_dim(), 0)};
  // v = a.basis * c lies in b iff its component off b vanishes.
  const Mat off = a.basis - b.basis * (b.basis.transpose() * a.basis);
  Eigen::JacobiSVD<Mat> svd(off, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();  // descending
  int rank = 0;
  while (rank < sv.size() && sv(rank) > kRankTol) ++rank;
  const int keep = a.dim() - rank;
  Mat basis = a.basis * svd.matrixV().rightCols(keep);
  if (keep > 0) {
    Eigen::HouseholderQR<Mat> qr(basis);
    basis = qr.householderQ() * Mat::Identity(basis.rows(), keep);
  }
  return {a.ambient, basis};
}

SubspaceBasis bottom_eigs(const Vec& w, const Mat& rows, const SubspaceBasis& within, int d,
                          Vec* eigenvalues) {
  require(d >= 0 && d <= within.dim(), "bottom_eigs: d exceeds the dimension of the subspace");
  require(w.size() == rows.rows(), "bottom_eigs: weight/row count mismatch");
  if (d == 0) return {within.ambient, Mat(within.ambient_dim(), 0)};
  const Mat local = rows * within.basis;  // u_i in `within` coordinates
  const Mat r = local.transpose() * w.asDiagonal() * local;
  Eigen::SelfAdjointEigenSolver<Mat> eig(r);
  if (eig.info() != Eigen::Success) fail(ErrorCode::kNumerical, "bottom_eigs: eigensolver failed");
  if (eigenvalues) *eigenvalues = eig.eigenvalues().head(d);
  return {within.ambient, within.basis * eig.eigenvectors().leftCols(d)};
}

Mat top_eigvecs(const Vec& w, const Mat& rows, int count) {
  const auto k = rows.cols();
  count = std::clamp<int>(count, 0, static_cast<int>(k));
  if (count == 0) return Mat(k, 0);
  const Mat r = rows.transpose() * w.asDiagonal() * rows;
  Eigen::SelfAdjointEigenSolver<Mat> eig(r);
  if (eig.info() != Eigen::Success) fail(ErrorCode::kNumerical, "top_eigvecs: eigensolver failed");
  return eig.eigenvectors().rightCols(count);
}

Mat quadratic_subspace_constraints(const Vec& w, const Mat& b, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "quadratic_subspace: alpha must lie in (0,1)");
  require(w.size() == b.rows(), "quadratic_subspace: weight/row count mismatch");
  require((w.array() >= 0.0).all(), "quadratic_subspace: weights must be nonnegative");
  const auto k = b.cols();
  const Mat weighted = w.cwiseSqrt().asDiagonal() * b;
  const Vec scale = weighted.colwise().norm().transpose();
  Mat normalized = weighted;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (scale(j) > 0.0) normalized.col(j) /= scale(j);
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(normalized.transpose() * normalized);
  if (eig.info() != Eigen::Success) {
    fail(ErrorCode::kNumerical, "quadratic_subspace: eigensolver failed");
  }
  const Vec& vals = eig.eigenvalues();
  int drop = 0;
  while (drop < vals.size() && vals(vals.size() - 1 - drop) > 1.0 / alpha) ++drop;
  // <D d, v> = <d, D v>.
  return scale.asDiagonal() * eig.eigenvectors().rightCols(drop);
}

SubspaceBasis quadratic_subspace(const Vec& w, const Mat& b, double alpha, const IndexSet& F) {
  require(static_cast<Eigen::Index>(F.size()) == b.cols(),
          "quadratic_subspace: matrix columns must match F");
  return orth_complement_within(F, quadratic_subspace_constraints(w, b, alpha));
}

Vec sign_select(const Vec& g, const Vec& delta) {
  return g.dot(delta) <= 0.0 ? delta : Vec(-delta);
}

}  // namespace discforge
