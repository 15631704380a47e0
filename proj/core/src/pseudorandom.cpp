#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "discforge/error.hpp"
#include "discforge/pseudorandom.hpp"
#include "discforge/rng.hpp"

namespace discforge {

namespace {

constexpr int kLambdaBlock = 16;
constexpr int kLambdaMaxIter = 50000;

void center_columns(Mat& v) { v.rowwise() -= v.colwise().mean(); }

Mat orthonormalize(const Mat& v) {
  Eigen::HouseholderQR<Mat> qr(v);
  return qr.householderQ() * Mat::Identity(v.rows(), v.cols());
}

}  // namespace

double lambda_param(const Mat& a, double tol, std::uint64_t seed) {
  require(a.rows() == a.cols(), "lambda_param: A must be square");
  require(tol > 0.0, "lambda_param: tol must be > 0");
  const auto n = a.cols();
  if (n < 2) return 0.0;
  const Mat b = a.cwiseAbs2();
  const double floor = 1e-13 * b.norm();

  auto rng = make_rng(seed, Stream::kAlgorithm);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto block = std::min<Eigen::Index>(kLambdaBlock, n - 1);
  Mat v(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) v(i, j) = normal(rng);
  center_columns(v);
  v = orthonormalize(v);

  double theta = 0.0;
  double prev = -1.0;
  Vec top;
  for (int iter = 0; iter < kLambdaMaxIter; ++iter) {
    Mat z = b.transpose() * (b * v);
    center_columns(z);
    const Mat h = v.transpose() * z;
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (h + h.transpose()));
    theta = std::max(0.0, eig.eigenvalues()(block - 1));
    if (theta <= floor * floor) return 0.0;
    top = v * eig.eigenvectors().col(block - 1);
    if (std::abs(theta - prev) <= tol * theta) break;
    prev = theta;
    v = orthonormalize(z);
  }
  // ||B u|| / ||u|| on the centered top Ritz vector rather than sqrt(theta).
  top.array() -= top.mean();
  const double lambda = (b * top).norm() / top.norm();
  return lambda <= floor ? 0.0 : lambda;
}

int row_group_index(double mass) {
  if (mass <= 1.0) return 0;
  int r = 1;
  while (std::ldexp(1.0, r) < mass) ++r;
  return r;
}

std::vector<IndexSet> row_groups(const Mat& a) {
  const int n = static_cast<int>(a.cols());
  const Vec mass = a.rowwise().squaredNorm();
  int count = n > 1 ? static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))) + 1 : 1;
  std::vector<int> idx(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    idx[i] = row_group_index(mass(i));
    count = std::max(count, idx[i] + 1);
  }
  std::vector<IndexSet> groups(count);
  for (Eigen::Index i = 0; i < a.rows(); ++i) groups[idx[i]].push_back(static_cast<int>(i));
  return groups;
}

int PseudoState::count_in_p() const {
  return static_cast<int>(std::count(in_p.begin(), in_p.end(), 1));
}

PseudoState make_pseudo_state(const Instance& a, std::optional<double> lambda, double tol) {
  require(a.rows() == a.cols(), "pseudorandom: A must be square");
  PseudoState st;
  st.n = a.cols();
  st.lambda = lambda ? *lambda : lambda_param(a.entries, tol, a.seed);
  const double logn = std::log(std::max(2, st.n));
  st.lambda_eff = std::max(st.lambda, 1.0 / logn);
  st.eta = std::sqrt(logn / st.lambda_eff);

  st.total_mass = a.entries.rowwise().squaredNorm();
  st.groups = row_groups(a.entries);
  st.group.assign(st.n, 0);
  for (std::size_t r = 0; r < st.groups.size(); ++r)
    for (int i : st.groups[r]) st.group[i] = static_cast<int>(r);

  const double cutoff = 1.0 / (16.0 * st.K * st.K * st.eta * st.eta);
  st.b = a.entries.unaryExpr([cutoff](double v) { return v * v <= cutoff ? v : 0.0; });
  st.b_sq = st.b.cwiseAbs2();

  st.in_p.assign(st.n, 1);
  st.exit_step.assign(st.n, -1);
  st.anchor_value = Vec::Zero(st.n);
  st.snapshot_of.assign(st.n, -1);
  st.exit_thresholded.assign(st.n, 0);
  st.restricted_mass = st.total_mass;
  return st;
}

void pseudo_state_update(PseudoState& st, const Mat& a, const PartialColoring& x) {
  const int k = x.k();
  Vec restricted = Vec::Zero(st.n);
  for (int j : x.F) restricted += a.col(j).cwiseAbs2();
  st.restricted_mass = restricted;

  int snapshot = -1;
  for (int i = 0; i < st.n; ++i) {
    if (!st.in_p[i] || restricted(i) > 8.0 * st.lambda) continue;
    if (snapshot < 0) {
      st.snapshots.push_back(x.x);
      snapshot = static_cast<int>(st.snapshots.size()) - 1;
    }
    st.in_p[i] = 0;
    st.exit_step[i] = x.t;
    st.anchor_value(i) = a.row(i).dot(x.x);
    st.snapshot_of[i] = snapshot;
    for (int j : x.F)
      if (a(i, j) != st.b(i, j)) ++st.exit_thresholded[i];
  }

  st.exceptional.clear();
  const double share = 2.0 * k / st.n;
  for (int i = 0; i < st.n; ++i) {
    if (st.in_p[i] && restricted(i) > share * st.total_mass(i)) st.exceptional.push_back(i);
  }
  if (16 * static_cast<long>(st.exceptional.size()) > k) {
    fail(ErrorCode::kInvariantViolation,
         "pseudorandom: |I(t)| = " + std::to_string(st.exceptional.size()) + " exceeds |F|/16 at t=" +
             std::to_string(x.t) + " (lambda underestimated?)");
  }
  st.updated_at = x.t;
}

RegParams phi_params(int n, int r) {
  return {RegKind::kLq, 0.5, std::sqrt(n * std::ldexp(1.0, 1 - r))};
}

Vec phi_proxy(const PseudoState& st, const Mat& a, int r, const Vec& x) {
  const IndexSet& rows = st.groups[r];
  const auto g = static_cast<Eigen::Index>(rows.size());
  Vec out(2 * g);
  for (Eigen::Index p = 0; p < g; ++p) {
    const int i = rows[p];
    const double v = st.in_p[i] ? a.row(i).dot(x) : st.anchor_value(i);
    out(p) = v;
    out(p + g) = -v;
  }
  return out;
}

Vec psi_proxy(const PseudoState& st, const Vec& x) {
  const int n = st.n;
  Vec out = Vec::Zero(2 * n);
  const double k_eta = st.K * st.eta;
  // Rows sharing an exit snapshot share x - x(t_i).
  for (std::size_t s = 0; s < st.snapshots.size(); ++s) {
    const Vec diff = x - st.snapshots[s];
    const Vec diff_sq = diff.cwiseAbs2();
    for (int i = 0; i < n; ++i) {
      if (st.snapshot_of[i] != static_cast<int>(s)) continue;
      const double lin = st.b.row(i).dot(diff);
      const double quad = k_eta * st.b_sq.row(i).dot(diff_sq);
      out(i) = lin - quad;
      out(i + n) = -lin - quad;
    }
  }
  return out;
}

double psi_value(const PseudoState& st, const Vec& x) {
  return smax_value_grad(psi_proxy(st, x), st.eta).value;
}

}  // namespace discforge
