#include "discforge/ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "discforge/error.hpp"
#include "discforge/instance.hpp"
#include "discforge/rng.hpp"
#include "discforge/subspace.hpp"
#include "discforge/trace.hpp"

namespace discforge {

EllipsoidPair gen_ellipsoid_geometric(int n, std::uint64_t seed) {
  require(n >= 1, "ellipsoid: n must be >= 1");
  auto rng = make_rng(seed, Stream::kInstance);
  std::normal_distribution<double> normal(0.0, 1.0);
  EllipsoidPair p{Mat(n, n), Mat()};
  for (int j = 0; j < n; ++j) {
    do {
      for (int i = 0; i < n; ++i) p.q(i, j) = normal(rng);
    } while (p.q.col(j).norm() == 0.0);
    p.q.col(j).normalize();
  }
  Vec d(n);
  for (int i = 0; i < n; ++i) d(i) = std::ldexp(1.0, -i);
  const Mat u = gen_haar(n, seed ^ 0x9e3779b97f4a7c15ULL).entries;
  p.b = u * d.asDiagonal() * u.transpose();
  p.b = 0.5 * (p.b + p.b.transpose());
  return p;
}

EllipsoidInstance make_ellipsoid_instance(const Mat& q, const Mat& b) {
  require(b.rows() == b.cols(), "ellipsoid: B must be square");
  require(q.rows() == b.rows(), "ellipsoid: Q must have as many rows as B");
  if (!q.allFinite() || !b.allFinite()) fail(ErrorCode::kInvalidInstance, "ellipsoid: non-finite input");
  if (q.cols() && max_column_norm(q) > 1.0 + 1e-9)
    fail(ErrorCode::kInvalidInstance, "ellipsoid: columns of Q must have norm <= 1");
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    fail(ErrorCode::kInvalidInstance, "ellipsoid: B is not symmetric");

  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (b + b.transpose()));
  if (eig.info() != Eigen::Success) fail(ErrorCode::kNumerical, "ellipsoid: eigensolver failed");
  const auto n = b.rows();
  if (n && eig.eigenvalues()(0) < -1e-9 * scale)
    fail(ErrorCode::kInvalidInstance, "ellipsoid: B is not positive semidefinite");

  EllipsoidInstance inst;
  inst.q = q;
  inst.b = b;
  inst.d = eig.eigenvalues().reverse();
  const Mat v = eig.eigenvectors().rowwise().reverse();
  const double top = n ? std::max(0.0, inst.d(0)) : 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (inst.d(i) < 1e-12 * top || inst.d(i) < 0.0) inst.d(i) = 0.0;
  inst.q_rot = v.transpose() * q;
  return inst;
}

double b_norm(const Mat& b, const Vec& z) { return std::sqrt(std::max(0.0, z.dot(b * z))); }

double EllipsoidOracle::value_sq(const Vec& x) const {
  return inst_.d.dot((inst_.q_rot * x).cwiseAbs2());
}

OracleResult EllipsoidOracle::query(const PartialColoring& x) {
  const int k = x.k();
  if (k < undefined_threshold()) return OracleResult::Undefined();
  const int m = static_cast<int>(inst_.q_rot.rows());
  const int removed = std::min(m, k / 2 - 1);
  const Mat q_f = restrict_columns(inst_.q_rot, x.F);
  const SubspaceBasis s1 = orth_complement_within(x.F, q_f.topRows(removed).transpose());
  const Mat rest = q_f.bottomRows(m - removed);

  OracleResult res;
  res.undefined = false;
  res.subspace = bottom_eigs(Vec::Ones(rest.rows()), rest, s1, 2);
  res.sign_form = inst_.q_rot.transpose() * (inst_.d.asDiagonal() * (inst_.q_rot * x.x));
  d_half_ = (k / 2 >= 1 && k / 2 <= m) ? inst_.d(k / 2 - 1) : 0.0;

  const Mat proj = rest * res.subspace.basis;
  Eigen::SelfAdjointEigenSolver<Mat> eig(proj.transpose() * proj);
  const double quad = eig.eigenvalues().maxCoeff();
  res.diagnostics = {{"k", k},
                     {"codim", static_cast<double>(s1.codim())},
                     {"codim_cap", static_cast<double>(removed)},
                     {"quad", quad},
                     {"quad_cap", static_cast<double>(k) / std::max(1, s1.dim() - 1)}};
  return res;
}

void EllipsoidOracle::on_step(const PartialColoring& before, const Vec& delta, double step,
                              const PartialColoring& after, Diagnostics& out) {
  const double f0 = value_sq(before.x);
  const double f1 = value_sq(after.x);
  const double budget = 8.0 * d_half_ * step * step;
  ledger_ += budget;
  if (d_half_ > 0) max_ratio_ = std::max(max_ratio_, (f1 - f0) / (d_half_ * step * step));
  (void)delta;
  out.emplace_back("f_before", f0);
  out.emplace_back("f_after", f1);
  out.emplace_back("f_budget", budget);
}

EllipsoidRun ellipsoid_color(const Mat& q, const Mat& b, const EllipsoidOptions& opts) {
  const EllipsoidInstance inst = make_ellipsoid_instance(q, b);
  EllipsoidOracle oracle(inst);
  WalkOptions wopts;
  wopts.L = opts.L;
  wopts.record_trace = opts.record_trace;
  wopts.record_delta = opts.record_trace;

  EllipsoidRun run;
  run.walk = run_walk(static_cast<int>(q.cols()), oracle, wopts);
  run.coloring = run.walk.coloring;
  run.value = b_norm(b, q * run.coloring);
  run.value_rotated = std::sqrt(std::max(0.0, oracle.value_sq(run.coloring)));
  run.trace_b = b.trace();
  run.constant = run.trace_b > 0 ? run.value * run.value / run.trace_b : 0.0;
  run.ledger = oracle.ledger_total();
  run.max_increase_ratio = oracle.max_increase_ratio();
  run.steps = run.walk.steps;

  // ||Q x||_B <= ||Q x(T)||_B + ||Q (x - x(T))||_B, and the walk leaves f(T) <= ledger.
  const double top = inst.d.size() ? inst.d(0) : 0.0;
  const double col = q.cols() ? max_column_norm(q) : 0.0;
  const double moved = (run.coloring - run.walk.x_final).lpNorm<1>();
  run.certified = std::sqrt(run.ledger) + std::sqrt(top) * col * moved;

  run.walk.trace.meta["algorithm"] = "ellipsoid";
  return run;
}

}  // namespace discforge
