#include "discforge/walk.hpp"

#include <cmath>

#include "discforge/error.hpp"

namespace discforge {

PartialColoring PartialColoring::zeros(int n) {
  PartialColoring pc;
  pc.x = Vec::Zero(n);
  pc.F.resize(n);
  for (int j = 0; j < n; ++j) pc.F[j] = j;
  return pc;
}

void PartialColoring::refresh_active() {
  F.clear();
  for (int j = 0; j < n(); ++j) {
    if (x(j) != 1.0 && x(j) != -1.0) F.push_back(j);
  }
}

double boundary_step(const PartialColoring& x, const Vec& delta, double L) {
  require(delta.size() == x.x.size(), "boundary_step: dimension mismatch");
  if (delta.squaredNorm() == 0.0) fail(ErrorCode::kInvalidArgument, "boundary_step: delta is zero");
  double eps = L;
  for (int j : x.F) {
    const double d = delta(j);
    if (d == 0.0) continue;
    const double dist = d > 0.0 ? (1.0 - x.x(j)) / d : (-1.0 - x.x(j)) / d;
    if (dist > 0.0) eps = std::min(eps, dist);
  }
  return eps;
}

std::optional<Vec> pick_direction(const Mat& basis, const Vec& x) {
  if (basis.cols() == 0) return std::nullopt;
  const Vec c = basis.transpose() * x;
  const double cn = c.norm();
  Vec coeffs = Vec::Zero(basis.cols());
  if (cn <= 1e-15) {
    coeffs(0) = 1.0;
  } else {
    if (basis.cols() == 1) return std::nullopt;
    const Vec u = c / cn;
    Eigen::Index j = 0;
    u.cwiseAbs().minCoeff(&j);
    coeffs = -u(j) * u;
    coeffs(j) += 1.0;
  }
  Vec delta = basis * coeffs;
  // Clean up the residual component along x on the support of delta.
  Vec x_support = Vec::Zero(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (basis.row(i).squaredNorm() > 0.0) x_support(i) = x(i);
  }
  const double xs = x_support.squaredNorm();
  if (xs > 0.0) delta -= (delta.dot(x_support) / xs) * x_support;
  const double norm = delta.norm();
  if (!(norm > 1e-8)) return std::nullopt;
  return Vec(delta / norm);
}

Vec round_signs(const Vec& x) {
  return x.unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
}

OracleResult FullSpaceOracle::query(const PartialColoring& x) {
  if (x.k() < threshold_) return OracleResult::Undefined();
  OracleResult res;
  res.undefined = false;
  res.subspace = full_space(x.F);
  res.sign_form = Vec::Zero(x.n());
  return res;
}

WalkResult run_walk(int n, Oracle& oracle, const WalkOptions& opts) {
  require(opts.L > 0.0 && opts.L <= 1.0, "run_walk: L must lie in (0,1]");
  WalkResult result;
  result.trace.n = n;
  result.trace.L = opts.L;
  PartialColoring pc = PartialColoring::zeros(n);

  while (pc.k() >= oracle.undefined_threshold()) {
    if (pc.t >= opts.max_steps) {
      fail(ErrorCode::kNonTermination, "run_walk: step limit " + std::to_string(opts.max_steps) +
                                           " reached with " + std::to_string(pc.k()) +
                                           " active coordinates");
    }
    OracleResult res = oracle.query(pc);
    if (res.undefined) break;
    if (res.subspace.dim() == 0) {
      fail(ErrorCode::kOracleBudget, "run_walk: oracle returned the zero subspace");
    }
    const Mat basis = res.subspace.embed(n);
    std::optional<Vec> dir = pick_direction(basis, pc.x);
    if (!dir) {
      fail(ErrorCode::kOracleBudget,
           "run_walk: oracle subspace meets x(t)-perp only at 0 (step " + std::to_string(pc.t) + ")");
    }
    const Vec delta = res.sign_form.size() == n ? sign_select(res.sign_form, *dir) : *dir;
    const double to_face = boundary_step(pc, delta, opts.L);
    const double step = oracle.accept_step(pc, delta, to_face);
    if (!(step > 0.0) || step > to_face) {
      fail(ErrorCode::kNumerical, "run_walk: oracle accepted an invalid step length");
    }

    StepRecord rec;
    rec.t = pc.t;
    rec.step = step;
    rec.dot_x_delta = delta.dot(pc.x);
    rec.diagnostics = std::move(res.diagnostics);

    PartialColoring before = pc;
    pc.x += step * delta;
    IndexSet still_active;
    still_active.reserve(pc.F.size());
    for (int j : pc.F) {
      double& v = pc.x(j);
      if (std::abs(1.0 - std::abs(v)) <= kSnapTol || std::abs(v) > 1.0) v = v > 0.0 ? 1.0 : -1.0;
      if (v == 1.0 || v == -1.0) rec.frozen.push_back(j);
      else still_active.push_back(j);
    }
    pc.F = std::move(still_active);
    ++pc.t;

    result.sum_sq_steps += step * step;
    if (rec.frozen.empty()) result.min_step = std::min(result.min_step, step);
    oracle.on_step(before, delta, step, pc, rec.diagnostics);

    if (opts.record_trace) {
      if (opts.record_delta) {
        for (int j : before.F) {
          if (delta(j) != 0.0) rec.delta.emplace_back(j, delta(j));
        }
      }
      result.trace.steps.push_back(std::move(rec));
    }
  }

  result.steps = pc.t;
  result.x_final = pc.x;
  result.coloring = round_signs(pc.x);
  result.trace.x_final = result.x_final;
  result.trace.coloring = result.coloring;
  return result;
}

}  // namespace discforge
