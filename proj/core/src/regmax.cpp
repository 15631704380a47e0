#include "discforge/regmax.hpp"

#include <cmath>
#include <limits>

#include "discforge/error.hpp"

namespace discforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// f(u) = sum_i (u + s_i)^p - 1 where s_i = max(z) - z_i >= 0 and p < 0.
struct MultiplierEquation {
  const Vec& spread;
  double p;

  double value(double u) const { return (spread.array() + u).pow(p).sum() - 1.0; }
  double slope(double u) const { return p * (spread.array() + u).pow(p - 1.0).sum(); }
};

}  // namespace

void RegParams::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) fail(ErrorCode::kInvalidArgument, "eta must be > 0");
  if (kind == RegKind::kLq && !(q > 0.0 && q < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "q must lie in (0,1)");
  }
}

double lq_multiplier(const Vec& y, const RegParams& params) {
  params.validate();
  if (y.size() == 0) fail(ErrorCode::kInvalidArgument, "lq_multiplier: empty input");
  if (!y.allFinite()) fail(ErrorCode::kNumerical, "lq_multiplier: non-finite input");
  const Vec z = params.eta * y;
  const double zmax = z.maxCoeff();
  const Vec spread = (zmax - z.array()).matrix();
  const double m = static_cast<double>(y.size());
  const MultiplierEquation eq{spread, 1.0 / (params.q - 1.0)};

  // The max coordinate alone gives f(1) >= 0; the uniform bound gives f(m^{1-q}) <= 0.
  double lo = 1.0;
  double hi = std::pow(m, 1.0 - params.q);
  if (eq.value(hi) >= 0.0) return zmax + hi;
  double u = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = eq.value(u);
    if (f > 0.0) lo = u; else hi = u;
    if (std::abs(f) <= 1e-15 || hi - lo <= 1e-15 * hi) break;
    double next = u - f / eq.slope(u);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    u = next;
  }
  return zmax + u;
}

RegEval lq_value_grad(const Vec& y, const RegParams& params) {
  RegEval out;
  out.multiplier = lq_multiplier(y, params);
  out.gaps = (out.multiplier - params.eta * y.array()).matrix();
  out.grad = out.gaps.array().pow(1.0 / (params.q - 1.0)).matrix();
  out.grad /= out.grad.sum();
  out.value = out.grad.dot(y) + out.grad.array().pow(params.q).sum() / (params.eta * params.q);
  return out;
}

RegEval smax_value_grad(const Vec& y, double eta) {
  if (!(eta > 0.0)) fail(ErrorCode::kInvalidArgument, "smax: eta must be > 0");
  if (y.size() == 0) fail(ErrorCode::kInvalidArgument, "smax: empty input");
  if (!y.allFinite()) fail(ErrorCode::kNumerical, "smax: non-finite input");
  RegEval out;
  const double ymax = y.maxCoeff();
  const Vec e = (eta * (y.array() - ymax)).exp().matrix();
  const double total = e.sum();
  out.grad = e / total;
  out.value = ymax + std::log(total) / eta;
  return out;
}

RegEval reg_value_grad(const Vec& y, const RegParams& params) {
  if (params.kind == RegKind::kEntropy) return smax_value_grad(y, params.eta);
  return lq_value_grad(y, params);
}

double reg_value(const Vec& y, const RegParams& params) { return reg_value_grad(y, params).value; }

Vec hess_diag_bound(const RegEval& eval, const RegParams& params) {
  if (params.kind == RegKind::kEntropy) return params.eta * eval.grad;
  return (params.eta / (1.0 - params.q)) * eval.grad.array().pow(2.0 - params.q).matrix();
}

double taylor_step_cap(const RegParams& params) {
  if (params.kind == RegKind::kEntropy) return 1.0 / (3.0 * params.eta);
  return (1.0 - params.q) / (8.0 * params.eta);
}

Vec sharpened_hess_weights(const RegEval& eval, const RegParams& params) {
  const double m = static_cast<double>(eval.grad.size());
  return (params.eta / (2.0 * (1.0 - params.q)) * (1.0 + kSharpC2 / m)) *
         eval.grad.array().pow(2.0 - params.q).matrix();
}

double sharpened_step_cap(const RegParams& params, int m) {
  return kSharpC1 * (1.0 - params.q) / (m * params.eta);
}

double lq_gap_step_cap(const RegEval& eval, const RegParams& params, const Vec& dy, double rho) {
  const double sup = dy.lpNorm<Eigen::Infinity>();
  if (sup == 0.0) return kInf;
  const double room = 1.0 - std::pow(1.0 + rho, -(1.0 - params.q) / (2.0 - params.q));
  double cap = kInf;
  for (Eigen::Index i = 0; i < dy.size(); ++i) {
    if (dy(i) == 0.0) continue;
    cap = std::min(cap, eval.gaps(i) * room / (params.eta * (sup + std::abs(dy(i)))));
  }
  return cap;
}

double smax_step_cap(const RegParams& params, const Vec& dy) {
  const double sup = dy.lpNorm<Eigen::Infinity>();
  if (sup == 0.0) return kInf;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < dy.size(); ++i) {
    if (dy(i) != 0.0) worst = std::max(worst, sup + std::abs(dy(i)));
  }
  return std::log(2.0) / (params.eta * worst);
}

}  // namespace discforge
