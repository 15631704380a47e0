#pragma once

#include "discforge/types.hpp"

namespace discforge {

enum class RegKind { kLq, kEntropy };

// Regularized maximum parameters: omega*_{q,eta} for kLq, smax_eta for kEntropy.
struct RegParams {
  RegKind kind = RegKind::kLq;
  double q = 0.5;  // ignored for kEntropy
  double eta = 1.0;

  void validate() const;
};

struct RegEval {
  double value = 0.0;
  Vec grad;                 // in the simplex
  double multiplier = 0.0;  // lambda(eta*y), lq only
  Vec gaps;                 // multiplier - eta*y_i, lq only
};

// Solves sum_i (lambda - eta*y_i)^{1/(q-1)} = 1. The root lies in
// [max eta*y + 1, max eta*y + m^{1-q}]; bisection guarded Newton.
double lq_multiplier(const Vec& y, const RegParams& params);

RegEval lq_value_grad(const Vec& y, const RegParams& params);
RegEval smax_value_grad(const Vec& y, double eta);
RegEval reg_value_grad(const Vec& y, const RegParams& params);
double reg_value(const Vec& y, const RegParams& params);

// Weights w with omega(y+d) <= omega(y) + <grad,d> + sum_i w_i d_i^2
// whenever ||d||_inf <= taylor_step_cap(params).
Vec hess_diag_bound(const RegEval& eval, const RegParams& params);
double taylor_step_cap(const RegParams& params);

// The same bound with constant eta/(2(1-q)) (1 + C2/m), valid for
// ||d||_inf <= C1 (1-q)/(m eta).
inline constexpr double kSharpC1 = 1.0 / 16.0;
inline constexpr double kSharpC2 = 1.0;
Vec sharpened_hess_weights(const RegEval& eval, const RegParams& params);
double sharpened_step_cap(const RegParams& params, int m);

// Largest s >= 0 such that the second-order bound with constant
// (1+rho) eta/(2(1-q)) holds for every d' = s' * dy, s' in [0, s].
// Uses the gap form of the Hessian: only coordinates where dy is nonzero
// matter, and each gap can shrink by at most ||d||_inf + |d_i|.
// rho = 1 reproduces hess_diag_bound's constant.
double lq_gap_step_cap(const RegEval& eval, const RegParams& params, const Vec& dy, double rho);

// Same for smax with the eta * grad weights (rho = 1 only).
double smax_step_cap(const RegParams& params, const Vec& dy);

}  // namespace discforge
