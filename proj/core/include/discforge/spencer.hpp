#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include "discforge/instance.hpp"
#include "discforge/regmax.hpp"
#include "discforge/walk.hpp"

namespace discforge {

struct SpencerParams {
  double q = 0.5;
  double eta = 1.0;
  bool doubled = true;

  RegParams reg() const { return {RegKind::kLq, q, eta}; }
};

// q = 1 - 1/log(2m/n) while that is at least 1/2, otherwise q = 1/2;
// eta = sqrt((1-q) m^{1-q} / n^q).
SpencerParams spencer_general_params(int m, int n);

// q = 2/3 and eta = sqrt(2(1-q)) n^{(1-2q)/2}, the minimizer of
// n^{1-q}/(q eta) + eta n^q/(2q(1-q)), whose value is 3 sqrt(3/2) sqrt(n).
SpencerParams spencer_tight_params(int n);

inline constexpr int kSpencerThreshold = 4;

// Rows doubled to [A; -A]. Removes the original rows behind the top
// ceil(k/2)-1 pseudo-rows by gradient, then returns the bottom-2 eigenspace
// of R = sum (grad+_i + grad-_i) A_i A_i^T on the rest.
class SpencerOracle final : public Oracle {
 public:
  SpencerOracle(const Instance& a, SpencerParams params);

  OracleResult query(const PartialColoring& x) override;
  double accept_step(const PartialColoring& x, const Vec& delta, double proposed) override;
  void on_step(const PartialColoring& before, const Vec& delta, double step,
               const PartialColoring& after, Diagnostics& out) override;
  int undefined_threshold() const override { return kSpencerThreshold; }

  double potential(const Vec& x) const;
  double ledger_total() const { return ledger_; }
  double realized_increase() const { return realized_; }
  double max_quad_ratio() const { return max_quad_ratio_; }

 private:
  Mat doubled_;
  SpencerParams params_;
  RegEval eval_;
  double ledger_ = 0.0;
  double realized_ = 0.0;
  double max_quad_ratio_ = 0.0;
};

// Sign-proxy potential omega*(pi_t(x)) over the n original rows, with the
// alpha-sampled split point and the (1+rho)-sharpened Taylor weights.
class TightSpencerOracle final : public Oracle {
 public:
  TightSpencerOracle(const Instance& a, SpencerParams params, double eps, double rho,
                     std::uint64_t seed);

  OracleResult query(const PartialColoring& x) override;
  double accept_step(const PartialColoring& x, const Vec& delta, double proposed) override;
  void on_step(const PartialColoring& before, const Vec& delta, double step,
               const PartialColoring& after, Diagnostics& out) override;
  int undefined_threshold() const override { return kSpencerThreshold; }

  Vec proxy(const Vec& x) const;
  double ledger_total() const { return ledger_; }
  double reset_total() const { return reset_total_; }
  double max_anchor() const { return anchor_.cwiseAbs().maxCoeff(); }
  int max_alpha_tries() const { return max_tries_; }
  long resets() const { return resets_; }
  double realized_increase() const { return realized_; }
  double max_quad_ratio() const { return max_quad_ratio_; }

 private:
  const Mat& a_;
  SpencerParams params_;
  double eps_;
  double rho_;
  std::mt19937_64 rng_;
  Vec sign_;
  Vec anchor_;
  RegEval eval_;
  double ledger_ = 0.0;
  double reset_total_ = 0.0;
  int max_tries_ = 0;
  long resets_ = 0;
  double realized_ = 0.0;
  double max_quad_ratio_ = 0.0;
};

struct SpencerOptions {
  std::optional<double> q;
  std::optional<double> eta;
  double L = 0.5;
  double eps = 0.3;  // tight variant only
  double rho = 0.5;  // tight variant only
  std::uint64_t seed = 0;
  bool record_trace = false;
};

struct SpencerRun {
  SpencerParams params;
  Vec coloring;
  double discrepancy = 0.0;
  double potential_start = 0.0;  // omega*(0)
  double ledger = 0.0;           // summed per-step second-order budgets
  double realized_increase = 0.0;
  double rounding = 0.0;         // (threshold - 1) * max|A_ij|
  double certified = 0.0;        // bound on ||Ax||_inf proven by the run
  double theorem_bound = 0.0;    // closed-form bound from the parameters
  long steps = 0;
  double min_step = 0.0;
  double max_quad_ratio = 0.0;   // max over steps of (v^T M v) / cap on S

  // Tight variant.
  double max_anchor = 0.0;
  double reset_total = 0.0;
  long resets = 0;
  int max_alpha_tries = 0;
  double c0 = 0.0;               // certified - (3 sqrt(3/2) + eps) sqrt(n), floored at 0

  WalkResult walk;
};

// Entries must lie in [-1,1] and n <= m.
SpencerRun spencer_color(const Instance& a, const SpencerOptions& opts = {});

// Square A with entries in [-1,1]; eps > 0.
SpencerRun spencer_color_tight(const Instance& a, const SpencerOptions& opts);

inline const double kTightConstant = 3.0 * std::sqrt(1.5);

}  // namespace discforge
