#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "discforge/error.hpp"
#include "discforge/rng.hpp"
#include "discforge/spencer.hpp"
#include "discforge/subspace.hpp"
#include "discforge/trace.hpp"

namespace discforge {

namespace {

// Additive slack in the alpha condition, standing in for the O(k^{q-2}) term.
constexpr double kTailSlack = 8.0;

double row_sign(double v) { return v > 0.0 ? 1.0 : -1.0; }

}  // namespace

TightSpencerOracle::TightSpencerOracle(const Instance& a, SpencerParams params, double eps,
                                       double rho, std::uint64_t seed)
    : a_(a.entries),
      params_(params),
      eps_(eps),
      rho_(rho),
      rng_(make_rng(seed, Stream::kAlgorithm)),
      sign_(Vec::Constant(a.rows(), -1.0)),
      anchor_(Vec::Zero(a.rows())) {
  params_.reg().validate();
  require(eps > 0.0, "spencer-tight: eps must be > 0");
  require(rho > 0.0 && rho <= 1.0, "spencer-tight: rho must lie in (0,1]");
}

Vec TightSpencerOracle::proxy(const Vec& x) const {
  return sign_.cwiseProduct(a_ * x - anchor_);
}

OracleResult TightSpencerOracle::query(const PartialColoring& x) {
  const int k = x.k();
  eval_ = lq_value_grad(proxy(x.x), params_.reg());
  if (k < kSpencerThreshold) return OracleResult::Undefined();

  const double q = params_.q;
  const int rows_total = static_cast<int>(a_.rows());
  std::vector<int> order(rows_total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return eval_.grad(i) > eval_.grad(j); });
  Vec powered(rows_total);
  for (int r = 0; r < rows_total; ++r) powered(r) = std::pow(eval_.grad(order[r]), 2.0 - q);
  // suffix(r) = sum of powered ranks >= r
  Vec suffix = Vec::Zero(rows_total + 1);
  for (int r = rows_total - 1; r >= 0; --r) suffix(r) = suffix(r + 1) + powered(r);

  std::uniform_real_distribution<double> pick(0.5, 1.0);
  const int max_tries = 64 * static_cast<int>(std::ceil(1.0 / eps_));
  double alpha = 0.0;
  int split = 0;  // first tail rank (0-based), i.e. floor(alpha k) - 1
  int tries = 0;
  double tail = 0.0;
  for (;;) {
    if (++tries > max_tries) {
      fail(ErrorCode::kNumerical, "spencer-tight: alpha sampling exceeded " +
                                      std::to_string(max_tries) + " tries at k=" +
                                      std::to_string(k));
    }
    alpha = pick(rng_);
    split = std::max(0, static_cast<int>(std::floor(alpha * k)) - 1);
    tail = suffix(std::min(split, rows_total));
    const double allowed =
        (1.0 + eps_) * (1.0 - alpha) * std::pow(k, q - 1.0) + kTailSlack * std::pow(k, q - 2.0);
    if (tail <= allowed) break;
  }
  max_tries_ = std::max(max_tries_, tries);

  const Mat a_f = restrict_columns(a_, x.F);
  const int top = std::min(split, rows_total);
  Mat constraints(k, top);
  for (int r = 0; r < top; ++r) constraints.col(r) = a_f.row(order[r]).transpose();
  const SubspaceBasis s1 = orth_complement_within(x.F, constraints);

  const int rest = rows_total - top;
  Mat rows(rest, k);
  Vec w(rest);
  for (int r = 0; r < rest; ++r) {
    rows.row(r) = a_f.row(order[top + r]);
    w(r) = powered(top + r);
  }
  Vec eigs;
  OracleResult res;
  res.undefined = false;
  res.subspace = bottom_eigs(w, rows, s1, 2, &eigs);
  res.sign_form = a_.transpose() * sign_.cwiseProduct(eval_.grad);

  const double quad = eigs.maxCoeff();
  // Trace averaging bound on the second eigenvalue given the tail condition.
  const double cap = std::max(0.0, tail) * k / std::max(1, s1.dim() - 1);
  if (cap > 0) max_quad_ratio_ = std::max(max_quad_ratio_, quad / cap);
  res.diagnostics = {{"k", k},
                     {"alpha", alpha},
                     {"alpha_tries", tries},
                     {"codim", static_cast<double>(s1.codim())},
                     {"codim_cap", static_cast<double>(top)},
                     {"quad", quad},
                     {"quad_cap", cap + 1e-12}};
  return res;
}

double TightSpencerOracle::accept_step(const PartialColoring&, const Vec& delta,
                                       double proposed) {
  const Vec dy = sign_.cwiseProduct(a_ * delta);
  return std::min(proposed, lq_gap_step_cap(eval_, params_.reg(), dy, rho_));
}

void TightSpencerOracle::on_step(const PartialColoring&, const Vec& delta, double step,
                                 const PartialColoring& after, Diagnostics& out) {
  const double q = params_.q;
  const Vec dy = step * sign_.cwiseProduct(a_ * delta);
  const double coef = (1.0 + rho_) * params_.eta / (2.0 * (1.0 - q));
  const double budget = coef * (eval_.grad.array().pow(2.0 - q) * dy.array().square()).sum();
  const Vec y_after = proxy(after.x);
  const double phi_after = reg_value(y_after, params_.reg());
  ledger_ += budget;
  realized_ += phi_after - eval_.value;
  out.emplace_back("phi_before", eval_.value);
  out.emplace_back("phi_after", phi_after);
  out.emplace_back("phi_budget", budget);

  // Rows whose inner product changed sign restart their proxy at 0.
  const Vec ax = a_ * after.x;
  double lift = 0.0;
  long flipped = 0;
  for (Eigen::Index i = 0; i < ax.size(); ++i) {
    const double s = row_sign(ax(i));
    if (s != sign_(i)) {
      lift = std::max(lift, -y_after(i));
      sign_(i) = s;
      anchor_(i) = ax(i);
      ++flipped;
    }
  }
  double reset_after = phi_after;
  if (flipped) {
    reset_after = reg_value(proxy(after.x), params_.reg());
    resets_ += flipped;
  }
  reset_total_ += reset_after - phi_after;
  // omega* has its gradient in the simplex, so raising coordinates by at most
  // `lift` raises it by at most `lift`.
  out.emplace_back("reset_before", phi_after);
  out.emplace_back("reset_after", reset_after);
  out.emplace_back("reset_budget", std::max(0.0, lift));
  out.emplace_back("resets", static_cast<double>(flipped));
}

SpencerRun spencer_color_tight(const Instance& a, const SpencerOptions& opts) {
  a.validate();
  require(a.rows() == a.cols(), "spencer-tight: A must be square");
  if (a.entries.size() && a.entries.cwiseAbs().maxCoeff() > 1.0) {
    fail(ErrorCode::kInvalidInstance, "spencer-tight: entries must lie in [-1,1]");
  }
  require(opts.eps > 0.0, "spencer-tight: eps must be > 0");
  SpencerParams params = spencer_tight_params(a.cols());
  if (opts.q) params.q = *opts.q;
  if (opts.eta) params.eta = *opts.eta;

  TightSpencerOracle oracle(a, params, opts.eps, opts.rho, opts.seed);
  WalkOptions wopts;
  wopts.L = opts.L;
  wopts.record_trace = opts.record_trace;
  wopts.record_delta = opts.record_trace;

  SpencerRun run;
  run.params = params;
  run.potential_start = reg_value(Vec::Zero(a.rows()), params.reg());
  run.walk = run_walk(a, oracle, wopts);
  run.coloring = run.walk.coloring;
  run.discrepancy = (a.entries * run.coloring).lpNorm<Eigen::Infinity>();
  run.ledger = oracle.ledger_total();
  run.reset_total = oracle.reset_total();
  run.resets = oracle.resets();
  run.max_anchor = oracle.max_anchor();
  run.max_alpha_tries = oracle.max_alpha_tries();
  run.realized_increase = oracle.realized_increase();
  run.max_quad_ratio = oracle.max_quad_ratio();
  const double max_entry = a.entries.size() ? a.entries.cwiseAbs().maxCoeff() : 0.0;
  run.rounding = (kSpencerThreshold - 1) * max_entry;
  // |<A_i,x>| <= pi_i + |anchor_i| <= omega*(pi) + max|anchor|.
  run.certified = run.potential_start + run.ledger + std::max(0.0, run.reset_total) +
                  run.max_anchor + run.rounding;
  const double n = a.cols();
  const double q = params.q;
  run.theorem_bound = std::pow(n, 1.0 - q) / (params.eta * q) +
                      params.eta * std::pow(n, q) / (2.0 * q * (1.0 - q));
  run.c0 = std::max(0.0, run.certified - (kTightConstant + opts.eps) * std::sqrt(n));
  run.steps = run.walk.steps;
  run.min_step = run.walk.min_step;

  auto& meta = run.walk.trace.meta;
  meta["algorithm"] = "spencer-tight";
  meta["q"] = format_real(params.q);
  meta["eta"] = format_real(params.eta);
  meta["eps"] = format_real(opts.eps);
  meta["rho"] = format_real(opts.rho);
  return run;
}

}  // namespace discforge
