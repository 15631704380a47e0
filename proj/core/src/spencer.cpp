#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "discforge/error.hpp"
#include "discforge/spencer.hpp"
#include "discforge/subspace.hpp"
#include "discforge/trace.hpp"

namespace discforge {

namespace {

// Indices sorted by descending value, ties by index.
std::vector<int> order_desc(const Vec& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v(a) > v(b); });
  return idx;
}

void check_entries(const Instance& a) {
  a.validate();
  if (a.entries.size() && a.entries.cwiseAbs().maxCoeff() > 1.0) {
    fail(ErrorCode::kInvalidInstance, "spencer: entries must lie in [-1,1]");
  }
}

}  // namespace

SpencerParams spencer_general_params(int m, int n) {
  require(n >= 1 && m >= n, "spencer: need 1 <= n <= m");
  SpencerParams p;
  const double formula = 1.0 - 1.0 / std::log(2.0 * m / n);
  p.q = (std::isfinite(formula) && formula >= 0.5) ? formula : 0.5;
  p.eta = std::sqrt((1.0 - p.q) * std::pow(m, 1.0 - p.q) / std::pow(n, p.q));
  p.doubled = true;
  return p;
}

SpencerParams spencer_tight_params(int n) {
  SpencerParams p;
  p.q = 2.0 / 3.0;
  p.eta = std::sqrt(2.0 * (1.0 - p.q)) * std::pow(n, (1.0 - 2.0 * p.q) / 2.0);
  p.doubled = false;
  return p;
}

// ---------------------------------------------------------------- general

SpencerOracle::SpencerOracle(const Instance& a, SpencerParams params) : params_(params) {
  params_.reg().validate();
  doubled_.resize(2 * a.rows(), a.cols());
  doubled_ << a.entries, -a.entries;
}

double SpencerOracle::potential(const Vec& x) const { return reg_value(doubled_ * x, params_.reg()); }

OracleResult SpencerOracle::query(const PartialColoring& x) {
  const int k = x.k();
  const int m = static_cast<int>(doubled_.rows() / 2);
  eval_ = lq_value_grad(doubled_ * x.x, params_.reg());
  if (k < kSpencerThreshold) return OracleResult::Undefined();

  const std::vector<int> order = order_desc(eval_.grad);
  const int top = (k + 1) / 2 - 1;
  std::vector<char> removed(m, 0);
  for (int r = 0; r < top; ++r) removed[order[r] % m] = 1;

  const Mat a_f = restrict_columns(doubled_.topRows(m), x.F);
  std::vector<int> rest;
  std::vector<int> gone;
  for (int i = 0; i < m; ++i) (removed[i] ? gone : rest).push_back(i);

  Mat constraints(k, gone.size());
  for (std::size_t c = 0; c < gone.size(); ++c) constraints.col(c) = a_f.row(gone[c]).transpose();
  const SubspaceBasis s1 = orth_complement_within(x.F, constraints);

  Mat rows(rest.size(), k);
  Vec w(rest.size());
  Vec wm(rest.size());
  const double e = 2.0 - params_.q;
  for (std::size_t r = 0; r < rest.size(); ++r) {
    const int i = rest[r];
    rows.row(r) = a_f.row(i);
    w(r) = eval_.grad(i) + eval_.grad(i + m);
    wm(r) = std::pow(eval_.grad(i), e) + std::pow(eval_.grad(i + m), e);
  }

  OracleResult res;
  res.undefined = false;
  res.subspace = bottom_eigs(w, rows, s1, 2);
  res.sign_form = doubled_.transpose() * eval_.grad;

  // Largest value of sum grad_i^{2-q} <A_i, v>^2 over unit v in S.
  const Mat proj = rows * res.subspace.basis;
  Eigen::SelfAdjointEigenSolver<Mat> eig(proj.transpose() * wm.asDiagonal() * proj);
  const double quad = eig.eigenvalues().maxCoeff();
  const double cap = 4.0 * std::pow(k, params_.q - 1.0);
  max_quad_ratio_ = std::max(max_quad_ratio_, quad / cap);
  res.diagnostics = {{"k", k},
                     {"codim", static_cast<double>(s1.codim())},
                     {"codim_cap", static_cast<double>(top)},
                     {"quad", quad},
                     {"quad_cap", cap}};
  return res;
}

double SpencerOracle::accept_step(const PartialColoring&, const Vec& delta, double proposed) {
  const Vec dy = doubled_ * delta;
  return std::min(proposed, lq_gap_step_cap(eval_, params_.reg(), dy, 1.0));
}

void SpencerOracle::on_step(const PartialColoring&, const Vec& delta, double step,
                            const PartialColoring& after, Diagnostics& out) {
  const Vec dy = step * (doubled_ * delta);
  const Vec w = hess_diag_bound(eval_, params_.reg());
  const double budget = w.dot(dy.cwiseAbs2());
  const double after_value = potential(after.x);
  ledger_ += budget;
  realized_ += after_value - eval_.value;
  out.emplace_back("phi_before", eval_.value);
  out.emplace_back("phi_after", after_value);
  out.emplace_back("phi_budget", budget);
  out.emplace_back("first_order", eval_.grad.dot(dy));
}

SpencerRun spencer_color(const Instance& a, const SpencerOptions& opts) {
  check_entries(a);
  SpencerParams params = spencer_general_params(a.rows(), a.cols());
  if (opts.q) params.q = *opts.q;
  if (opts.eta) params.eta = *opts.eta;
  params.reg().validate();

  SpencerOracle oracle(a, params);
  WalkOptions wopts;
  wopts.L = opts.L;
  wopts.record_trace = opts.record_trace;
  wopts.record_delta = opts.record_trace;

  SpencerRun run;
  run.params = params;
  run.potential_start = oracle.potential(Vec::Zero(a.cols()));
  run.walk = run_walk(a, oracle, wopts);
  run.coloring = run.walk.coloring;
  run.discrepancy = (a.entries * run.coloring).lpNorm<Eigen::Infinity>();
  run.ledger = oracle.ledger_total();
  run.realized_increase = oracle.realized_increase();
  const double max_entry = a.entries.size() ? a.entries.cwiseAbs().maxCoeff() : 0.0;
  run.rounding = (kSpencerThreshold - 1) * max_entry;
  run.certified = run.potential_start + run.ledger + run.rounding;
  const double m2 = 2.0 * a.rows();
  const double n = a.cols();
  run.theorem_bound = std::pow(m2, 1.0 - params.q) / (params.eta * params.q) +
                      8.0 * params.eta * std::pow(n, params.q) / (params.q * (1.0 - params.q));
  run.steps = run.walk.steps;
  run.min_step = run.walk.min_step;
  run.max_quad_ratio = oracle.max_quad_ratio();

  auto& meta = run.walk.trace.meta;
  meta["algorithm"] = "spencer";
  meta["q"] = format_real(params.q);
  meta["eta"] = format_real(params.eta);
  return run;
}

}  // namespace discforge
