#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "discforge/error.hpp"
#include "discforge/pseudorandom.hpp"
#include "discforge/subspace.hpp"
#include "discforge/trace.hpp"

namespace discforge {

namespace {

constexpr int kMaxHalvings = 200;

// Column sums of rows `idx` of m weighted by w: sum_p w_p m.row(idx[p]).
Vec weighted_row_sum(const Mat& m, const std::vector<int>& idx, const Vec& w) {
  Vec out = Vec::Zero(m.cols());
  for (std::size_t p = 0; p < idx.size(); ++p) out += w(p) * m.row(idx[p]).transpose();
  return out;
}

Mat stack_columns(const std::vector<Vec>& cols, int rows) {
  Mat out(rows, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(c) = cols[c];
  return out;
}

}  // namespace

KomlosOracle::KomlosOracle(const Instance& a, PseudoState state)
    : a_(a.entries), state_(std::move(state)) {
  phi_eval_.resize(state_.groups.size());
  phi_active_.assign(state_.groups.size(), 0);
  phi_ledger_.assign(state_.groups.size(), 0.0);
}

double KomlosOracle::phi(int r, const Vec& x) const {
  if (state_.groups[r].empty()) return 0.0;
  return reg_value(phi_proxy(state_, a_, r, x), phi_params(state_.n, r));
}

OracleResult KomlosOracle::query(const PartialColoring& x) {
  pseudo_state_update(state_, a_, x);
  const int n = state_.n;
  const int k = x.k();
  const int groups = num_groups();
  psi_now_ = psi_value(state_, x.x);
  std::fill(phi_active_.begin(), phi_active_.end(), 0);
  if (k < kKomlosThreshold) return OracleResult::Undefined();

  const Mat a_f = restrict_columns(a_, x.F);
  std::vector<Vec> phi_cons;
  std::vector<char> constrained(n, 0);
  auto add_row = [&](int i) {
    if (constrained[i]) return;
    constrained[i] = 1;
    phi_cons.push_back(a_f.row(i).transpose());
  };

  const int r0 = static_cast<int>(std::ceil(std::log2(32.0 * n / k)));
  int large = 0;
  for (int r = r0 + 1; r < groups; ++r)
    for (int i : state_.groups[r])
      if (state_.in_p[i]) {
        add_row(i);
        ++large;
      }
  for (int i : state_.exceptional) add_row(i);

  double weight_sum = 0.0;
  for (int r = 0; r <= std::min(r0, groups - 1); ++r)
    weight_sum += std::pow(k * std::ldexp(1.0, r) / n, state_.eps);
  const double c1 = weight_sum > 0 ? 1.0 / (8.0 * weight_sum) : 0.0;

  OracleResult res;
  res.undefined = false;
  res.sign_form = Vec::Zero(n);
  int phi_cap = 2 * (k / 16);
  for (int r = 0; r <= std::min(r0, groups - 1); ++r) {
    if (state_.groups[r].empty()) continue;
    const IndexSet& rows = state_.groups[r];
    const auto g = static_cast<int>(rows.size());
    const RegParams params = phi_params(n, r);
    phi_eval_[r] = lq_value_grad(phi_proxy(state_, a_, r, x.x), params);
    phi_active_[r] = 1;
    const Vec& grad = phi_eval_[r].grad;

    const double k_r = c1 * std::pow(k * std::ldexp(1.0, r) / n, state_.eps) * k;
    const int half = static_cast<int>(std::ceil(k_r / 2.0));
    phi_cap += 2 * half;

    // Candidates: rows of R_r still in P and outside I. Pick I_r by the
    // largest pseudo-row gradient.
    std::vector<int> cand;
    for (int p = 0; p < g; ++p)
      if (state_.in_p[rows[p]] && !constrained[rows[p]]) cand.push_back(p);
    std::vector<double> score(g, 0.0);
    for (int p : cand) score[p] = std::max(grad(p), grad(p + g));
    std::stable_sort(cand.begin(), cand.end(), [&](int u, int v) { return score[u] > score[v]; });
    const int take = std::min<int>(half, static_cast<int>(cand.size()));
    for (int c = 0; c < take; ++c) add_row(rows[cand[c]]);

    std::vector<int> rest_rows;
    std::vector<double> rest_w;
    for (std::size_t c = take; c < cand.size(); ++c) {
      const int p = cand[c];
      const double w = std::pow(grad(p), 1.5) + std::pow(grad(p + g), 1.5);
      if (w <= 0.0) continue;
      rest_rows.push_back(rows[p]);
      rest_w.push_back(w);
    }
    if (!rest_rows.empty() && half > 0) {
      Mat m_rows(rest_rows.size(), k);
      for (std::size_t p = 0; p < rest_rows.size(); ++p) m_rows.row(p) = a_f.row(rest_rows[p]);
      const Vec w = Eigen::Map<const Vec>(rest_w.data(), rest_w.size());
      const int count = std::min<int>(half, static_cast<int>(rest_rows.size()));
      const Mat top = top_eigvecs(w, m_rows, count);
      for (Eigen::Index c = 0; c < top.cols(); ++c) phi_cons.push_back(top.col(c));
    }

    // u_r = A_r^T (grad+ - grad-) over rows still in P.
    std::vector<int> p_rows;
    std::vector<double> p_w;
    for (int p = 0; p < g; ++p) {
      if (!state_.in_p[rows[p]]) continue;
      p_rows.push_back(rows[p]);
      p_w.push_back(grad(p) - grad(p + g));
    }
    if (!p_rows.empty()) {
      const Vec w = Eigen::Map<const Vec>(p_w.data(), p_w.size());
      res.sign_form += std::pow(2.0, -state_.eps * r) * weighted_row_sum(a_, p_rows, w);
    }
  }

  // Psi: kill both first-order terms and the two quadratic forms.
  std::vector<Vec> psi_cons;
  const RegEval psi = smax_value_grad(psi_proxy(state_, x.x), state_.eta);
  std::vector<int> out_rows;
  std::vector<double> out_w;
  for (int i = 0; i < n; ++i) {
    if (state_.in_p[i]) continue;
    const double w = psi.grad(i) + psi.grad(i + n);
    if (w <= 0.0) continue;
    out_rows.push_back(i);
    out_w.push_back(w);
  }
  if (!out_rows.empty()) {
    const auto cnt = static_cast<Eigen::Index>(out_rows.size());
    Mat q1(cnt, k);
    Mat q2(cnt, k);
    Vec lin = Vec::Zero(k);
    Vec drift = Vec::Zero(k);
    for (Eigen::Index p = 0; p < cnt; ++p) {
      const int i = out_rows[p];
      const Vec diff = restrict_vector(x.x - state_.snapshots[state_.snapshot_of[i]], x.F);
      q1.row(p) = restrict_vector(state_.b.row(i).transpose(), x.F).transpose();
      q2.row(p) = q1.row(p).cwiseAbs2().cwiseProduct(diff.transpose());
      lin += (psi.grad(i) - psi.grad(i + n)) * q1.row(p).transpose();
      drift += out_w[p] * q2.row(p).transpose();
    }
    if (lin.squaredNorm() > 0) psi_cons.push_back(lin);
    if (drift.squaredNorm() > 0) psi_cons.push_back(drift);
    const Vec w = Eigen::Map<const Vec>(out_w.data(), out_w.size());
    for (const Mat* q : {&q1, &q2}) {
      const Mat c = quadratic_subspace_constraints(w, *q, 1.0 / 8.0);
      for (Eigen::Index j = 0; j < c.cols(); ++j) psi_cons.push_back(c.col(j));
    }
  }

  codim_.phi = static_cast<int>(phi_cons.size());
  codim_.phi_cap = phi_cap;
  codim_.psi = static_cast<int>(psi_cons.size());
  codim_.psi_cap = 2 + 2 * ((k + 7) / 8);
  max_codim_excess_ = std::max({max_codim_excess_, codim_.phi - codim_.phi_cap, codim_.psi - codim_.psi_cap});

  std::vector<Vec> all = phi_cons;
  all.insert(all.end(), psi_cons.begin(), psi_cons.end());
  res.subspace = orth_complement_within(x.F, stack_columns(all, k));
  if (res.subspace.dim() < 2) {
    fail(ErrorCode::kOracleBudget, "komlos: constraint subspace has dimension " +
                                       std::to_string(res.subspace.dim()) + " at |F|=" +
                                       std::to_string(k));
  }
  res.diagnostics = {{"k", k},
                     {"r0", r0},
                     {"in_p", state_.count_in_p()},
                     {"large_rows", large},
                     {"exceptional", static_cast<double>(state_.exceptional.size())},
                     {"phi_codim", codim_.phi},
                     {"phi_codim_cap", codim_.phi_cap},
                     {"psi_codim", codim_.psi},
                     {"psi_codim_cap", codim_.psi_cap}};
  return res;
}

double KomlosOracle::accept_step(const PartialColoring& x, const Vec& delta, double proposed) {
  double step = proposed;
  const Vec ad = a_ * delta;
  for (int r = 0; r < num_groups(); ++r) {
    if (!phi_active_[r]) continue;
    const IndexSet& rows = state_.groups[r];
    const auto g = static_cast<Eigen::Index>(rows.size());
    Vec dy(2 * g);
    for (Eigen::Index p = 0; p < g; ++p) {
      const double v = state_.in_p[rows[p]] ? ad(rows[p]) : 0.0;
      dy(p) = v;
      dy(p + g) = -v;
    }
    step = std::min(step, lq_gap_step_cap(phi_eval_[r], phi_params(state_.n, r), dy, 1.0));
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(psi_now_));
  for (int h = 0; h < kMaxHalvings; ++h) {
    if (psi_value(state_, x.x + step * delta) <= psi_now_ + tol) return step;
    step *= 0.5;
    ++backtracks_;
  }
  fail(ErrorCode::kNumerical, "komlos: Psi backtracking did not find a non-increasing step");
}

void KomlosOracle::on_step(const PartialColoring& before, const Vec& delta, double step,
                           const PartialColoring& after, Diagnostics& out) {
  const Vec ad = step * (a_ * delta);
  for (int r = 0; r < num_groups(); ++r) {
    if (state_.groups[r].empty()) continue;
    const std::string tag = "phi" + std::to_string(r);
    const double after_value = phi(r, after.x);
    double before_value = 0.0;
    double budget = 0.0;
    if (phi_active_[r]) {
      const IndexSet& rows = state_.groups[r];
      const auto g = static_cast<Eigen::Index>(rows.size());
      Vec dy(2 * g);
      for (Eigen::Index p = 0; p < g; ++p) {
        const double v = state_.in_p[rows[p]] ? ad(rows[p]) : 0.0;
        dy(p) = v;
        dy(p + g) = -v;
      }
      const RegParams params = phi_params(state_.n, r);
      before_value = phi_eval_[r].value;
      budget = phi_eval_[r].grad.dot(dy) +
               hess_diag_bound(phi_eval_[r], params).dot(dy.cwiseAbs2());
      phi_ledger_[r] += budget;
    } else {
      before_value = phi(r, before.x);
    }
    out.emplace_back(tag + "_before", before_value);
    out.emplace_back(tag + "_after", after_value);
    out.emplace_back(tag + "_budget", budget);
  }
  const double psi_after = psi_value(state_, after.x);
  max_psi_increase_ = std::max(max_psi_increase_, psi_after - psi_now_);
  out.emplace_back("psi_before", psi_now_);
  out.emplace_back("psi_after", psi_after);
  out.emplace_back("psi_budget", 0.0);
}

KomlosRun komlos_color(const Instance& a, const KomlosOptions& opts) {
  require(a.rows() == a.cols(), "komlos: A must be square");
  a.validate();
  if (a.col_norm_bound > 1.2 * (1.0 + 1e-9)) {
    fail(ErrorCode::kInvalidInstance, "komlos: column norm bound must be at most 1.2");
  }
  const int n = a.cols();
  KomlosOracle oracle(a, make_pseudo_state(a, opts.lambda, opts.tol));
  const PseudoState& st0 = oracle.state();

  KomlosRun run;
  run.lambda = st0.lambda;
  run.lambda_eff = st0.lambda_eff;
  run.eta = st0.eta;
  const double logn = std::log(std::max(2, n));
  run.psi_start = psi_value(st0, Vec::Zero(n));
  run.psi_start_bound = std::sqrt(run.lambda_eff * logn) * std::log(2.0 * n) / logn;
  for (int r = 0; r < oracle.num_groups(); ++r) run.phi_start.push_back(oracle.phi(r, Vec::Zero(n)));

  WalkOptions wopts;
  wopts.L = opts.L;
  wopts.record_trace = opts.record_trace;
  wopts.record_delta = opts.record_trace;
  run.walk = run_walk(a, oracle, wopts);
  run.coloring = run.walk.coloring;
  run.discrepancy = (a.entries * run.coloring).lpNorm<Eigen::Infinity>();
  run.steps = run.walk.steps;
  run.backtracks = oracle.backtracks();
  run.max_codim_excess = oracle.max_codim_excess();

  run.max_psi_increase = oracle.max_psi_increase();
  run.phi_ledger = oracle.phi_ledger();
  for (double l : run.phi_ledger) run.max_phi_ledger = std::max(run.max_phi_ledger, l);

  const PseudoState& st = oracle.state();
  const Vec& xt = run.walk.x_final;
  run.psi_end = psi_value(st, xt);
  run.max_phi_increase = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < oracle.num_groups(); ++r) {
    run.phi_end.push_back(oracle.phi(r, xt));
    if (!st.groups[r].empty())
      run.max_phi_increase = std::max(run.max_phi_increase, run.phi_end[r] - run.phi_start[r]);
  }

  double row_bound = 0.0;
  run.max_anchor_excess = -std::numeric_limits<double>::infinity();
  run.threshold_count_cap =
      128.0 * kKomlosK * kKomlosK * (run.lambda / run.lambda_eff) * logn;
  for (int i = 0; i < n; ++i) {
    const double phi_row = run.phi_end[st.group[i]];
    if (st.in_p[i]) {
      row_bound = std::max(row_bound, phi_row);
      continue;
    }
    ++run.rows_left_p;
    const Vec diff = xt - st.snapshots[st.snapshot_of[i]];
    const double quad = st.b_sq.row(i).dot(diff.cwiseAbs2());
    const double thresh = (a.entries.row(i) - st.b.row(i)).dot(diff);
    const double mass = st.b_sq.row(i).sum();
    run.max_anchor = std::max(run.max_anchor, std::abs(st.anchor_value(i)));
    run.max_anchor_excess = std::max(run.max_anchor_excess, std::abs(st.anchor_value(i)) - phi_row);
    run.max_quad_correction = std::max(run.max_quad_correction, quad);
    if (mass > 0) run.max_quad_correction_ratio = std::max(run.max_quad_correction_ratio, quad / (4.0 * mass));
    run.max_threshold_error = std::max(run.max_threshold_error, std::abs(thresh));
    run.max_threshold_count = std::max(run.max_threshold_count, st.exit_thresholded[i]);
    row_bound = std::max(row_bound, std::abs(st.anchor_value(i)) + run.psi_end +
                                        kKomlosK * st.eta * quad + std::abs(thresh));
  }
  if (run.rows_left_p == 0) run.max_anchor_excess = 0.0;

  const double max_entry = a.entries.cwiseAbs().maxCoeff();
  run.rounding = (kKomlosThreshold - 1) * max_entry;
  run.certified = row_bound + run.rounding;

  auto& meta = run.walk.trace.meta;
  meta["algorithm"] = "komlos";
  meta["lambda"] = format_real(run.lambda);
  meta["eta"] = format_real(run.eta);
  return run;
}

BeckFialaRun beck_fiala_color(const Instance& a, const KomlosOptions& opts) {
  require(a.rows() == a.cols(), "beck-fiala: A must be square");
  if (!((a.entries.array() == 0.0) || (a.entries.array().abs() == 1.0)).all()) {
    fail(ErrorCode::kInvalidInstance, "beck-fiala: entries must lie in {0, +-1}");
  }
  BeckFialaRun bf;
  bf.s = std::max(1, a.col_sparsity ? *a.col_sparsity : max_column_nonzeros(a.entries));
  if (max_column_nonzeros(a.entries) > bf.s) {
    fail(ErrorCode::kInvalidInstance, "beck-fiala: column sparsity exceeds s");
  }
  const double root_s = std::sqrt(static_cast<double>(bf.s));
  bf.lambda = opts.lambda ? *opts.lambda : lambda_param(a.entries, opts.tol, a.seed);
  bf.lambda_scaled = bf.lambda / bf.s;

  Instance scaled = a;
  scaled.entries = a.entries / root_s;
  scaled.col_norm_bound = 1.0;
  KomlosOptions kopts = opts;
  kopts.lambda = bf.lambda_scaled;
  bf.komlos = komlos_color(scaled, kopts);
  bf.discrepancy = (a.entries * bf.komlos.coloring).lpNorm<Eigen::Infinity>();

  const double logn = std::log(std::max(2, a.cols()));
  bf.cert_sqrt = root_s * (1.0 + std::sqrt(bf.lambda_scaled * logn));
  bf.cert_linear = root_s + bf.lambda;
  bf.reference = root_s + std::min(std::sqrt(bf.lambda * logn), bf.lambda);
  bf.komlos.walk.trace.meta["algorithm"] = "beck-fiala";
  return bf;
}

}  // namespace discforge
