#include "discforge/verify.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "discforge/error.hpp"
#include "discforge/regmax.hpp"
#include "discforge/trace.hpp"

namespace discforge {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string num(double v) { return format_real(v); }

struct Recorder {
  Verdict& v;
  const VerifyOptions& opts;
  void operator()(long step, std::string invariant, std::string detail) {
    v.pass = false;
    ++v.failure_count;
    if (v.failures.size() < opts.max_failures)
      v.failures.push_back({step, std::move(invariant), std::move(detail)});
  }
};

double meta_real(const WalkTrace& tr, const std::string& key) {
  const auto it = tr.meta.find(key);
  if (it == tr.meta.end()) fail(ErrorCode::kMalformedTrace, "trace metadata lacks '" + key + "'");
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    fail(ErrorCode::kMalformedTrace, "trace metadata '" + key + "' is not a number");
  }
}

}  // namespace

const VerifyFailure* Verdict::first(const std::string& invariant) const {
  for (const auto& f : failures)
    if (f.invariant == invariant) return &f;
  return nullptr;
}

Verdict verify_trace(const WalkTrace& tr, const Instance* instance, const VerifyOptions& opts) {
  Verdict v;
  Recorder bad{v, opts};
  const int n = tr.n;
  if (n <= 0) fail(ErrorCode::kMalformedTrace, "trace has no dimension");
  if (!(tr.L > 0.0)) fail(ErrorCode::kMalformedTrace, "trace has no step cap");

  std::optional<RegParams> spencer;
  Mat doubled;
  const auto alg = tr.meta.find("algorithm");
  if (instance && alg != tr.meta.end() && alg->second == "spencer") {
    require(instance->cols() == n, "verify: instance width does not match the trace");
    spencer = RegParams{RegKind::kLq, meta_real(tr, "q"), meta_real(tr, "eta")};
    doubled.resize(2 * instance->rows(), n);
    doubled << instance->entries, -instance->entries;
  }

  Vec x = Vec::Zero(n);
  std::vector<char> active(n, 1);
  double min_step = std::numeric_limits<double>::infinity();

  for (std::size_t s = 0; s < tr.steps.size(); ++s) {
    const StepRecord& rec = tr.steps[s];
    const long t = static_cast<long>(s);
    if (rec.t != t) bad(t, "step-index", "recorded t=" + std::to_string(rec.t));

    Vec delta = Vec::Zero(n);
    bool support_ok = true;
    for (const auto& [j, d] : rec.delta) {
      if (j < 0 || j >= n) fail(ErrorCode::kMalformedTrace, "delta index out of range at step " + std::to_string(t));
      delta(j) = d;
      if (!active[j]) support_ok = false;
    }
    ++v.checks;
    if (!support_ok) bad(t, "support", "direction touches a frozen coordinate");
    const double norm = delta.norm();
    ++v.checks;
    if (std::abs(norm - 1.0) > opts.orth_tol) bad(t, "unit-norm", "||delta|| = " + num(norm));
    const double dot = delta.dot(x);
    ++v.checks;
    if (std::abs(dot) > opts.orth_tol) bad(t, "orthogonality", "<delta, x(t)> = " + num(dot));

    ++v.checks;
    if (!(rec.step > 0.0) || rec.step > tr.L * (1.0 + 1e-12))
      bad(t, "step-cap", "step " + num(rec.step) + " outside (0, L=" + num(tr.L) + "]");

    if (spencer) {
      double recorded = std::numeric_limits<double>::quiet_NaN();
      for (const auto& [name, val] : rec.diagnostics)
        if (name == "phi_before") recorded = val;
      const double phi = reg_value(doubled * x, *spencer);
      ++v.checks;
      if (!(std::abs(phi - recorded) <= opts.ledger_tol * std::max(1.0, std::abs(phi))))
        bad(t, "potential-replay", "recomputed " + num(phi) + " vs recorded " + num(recorded));
    }

    // Apply the step the way the walk does.
    IndexSet frozen;
    for (int j = 0; j < n; ++j) {
      if (!active[j]) continue;
      double& xj = x(j);
      xj += rec.step * delta(j);
      if (std::abs(1.0 - std::abs(xj)) <= kSnapTol || std::abs(xj) > 1.0) {
        ++v.checks;
        if (std::abs(xj) > 1.0 + 1e-9) bad(t, "box", "x_" + std::to_string(j) + " = " + num(xj));
        xj = xj > 0.0 ? 1.0 : -1.0;
      }
      if (xj == 1.0 || xj == -1.0) {
        frozen.push_back(j);
        active[j] = 0;
      }
    }
    ++v.checks;
    if (frozen != rec.frozen) bad(t, "freezing", "replayed freeze set differs from the recorded one");
    if (rec.frozen.empty()) min_step = std::min(min_step, rec.step);
    v.sum_sq_steps += rec.step * rec.step;

    // Ledger columns.
    std::map<std::string, double> cols(rec.diagnostics.begin(), rec.diagnostics.end());
    for (const auto& [name, val] : cols) {
      if (ends_with(name, "_budget")) {
        const std::string base = name.substr(0, name.size() - 7);
        const auto b = cols.find(base + "_before");
        const auto a = cols.find(base + "_after");
        if (b == cols.end() || a == cols.end()) continue;
        ++v.checks;
        const double tol = opts.ledger_tol + 1e-12 * std::abs(b->second);
        if (!(a->second - b->second <= val + tol))
          bad(t, "ledger:" + base, "increase " + num(a->second - b->second) + " > budget " + num(val));
      } else if (ends_with(name, "_cap")) {
        const std::string base = name.substr(0, name.size() - 4);
        const auto it = cols.find(base);
        if (it == cols.end()) continue;
        ++v.checks;
        if (!(it->second <= val * (1.0 + 1e-9) + 1e-12))
          bad(t, "cap:" + base, num(it->second) + " > cap " + num(val));
      }
    }
  }

  v.steps = static_cast<long>(tr.steps.size());
  v.min_step = std::isfinite(min_step) ? min_step : 0.0;
  ++v.checks;
  if (tr.x_final.size() != n || (tr.x_final - x).lpNorm<Eigen::Infinity>() > 1e-9)
    bad(-1, "final-point", "replayed x(T) differs from the recorded x_final");
  ++v.checks;
  if (tr.coloring.size() != n || tr.coloring != round_signs(tr.x_final))
    bad(-1, "rounding", "coloring is not sign(x_final)");
  if (v.min_step > 0.0) {
    v.step_bound = n / (v.min_step * v.min_step) + n;
    ++v.checks;
    if (v.steps > v.step_bound) bad(-1, "step-count", std::to_string(v.steps) + " > " + num(v.step_bound));
  }
  ++v.checks;
  if (v.sum_sq_steps > n * (1.0 + 1e-9)) bad(-1, "step-energy", "sum step^2 = " + num(v.sum_sq_steps));
  return v;
}

Verdict verify_trace_file(const std::filesystem::path& trace_path,
                          const std::optional<std::filesystem::path>& instance_path,
                          const VerifyOptions& opts) {
  const WalkTrace tr = read_trace(trace_path);
  if (instance_path) {
    const Instance inst = load_instance(*instance_path);
    return verify_trace(tr, &inst, opts);
  }
  return verify_trace(tr, nullptr, opts);
}

}  // namespace discforge
