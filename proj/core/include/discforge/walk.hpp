#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "discforge/instance.hpp"
#include "discforge/subspace.hpp"
#include "discforge/types.hpp"

namespace discforge {

inline constexpr double kSnapTol = 1e-12;

struct PartialColoring {
  Vec x;
  IndexSet F;
  long t = 0;

  static PartialColoring zeros(int n);
  int n() const { return static_cast<int>(x.size()); }
  int k() const { return static_cast<int>(F.size()); }
  // Recomputes F from x (exact comparison with +-1).
  void refresh_active();
};

// Named per-step quantities reported by an oracle. Column names follow a
// suffix convention the verifier understands:
//   <name>_before, <name>_after, <name>_budget : after - before <= budget
//   <name>, <name>_cap                         : value <= cap
// Anything else is recorded but not checked.
using Diagnostics = std::vector<std::pair<std::string, double>>;

struct OracleResult {
  bool undefined = true;
  SubspaceBasis subspace;
  Vec sign_form;  // length n; the walk picks the signing with <sign_form, delta> <= 0
  Diagnostics diagnostics;

  static OracleResult Undefined() { return {}; }
};

class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual OracleResult query(const PartialColoring& x) = 0;

  // Largest step length <= proposed along unit delta for which the
  // oracle's potential guarantees hold. Must be > 0.
  virtual double accept_step(const PartialColoring& x, const Vec& delta, double proposed) {
    (void)x;
    (void)delta;
    return proposed;
  }

  // Called once the step has been applied. Appends the step's ledger
  // entries to `out`.
  virtual void on_step(const PartialColoring& before, const Vec& delta, double step,
                       const PartialColoring& after, Diagnostics& out) {
    (void)before;
    (void)delta;
    (void)step;
    (void)after;
    (void)out;
  }

  // Oracle returns Undefined once |F| drops below this.
  virtual int undefined_threshold() const = 0;
};

struct StepRecord {
  long t = 0;
  double step = 0.0;
  double dot_x_delta = 0.0;  // <delta, x(t)> before the step
  IndexSet frozen;           // coordinates frozen by this step
  Diagnostics diagnostics;   // query diagnostics followed by on_step entries
  std::vector<std::pair<int, double>> delta;  // sparse unit direction
};

struct WalkTrace {
  int n = 0;
  double L = 0.0;
  std::map<std::string, std::string> meta;
  std::vector<StepRecord> steps;
  Vec x_final;   // partial coloring when the oracle returned Undefined
  Vec coloring;  // after sign rounding
};

struct WalkOptions {
  double L = 0.5;
  long max_steps = 5'000'000;
  bool record_trace = true;
  bool record_delta = true;
};

struct WalkResult {
  Vec coloring;
  Vec x_final;
  long steps = 0;
  double min_step = std::numeric_limits<double>::infinity();  // smallest non-freezing step
  double sum_sq_steps = 0.0;
  WalkTrace trace;
};

// min(L, smallest positive distance along delta to a face of the cube
// through an active coordinate).
double boundary_step(const PartialColoring& x, const Vec& delta, double L);

// Unit vector in span(basis) orthogonal to x, or nullopt when that
// intersection is {0}. `basis` is n x d with orthonormal columns.
std::optional<Vec> pick_direction(const Mat& basis, const Vec& x);

WalkResult run_walk(int n, Oracle& oracle, const WalkOptions& opts);
inline WalkResult run_walk(const Instance& a, Oracle& oracle, const WalkOptions& opts) {
  return run_walk(a.cols(), oracle, opts);
}

// sign(0) := +1.
Vec round_signs(const Vec& x);

// Oracle that always returns R^F with a zero sign form (for engine tests).
class FullSpaceOracle final : public Oracle {
 public:
  explicit FullSpaceOracle(int threshold = 2) : threshold_(threshold) {}
  OracleResult query(const PartialColoring& x) override;
  int undefined_threshold() const override { return threshold_; }

 private:
  int threshold_;
};

}  // namespace discforge
