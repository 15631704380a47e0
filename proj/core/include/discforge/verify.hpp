#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "discforge/instance.hpp"
#include "discforge/walk.hpp"

namespace discforge {

struct VerifyFailure {
  long step = -1;  // -1 for whole-trace checks
  std::string invariant;
  std::string detail;
};

struct VerifyOptions {
  double orth_tol = 1e-9;
  double ledger_tol = 1e-8;
  std::size_t max_failures = 1000;
};

struct Verdict {
  bool pass = true;
  long steps = 0;
  long checks = 0;
  double min_step = 0.0;      // smallest non-freezing step (0 if none)
  double step_bound = 0.0;    // n / min_step^2 + n
  double sum_sq_steps = 0.0;
  std::vector<VerifyFailure> failures;
  long failure_count = 0;     // including those beyond max_failures

  const VerifyFailure* first(const std::string& invariant) const;
};

// Replays x(t) from the recorded directions and step lengths and checks, per
// step: unit direction, <delta, x(t)> = 0, support inside F(t), 0 < step <= L,
// |x| <= 1, the recorded freeze set, every before/after/budget ledger and
// every value/cap pair. With an instance and a Spencer trace it also
// recomputes the potential before each step. At the end: the final point and
// coloring, the step count bound n/L_min^2 + n, and sum step^2 <= n.
Verdict verify_trace(const WalkTrace& trace, const Instance* instance = nullptr,
                     const VerifyOptions& opts = {});

Verdict verify_trace_file(const std::filesystem::path& trace_path,
                          const std::optional<std::filesystem::path>& instance_path,
                          const VerifyOptions& opts = {});

}  // namespace discforge
