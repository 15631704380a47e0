#pragma once

#include <cstdint>

#include "discforge/types.hpp"
#include "discforge/walk.hpp"

namespace discforge {

// Q with its rows rotated into the eigenbasis of B.
struct EllipsoidInstance {
  Mat q;        // original Q
  Mat b;        // original B
  Vec d;        // eigenvalues of B, descending, entries below 1e-12 d(0) clamped to 0
  Mat q_rot;    // V^T Q, rows in the order of d
};

// Checks column norms of Q (<= 1) and B symmetric PSD within 1e-9.
EllipsoidInstance make_ellipsoid_instance(const Mat& q, const Mat& b);

struct EllipsoidPair {
  Mat q;
  Mat b;
};

// Q with i.i.d. Gaussian columns normalized to unit length; B = U D U^T with
// U Haar and D = diag(1, 1/2, 1/4, ...).
EllipsoidPair gen_ellipsoid_geometric(int n, std::uint64_t seed);

// ||z||_B = sqrt(<z, B z>), with tiny negative rounding clamped to 0.
double b_norm(const Mat& b, const Vec& z);

// Removes rows 1..floor(k/2)-1 of the rotated Q, then returns the bottom-2
// eigenspace of sum_i Q_i Q_i^T over the remaining rows.
class EllipsoidOracle final : public Oracle {
 public:
  explicit EllipsoidOracle(const EllipsoidInstance& inst) : inst_(inst) {}

  OracleResult query(const PartialColoring& x) override;
  void on_step(const PartialColoring& before, const Vec& delta, double step,
               const PartialColoring& after, Diagnostics& out) override;
  int undefined_threshold() const override { return 4; }

  double value_sq(const Vec& x) const;  // ||Q x||_B^2 in the rotated basis
  double ledger_total() const { return ledger_; }
  double max_increase_ratio() const { return max_ratio_; }

 private:
  const EllipsoidInstance& inst_;
  double d_half_ = 0.0;  // D_{floor(k/2)} at the last query
  double ledger_ = 0.0;
  double max_ratio_ = 0.0;
};

struct EllipsoidOptions {
  double L = 0.5;
  bool record_trace = false;
};

struct EllipsoidRun {
  Vec coloring;
  double value = 0.0;          // ||Q x||_B with the original Q and B
  double value_rotated = 0.0;  // same quantity after diagonalization
  double trace_b = 0.0;
  double constant = 0.0;       // value^2 / Tr B
  double ledger = 0.0;         // summed per-step increase budgets
  double max_increase_ratio = 0.0;  // max of increase / (D_{floor(k/2)} step^2), <= 8
  double certified = 0.0;
  long steps = 0;
  WalkResult walk;
};

EllipsoidRun ellipsoid_color(const Mat& q, const Mat& b, const EllipsoidOptions& opts = {});

}  // namespace discforge
