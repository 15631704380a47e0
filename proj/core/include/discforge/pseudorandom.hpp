#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "discforge/instance.hpp"
#include "discforge/regmax.hpp"
#include "discforge/walk.hpp"

namespace discforge {

inline constexpr double kKomlosK = 9.0;
inline constexpr double kKomlosEps = 0.19;
inline constexpr int kKomlosThreshold = 64;

/// lambda(A) = sup { ||B u|| : ||u|| = 1, <u,1> = 0 } with B = A∘A, i.e. the
/// top singular value of B P where P projects off the all-ones vector.
/// Block power iteration on P B^T B P with Rayleigh-Ritz extraction and a
/// seeded start block; stops when the top Ritz value moves by less than
/// tol (relative). Values below 1e-13 ||B||_F are reported as 0.
double lambda_param(const Mat& a, double tol = 1e-12, std::uint64_t seed = 0);

// Group index of a row with total squared mass `mass`: 0 if mass <= 1,
// otherwise the r with mass in (2^{r-1}, 2^r].
int row_group_index(double mass);
// groups[r] lists the rows of R_r; the vector has max(ceil(log2 n), max r) + 1 entries.
std::vector<IndexSet> row_groups(const Mat& a);

struct PseudoState {
  int n = 0;
  double lambda = 0.0;      // lambda(A), used for the 8 lambda exit threshold
  double lambda_eff = 0.0;  // max(lambda, 1/log n), used for eta only
  double eta = 0.0;         // sqrt(log n / lambda_eff)
  double K = kKomlosK;
  double eps = kKomlosEps;

  Vec total_mass;
  std::vector<int> group;  // row -> r
  std::vector<IndexSet> groups;
  Mat b;                   // thresholded A
  Mat b_sq;                // b∘b

  std::vector<char> in_p;  // row still pseudorandom
  std::vector<long> exit_step;
  Vec anchor_value;        // <A_i, x(t_i)> once the row left P
  std::vector<int> snapshot_of;  // row -> index into snapshots, -1 while in P
  std::vector<Vec> snapshots;    // distinct x(t_i)
  std::vector<int> exit_thresholded;  // #{j in F(t_i) : A_ij != B_ij}

  Vec restricted_mass;     // sum_{j in F} A_ij^2 at the last update
  IndexSet exceptional;    // I(t)
  long updated_at = -1;

  int count_in_p() const;
};

PseudoState make_pseudo_state(const Instance& a, std::optional<double> lambda = std::nullopt,
                              double tol = 1e-12);

// Moves rows out of P (recording t_i, anchor and x(t_i)) and recomputes I(t).
// Throws kInvariantViolation if |I| > |F|/16.
void pseudo_state_update(PseudoState& state, const Mat& a, const PartialColoring& x);

// Phi_r(x) over the 2|R_r| doubled rows of group r.
RegParams phi_params(int n, int r);
Vec phi_proxy(const PseudoState& state, const Mat& a, int r, const Vec& x);

// Psi(x) = smax_eta(pi'(x)) over 2n doubled rows (zeros for rows in P).
Vec psi_proxy(const PseudoState& state, const Vec& x);
double psi_value(const PseudoState& state, const Vec& x);

struct KomlosCodim {
  int phi = 0;
  int phi_cap = 0;
  int psi = 0;
  int psi_cap = 0;
};

class KomlosOracle final : public Oracle {
 public:
  KomlosOracle(const Instance& a, PseudoState state);

  OracleResult query(const PartialColoring& x) override;
  double accept_step(const PartialColoring& x, const Vec& delta, double proposed) override;
  void on_step(const PartialColoring& before, const Vec& delta, double step,
               const PartialColoring& after, Diagnostics& out) override;
  int undefined_threshold() const override { return kKomlosThreshold; }

  const PseudoState& state() const { return state_; }
  int num_groups() const { return static_cast<int>(state_.groups.size()); }
  double phi(int r, const Vec& x) const;
  const KomlosCodim& last_codim() const { return codim_; }
  int max_codim_excess() const { return max_codim_excess_; }
  long backtracks() const { return backtracks_; }
  double max_psi_increase() const { return max_psi_increase_; }
  const std::vector<double>& phi_ledger() const { return phi_ledger_; }

 private:
  const Mat& a_;
  PseudoState state_;
  std::vector<RegEval> phi_eval_;  // per group, at the current x
  std::vector<char> phi_active_;   // r <= R0*
  double psi_now_ = 0.0;
  KomlosCodim codim_;
  int max_codim_excess_ = 0;
  long backtracks_ = 0;
  double max_psi_increase_ = 0.0;
  std::vector<double> phi_ledger_;  // per group, summed step budgets
};

struct KomlosOptions {
  double L = 0.5;
  double tol = 1e-12;
  std::optional<double> lambda;  // skips the power iteration when set
  bool record_trace = false;
};

struct KomlosRun {
  Vec coloring;
  double discrepancy = 0.0;
  double lambda = 0.0;
  double lambda_eff = 0.0;
  double eta = 0.0;
  double psi_start = 0.0;
  double psi_end = 0.0;
  double psi_start_bound = 0.0;  // sqrt(lambda_eff log n) * log(2n)/log n
  double max_psi_increase = 0.0; // over steps; <= 1e-8 expected
  std::vector<double> phi_start;
  std::vector<double> phi_end;
  double max_phi_increase = 0.0; // max_r Phi_r(T) - Phi_r(0)
  std::vector<double> phi_ledger;
  double max_phi_ledger = 0.0;
  double max_anchor = 0.0;
  double max_anchor_excess = 0.0;     // max_i |anchor_i| - Phi_{r(i)}(T)
  double max_threshold_error = 0.0;   // max_i |<A_i - B_i, x(T) - x(t_i)>|
  double max_quad_correction = 0.0;   // max_i sum_j B_ij^2 (x_j(T) - x_j(t_i))^2
  double max_quad_correction_ratio = 0.0;  // ... / (4 sum_j B_ij^2), <= 1
  int max_threshold_count = 0;        // max_i #{j in F(t_i) : A_ij != B_ij}
  double threshold_count_cap = 0.0;
  int rows_left_p = 0;
  double rounding = 0.0;
  double certified = 0.0;
  int max_codim_excess = 0;
  long steps = 0;
  long backtracks = 0;
  WalkResult walk;
};

// Square A with column norms within its declared bound.
KomlosRun komlos_color(const Instance& a, const KomlosOptions& opts = {});

struct BeckFialaRun {
  KomlosRun komlos;  // on A / sqrt(s)
  int s = 0;
  double lambda = 0.0;        // lambda(A)
  double lambda_scaled = 0.0; // lambda(A / sqrt(s)) = lambda(A) / s
  double discrepancy = 0.0;   // ||A x||_inf in original units
  double cert_sqrt = 0.0;     // sqrt(s) (1 + sqrt(lambda' log n))
  double cert_linear = 0.0;   // sqrt(s) (1 + lambda' sqrt(s)) = sqrt(s) + lambda
  double reference = 0.0;     // sqrt(s) + min(sqrt(lambda log n), lambda)
};

// Entries in {0, +-1}; s is the column sparsity.
BeckFialaRun beck_fiala_color(const Instance& a, const KomlosOptions& opts = {});

}  // namespace discforge
