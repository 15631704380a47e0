#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "discforge/types.hpp"

namespace discforge {

enum class Family {
  kGaussian,
  kHaar,
  kRegularSetSystem,
  kTwistedHypercube,
  kHadamard,
  kRademacher,
  kFile,
};

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

/// A real m x n discrepancy instance together with the metadata that the
/// colorers rely on as preconditions.
///
/// Invariants (checked by validate()):
///   - every entry is finite;
///   - max_j ||A^j||_2 <= col_norm_bound * (1 + 1e-9);
///   - if col_sparsity is set, no column has more nonzeros than it.
struct Instance {
  Mat entries;
  Family family = Family::kFile;
  std::uint64_t seed = 0;
  double col_norm_bound = 0.0;
  std::optional<int> col_sparsity;

  int rows() const { return static_cast<int>(entries.rows()); }
  int cols() const { return static_cast<int>(entries.cols()); }

  // Throws Error(kInvalidInstance) on the first violated invariant.
  void validate() const;

  // Stable 64-bit hash of shape and entries, used in reports.
  std::uint64_t fingerprint() const;
};

// Wraps a user matrix, deriving the tightest metadata from its entries.
Instance make_instance(Mat entries, Family family = Family::kFile, std::uint64_t seed = 0);

double max_column_norm(const Mat& a);
int max_column_nonzeros(const Mat& a);
int max_row_nonzeros(const Mat& a);

// --- generators -----------------------------------------------------------
// All generators are pure functions of (parameters, seed).

/// n x n matrix of i.i.d. N(0, 1/n) entries. Any column whose norm leaves
/// [0.8, 1.2] is redrawn, so the declared column bound is 1.2.
Instance gen_gaussian(int n, std::uint64_t seed);

/// Haar-distributed orthogonal n x n matrix (Gaussian matrix, Householder QR,
/// sign-corrected so that R has a positive diagonal).
Instance gen_haar(int n, std::uint64_t seed);

/// 0/1 incidence matrix of a random s-regular bipartite graph on n + n
/// vertices: configuration model, with duplicate edges repaired by random
/// double-edge swaps.
Instance gen_regular_system(int n, int s, std::uint64_t seed);

enum class TwistMode { kDeterministic, kRandom };

/// Adjacency matrix of a d-dimensional twisted hypercube (2^d vertices,
/// d-regular). Deterministic mode uses identity matchings, i.e. the ordinary
/// hypercube.
Instance gen_twisted_hypercube(int d, TwistMode mode, std::uint64_t seed);

/// Sylvester Hadamard matrix of order n (n a power of two), entries +-1.
Instance gen_hadamard(int n);

/// m x n matrix with i.i.d. uniform +-1 entries (the Spencer setting).
Instance gen_rademacher(int m, int n, std::uint64_t seed);

// --- persistence ------------------------------------------------------------
// <stem>.csv holds row-major entries with 17 significant digits;
// <stem>.meta.json holds {family, m, n, seed, col_norm_bound, col_sparsity}.

void save_instance(const Instance& inst, const std::filesystem::path& csv_path);
Instance load_instance(const std::filesystem::path& csv_path);
std::filesystem::path meta_path_for(const std::filesystem::path& csv_path);

// Plain numeric CSV matrix, no sidecar.
Mat read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const Mat& m, const std::filesystem::path& path);

// --- Haar moments -----------------------------------------------------------

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct HaarMoments {
  MomentEstimate m8;    // E[A11^8]
  MomentEstimate m44;   // E[A11^4 A12^4]
  MomentEstimate m2222; // E[A11^2 A12^2 A21^2 A22^2]
};

/// Monte-Carlo estimates of three eighth-order Haar moments. Each sample is
/// averaged over every index position the symmetry of the Haar measure
/// allows, and standard errors come from the spread of those per-sample
/// averages.
HaarMoments haar_moment_estimate(int n, int trials, std::uint64_t seed);

// Closed forms the estimates are compared against.
double haar_moment_8_exact(int n);
double haar_moment_44_exact(int n);
double haar_moment_2222_exact(int n);

}  // namespace discforge
