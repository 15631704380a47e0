#pragma once

#include "discforge/types.hpp"

namespace discforge {

// Orthonormal basis of a subspace of R^F. `basis` is |F| x dim, with rows in
// the order of `ambient`; embed() lifts it to R^n.
struct SubspaceBasis {
  IndexSet ambient;
  Mat basis;

  int dim() const { return static_cast<int>(basis.cols()); }
  int ambient_dim() const { return static_cast<int>(ambient.size()); }
  int codim() const { return ambient_dim() - dim(); }
  Mat embed(int n) const;
  // Largest |<b_i,b_j> - [i==j]|.
  double orthonormality_error() const;
};

inline constexpr double kRankTol = 1e-10;

SubspaceBasis full_space(const IndexSet& F);

// Restricts the columns of a (rows x n) matrix to F: rows x |F|.
Mat restrict_columns(const Mat& a, const IndexSet& F);
Vec restrict_vector(const Vec& v, const IndexSet& F);

// {v in R^F : <v, c> = 0 for every column c of `constraints` (|F| x c)}.
// Singular values below kRankTol * largest are dropped.
SubspaceBasis orth_complement_within(const IndexSet& F, const Mat& constraints);

// The part of `within` orthogonal to the columns of `constraints` (|F| x c).
SubspaceBasis complement_in(const SubspaceBasis& within, const Mat& constraints);

SubspaceBasis intersect(const SubspaceBasis& a, const SubspaceBasis& b);

// d-dimensional subspace of `within` spanned by the eigenvectors of
// R = sum_i w_i u_i u_i^T (restricted to `within`) with the smallest
// eigenvalues. Rows of `rows` are the u_i in F coordinates.
// If `eigenvalues` is given it receives the d smallest restricted eigenvalues.
SubspaceBasis bottom_eigs(const Vec& w, const Mat& rows, const SubspaceBasis& within, int d,
                          Vec* eigenvalues = nullptr);

// Top-`count` eigenvectors (|F| x count) of sum_i w_i u_i u_i^T.
Mat top_eigvecs(const Vec& w, const Mat& rows, int count);

// Constraint vectors (|F| x c) whose complement satisfies
//   sum_i w_i (sum_j B_ij d_j)^2 <= (1/alpha) sum_i w_i sum_j B_ij^2 d_j^2.
// Columns of sqrt(w) B are normalized to unit length, and D v is returned for
// each eigenvector v of the normalized Gram matrix with eigenvalue above
// 1/alpha (at most alpha |F| of them, since its trace is at most |F|).
Mat quadratic_subspace_constraints(const Vec& w, const Mat& b, double alpha);
SubspaceBasis quadratic_subspace(const Vec& w, const Mat& b, double alpha, const IndexSet& F);

// +delta if <g, delta> <= 0, otherwise -delta.
Vec sign_select(const Vec& g, const Vec& delta);

}  // namespace discforge
