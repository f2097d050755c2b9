// SPDX-License-Identifier: MIT
//
// linalg.hpp — dense factorization helpers shared by the solvers.
//
// The heavy operation in this library is the numerical rank of tall
// Jacobians (up to a few thousand columns).  singular_values() reduces tall
// inputs by a QR factorization first and computes values-only SVD of the
// square triangular factor; with the LAPACKE backend enabled this runs
// dgeqrf + dgesdd, otherwise Eigen's HouseholderQR + BDCSVD.

#pragma once

#include "fmmkit/types.hpp"

namespace fmm {

// Singular values of A in descending order.
Vec singular_values(const Mat& A);

struct RankReport {
  int rank = 0;
  double tol = 0.0;        // absolute threshold actually applied
  double sigma_max = 0.0;  // largest singular value
  // Gap σ_rank / σ_rank+1 across the threshold; +inf when rank is full or
  // the trailing value is exactly zero.  A healthy rank decision has a gap
  // of several orders of magnitude.
  double gap = 0.0;
  Vec sv;  // all singular values, descending
};

// Counts singular values above tol.  rel_tol < 0 selects the default
// max(rows, cols) · eps · σ_max.  The absolute threshold used is reported.
RankReport rank_from_singular_values(const Vec& sv, Index rows, Index cols,
                                     double rel_tol = -1.0);

// Convenience: singular_values + rank_from_singular_values.
RankReport numerical_rank(const Mat& A, double rel_tol = -1.0);

// Solve A x = b for symmetric positive definite A via Cholesky.  Returns
// false when the factorization fails (A not numerically positive definite).
bool try_solve_spd(const Mat& A, const Vec& b, Vec& x);

// Inverse of a square matrix; throws NumericalError when |det| <= min_abs_det.
Mat inverse_checked(const Mat& A, double min_abs_det = 1e-8);

}  // namespace fmm
