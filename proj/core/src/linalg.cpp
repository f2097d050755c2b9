// SPDX-License-Identifier: MIT

#include "fmmkit/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef FMMKIT_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace fmm {

namespace {

#ifdef FMMKIT_HAVE_LAPACKE
// Values-only SVD of a column-major matrix, in place (contents destroyed).
// Returns true on LAPACK success.
bool lapack_sv_inplace(Mat& A, Vec& sv) {
  lapack_int rows = static_cast<lapack_int>(A.rows());
  lapack_int cols = static_cast<lapack_int>(A.cols());
  sv.resize(std::min(A.rows(), A.cols()));
  lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, A.data(),
                                   rows, sv.data(), nullptr, 1, nullptr, 1);
  return info == 0;
}

// Tall A → R factor of its QR (square cols×cols, upper triangular).
bool lapack_qr_rfactor(Mat A, Mat& R) {
  lapack_int rows = static_cast<lapack_int>(A.rows());
  lapack_int cols = static_cast<lapack_int>(A.cols());
  Vec tau(std::min(A.rows(), A.cols()));
  lapack_int info = LAPACKE_dgeqrf(LAPACK_COL_MAJOR, rows, cols, A.data(),
                                   rows, tau.data());
  if (info != 0) return false;
  R = A.topRows(A.cols()).triangularView<Eigen::Upper>();
  return true;
}
#endif

Vec eigen_singular_values(const Mat& A) {
  if (A.rows() > A.cols() * 4 / 3) {
    // QR reduction first: SVD cost then depends on cols alone.
    Eigen::HouseholderQR<Mat> qr(A);
    Mat R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
    return Eigen::BDCSVD<Mat>(R).singularValues();
  }
  return Eigen::BDCSVD<Mat>(A).singularValues();
}

}  // namespace

Vec singular_values(const Mat& A) {
  if (A.size() == 0) return Vec(0);
  // Wide inputs: work on the transpose so the QR reduction applies.
  if (A.cols() > A.rows()) return singular_values(Mat(A.transpose()));
#ifdef FMMKIT_HAVE_LAPACKE
  Vec sv;
  if (A.rows() > A.cols() * 4 / 3) {
    Mat R;
    if (lapack_qr_rfactor(A, R) && lapack_sv_inplace(R, sv)) return sv;
  } else {
    Mat copy = A;
    if (lapack_sv_inplace(copy, sv)) return sv;
  }
  // fall through to Eigen on LAPACK failure
#endif
  return eigen_singular_values(A);
}

RankReport rank_from_singular_values(const Vec& sv, Index rows, Index cols,
                                     double rel_tol) {
  RankReport rep;
  rep.sv = sv;
  if (sv.size() == 0) {
    rep.gap = std::numeric_limits<double>::infinity();
    return rep;
  }
  rep.sigma_max = sv[0];
  if (rel_tol < 0.0) {
    rel_tol = static_cast<double>(std::max(rows, cols)) *
              std::numeric_limits<double>::epsilon();
  }
  rep.tol = rel_tol * rep.sigma_max;
  int r = 0;
  while (r < sv.size() && sv[r] > rep.tol) ++r;
  rep.rank = r;
  if (r == 0 || r == sv.size() || sv[r] == 0.0) {
    rep.gap = std::numeric_limits<double>::infinity();
  } else {
    rep.gap = sv[r - 1] / sv[r];
  }
  return rep;
}

RankReport numerical_rank(const Mat& A, double rel_tol) {
  return rank_from_singular_values(singular_values(A), A.rows(), A.cols(),
                                   rel_tol);
}

bool try_solve_spd(const Mat& A, const Vec& b, Vec& x) {
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) return false;
  x = llt.solve(b);
  return x.allFinite();
}

Mat inverse_checked(const Mat& A, double min_abs_det) {
  if (A.rows() != A.cols())
    throw UsageError("inverse_checked: matrix must be square");
  Eigen::PartialPivLU<Mat> lu(A);
  double det = lu.determinant();
  if (!std::isfinite(det) || std::abs(det) <= min_abs_det)
    throw NumericalError("inverse_checked: matrix is numerically singular (|det| = " +
                         std::to_string(std::abs(det)) + ")");
  return lu.inverse();
}

}  // namespace fmm
