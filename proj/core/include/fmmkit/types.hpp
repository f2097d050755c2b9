// SPDX-License-Identifier: MIT
//
// types.hpp — shared value types and conventions for the fmmkit library.
//
// Conventions used throughout:
//  * vec(A) stacks columns (column-major), matching Eigen's default layout.
//  * The <m,p,n> matrix-multiplication tensor has mode sizes (mp, pn, mn);
//    contracting it with vec(A) in mode 1 and vec(B) in mode 2 yields
//    vec((A·B)ᵀ) for A of size m×p and B of size p×n.
//  * A polyadic decomposition (Pd) of rank R stores factor matrices
//    U (mp×R), V (pn×R), W (mn×R); column r contributes the rank-one term
//    u_r ⊗ v_r ⊗ w_r.
//  * Flattened tensor entries are addressed first-index-fastest:
//    flat(i,j,k) = i + j·mp + k·mp·pn with 0-based i<mp, j<pn, k<mn.
//  * Optimization variables are stacked as x = [vec(U); vec(V); vec(W)].
//  * Reshapes of factor columns: reshape(u_r, m, p), reshape(v_r, p, n),
//    reshape(w_r, n, m) — note the transposed orientation of the W slice,
//    which makes reshape(w_r,n,m)ᵀ the contribution of product r to C = A·B.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmm {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy, mirrored by the CLI exit codes.
//   UsageError     → exit 1: malformed command lines / bad call arguments.
//   DataError      → exit 2: unreadable or inconsistent files and inputs.
//   NumericalError → exit 3: singular systems, overflow, failed convergence
//                    where the operation cannot return a meaningful result.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Problem shape <m,p,n>: C (m×n) = A (m×p) · B (p×n).
struct Dims {
  int m = 0, p = 0, n = 0;

  int mp() const { return m * p; }
  int pn() const { return p * n; }
  int mn() const { return m * n; }
  // Number of scalar multiplications of the naive algorithm; also the number
  // of unit entries of the <m,p,n> tensor.
  int mpn() const { return m * p * n; }
  Index tensor_len() const {
    return static_cast<Index>(mp()) * pn() * mn();
  }
  bool is_cubic() const { return m == p && p == n; }
  bool valid() const { return m > 0 && p > 0 && n > 0; }

  friend bool operator==(const Dims&, const Dims&) = default;

  std::string str() const {
    return std::to_string(m) + "x" + std::to_string(p) + "x" +
           std::to_string(n);
  }
};

// Number of free variables of a rank-R decomposition for the given shape.
inline Index x_size(const Dims& d, int R) {
  return static_cast<Index>(R) * (d.mp() + d.pn() + d.mn());
}

// Rank-R polyadic decomposition of the <m,p,n> tensor.
struct Pd {
  Dims dims;
  Mat U, V, W;  // mp×R, pn×R, mn×R

  int rank() const { return static_cast<int>(U.cols()); }

  // Throws DataError when factor shapes disagree with dims.
  void check() const;
};

// Pack factors into the stacked variable vector and back.
Vec pack(const Pd& pd);
Pd unpack(const Dims& dims, int R, const Vec& x);

// Sparse representation of the <m,p,n> tensor: the list of positions
// (i, j, k) of its unit entries, 0-based, i<mp, j<pn, k<mn.  All remaining
// entries are zero, so |ones| == mpn.
struct MmTensor {
  Dims dims;
  std::vector<std::array<int, 3>> ones;

  Index flat(int i, int j, int k) const {
    return i + static_cast<Index>(dims.mp()) * (j + static_cast<Index>(dims.pn()) * k);
  }
};

}  // namespace fmm
