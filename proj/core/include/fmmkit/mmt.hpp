// SPDX-License-Identifier: MIT
//
// mmt.hpp — the <m,p,n> matrix-multiplication tensor and polyadic
// decompositions of it: evaluation, derivatives, rank diagnostics, and the
// block-recursive application of a decomposition as a fast multiplication
// algorithm.
//
// The tensor is binary with exactly mpn unit entries; a rank-R decomposition
// reproduces it when, for every pair (A, B), the bilinear algorithm
//   C = Σ_r ⟨u_r, vec(A)⟩ · ⟨v_r, vec(B)⟩ · reshape(w_r, n, m)ᵀ
// equals A·B.  The least-squares objective used by the solvers is
//   f(x) = ½ ‖F(x) − vec(T)‖²,  F(x) = Σ_r w_r ⊗ v_r ⊗ u_r,
// with x = [vec(U); vec(V); vec(W)] (see types.hpp for index conventions).

#pragma once

#include "fmmkit/linalg.hpp"
#include "fmmkit/types.hpp"

namespace fmm {

// Positions of the unit entries of the <m,p,n> tensor.
MmTensor build_mmt(const Dims& dims);

// Dense vec(T), length dims.tensor_len().
Vec vec_tensor(const MmTensor& t);

// Mode-1/mode-2 contraction with vec(A) and vec(B): returns vec((A·B)ᵀ),
// length mn.  Cost O(mpn) using the sparse unit-entry list.
Vec contract(const MmTensor& t, const Vec& vecA, const Vec& vecB);

// Reusable buffers for repeated evaluation at fixed (dims, R).
struct EvalWorkspace {
  Mat UV;  // mp·pn × R, column r = vec(u_r v_rᵀ)
  Vec F;   // tensor_len
  Mat MU;  // mp·pn × R, gradient intermediate
  Mat GW;  // mn × R
  void ensure(const Dims& dims, int R);
};

// F(x) − vec(T), length tensor_len.
Vec pd_residual(const Pd& pd, const MmTensor& t, EvalWorkspace* ws = nullptr);

// ½‖F(x) − vec(T)‖².
double pd_cost(const Pd& pd, const MmTensor& t, EvalWorkspace* ws = nullptr);

// Gradient of the cost with respect to x, length x_size(dims, R).
Vec pd_gradient(const Pd& pd, const MmTensor& t, EvalWorkspace* ws = nullptr);
// Same, reusing an already computed residual (residual laid out as returned
// by pd_residual for this pd).
Vec pd_gradient_from_residual(const Pd& pd, const Vec& residual,
                              EvalWorkspace* ws = nullptr);

// Dense Jacobian ∂F/∂x, (mpn)² rows × x_size columns.  Row (i,j,k) of block
// column (U, r, i′) holds δ_{ii′} v_r(j) w_r(k), and cyclically for V, W.
Mat pd_jacobian(const Pd& pd);

// Gauss–Newton matrix JᵀJ assembled from its closed Kronecker block form in
// O(R²·(mp+pn+mn)²) — never forms J.  Blocks, with C_U = UᵀU etc.:
//   (U,r),(U,s): C_W(r,s)·C_V(r,s)·I                (and cyclically V, W)
//   (U,r),(V,s): C_W(r,s)·u_s v_rᵀ
//   (U,r),(W,s): C_V(r,s)·u_s w_rᵀ
//   (V,r),(W,s): C_U(r,s)·v_s w_rᵀ
void pd_gauss_newton(const Pd& pd, Mat& H);

// Numerical rank of the Jacobian at pd.  rel_tol < 0 selects the default of
// max(rows,cols)·eps relative to σ_max.  The rank of a decomposition's
// Jacobian is invariant under the equivalence transformations in
// transforms.hpp and counts (rank-deficiency many) internal degrees of
// freedom, which makes it a cheap isomorphism-class invariant.
RankReport jacobian_rank(const Pd& pd, double rel_tol = -1.0);

// Run the bilinear algorithm once: R scalar products ⟨u_r,vec(A)⟩⟨v_r,vec(B)⟩
// combined into C = A·B (m×n).  When mult_count is given it is increased by
// the number of scalar multiplications of the *products* stage (= R).
Mat apply_pd(const Pd& pd, const Mat& A, const Mat& B,
             long long* mult_count = nullptr);

// Apply the decomposition recursively for `levels` levels of block splitting:
// A must be m^levels × p^levels and B accordingly.  levels == 1 is apply_pd.
// The products-stage multiplication count accumulates to R^levels.
Mat apply_recursive(const Pd& pd, const Mat& A, const Mat& B, int levels,
                    long long* mult_count = nullptr);

// Tensor (Kronecker) product of two decompositions: a rank R₁R₂ decomposition
// of the <m₁m₂, p₁p₂, n₁n₂> tensor, the algebraic form of "run algorithm 1 on
// blocks, algorithm 2 inside the blocks".  Column order: (r,s) ↦ r·R₂+s.
Pd pd_kron(const Pd& a, const Pd& b);

// Cyclic permutations of the tensor modes.  Left: <m,p,n> → <p,n,m> with
// factors (U,V,W) → (V,W,U); Right is the inverse (two lefts).
enum class Cycle { None, Left, Right };
Pd permute_pd(const Pd& pd, Cycle c);

// Transpose map <m,p,n> → <m,n,p>: U′_r = vec(W_rᵀ), V′_r = vec(V_rᵀ),
// W′_r = vec(U_rᵀ), built from (A·B)ᵀ = Bᵀ·Aᵀ.  Together with the cyclic
// maps this reaches all six orientations of a given shape.
Pd transpose_family_pd(const Pd& pd);

}  // namespace fmm
