// SPDX-License-Identifier: MIT
//
// transforms.hpp — exactness-preserving transformations of decompositions and
// cheap invariants for telling decompositions apart.
//
// The invariance group of the <m,p,n> tensor acts on decompositions by
//  * sandwiching:  (U_r, V_r, W_r) → (P·U_r·Q⁻¹, Q·V_r·R⁻¹, R·W_r·P⁻¹)
//    for invertible P (m×m), Q (p×p), R (n×n),
//  * column scaling: (αu, βv, w/(αβ)),
//  * for cubic shapes additionally transposition and cyclic mode shifts.
// Every transform here maps exact decompositions to exact decompositions of
// the (possibly reoriented) tensor; fingerprints collect quantities invariant
// under the sandwich/scaling action to separate equivalence classes.

#pragma once

#include "fmmkit/mmt.hpp"
#include "fmmkit/rng.hpp"

#include <array>
#include <vector>

namespace fmm {

struct PqrTriple {
  Mat P, Q, R;  // m×m, p×p, n×n

  static PqrTriple identity(const Dims& d);
  // Gaussian entries, redrawn until every |det| exceeds min_abs_det.
  static PqrTriple random(const Dims& d, Rng& rng, double min_abs_det = 1e-2);
};

// Sandwich action; throws NumericalError when a matrix is numerically
// singular (|det| below the inversion threshold).
Pd pqr_transform(const Pd& pd, const PqrTriple& g);

// Column scaling with per-column factors α, β (w column scaled by 1/(αβ)).
Pd scale_columns(const Pd& pd, const Vec& alpha, const Vec& beta);

// Cubic shapes only: the transpose symmetry C = A·B ⟺ Cᵀ = Bᵀ·Aᵀ gives a new
// decomposition of the same tensor with factors (vec V_rᵀ, vec U_rᵀ, vec W_rᵀ).
Pd transpose_transform(const Pd& pd);

// Cubic shapes only: mode rotation (U,V,W) → (V,W,U) (Left) or (W,U,V)
// (Right); stays on the same tensor.
Pd cyclic_transform(const Pd& pd, Cycle c);

// Invariants of the sandwich + scaling action:
//  * traces tr(U_r·V_r·W_r), as a multiset (sorted ascending),
//  * ranks of the m×m products U_r·V_r·W_r, as a sorted multiset,
//  * per-term factor rank triples (rank U_r, rank V_r, rank W_r), sorted,
//  * the numerical rank of the Jacobian at the decomposition.
// No normalization is applied to the traces: they are already invariant
// under column scaling (the factors cancel) and under sandwiching (cyclic
// trace property), so raw values are comparable between equivalent
// decompositions.
struct Fingerprint {
  std::vector<double> traces;                    // sorted ascending
  std::vector<int> product_ranks;                // sorted ascending
  std::vector<std::array<int, 3>> factor_ranks;  // sorted lexicographically
  int jac_rank = 0;
};

Fingerprint fingerprint(const Pd& pd, double rank_rel_tol = -1.0);

// Trace multisets compared within trace_tol after sorting; all ranks exactly.
bool fingerprints_match(const Fingerprint& a, const Fingerprint& b,
                        double trace_tol = 1e-6);

// Necessary condition for the existence of an equivalent decomposition with
// entries in {−1, 0, 1}: all traces must be integers (they are invariant,
// and any discrete decomposition has integer traces).  Not sufficient.
struct DiscreteCheck {
  bool pass = false;
  double max_deviation = 0.0;  // max distance of a trace to nearest integer
  std::vector<double> traces;  // sorted
};

DiscreteCheck discretizable_necessary(const Pd& pd, double tol = 1e-6);

}  // namespace fmm
