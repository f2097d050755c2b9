// SPDX-License-Identifier: MIT
//
// stability.hpp — numerical-quality measures of a decomposition used as a
// fast multiplication algorithm, and a derivative-free optimizer that tunes
// family parameters for them.
//
// For output entry i (row i of W, i.e. C entry (a,b) with i = b + a·n):
//  * growth factor  q_i = ‖W(i,:)‖₀ + max{ nnz(u_r) + nnz(v_r) : W(i,r) ≠ 0 }
//    — a support-size proxy for error growth; q = max_i q_i.
//  * error weight   e_i = Σ_r ‖u_r‖₁·‖v_r‖₁·|W(i,r)| — the coefficient of
//    the first-order forward error bound; e = max_i e_i.
// Column permutations and exactness-preserving column scalings leave both
// measures unchanged (each term of e carries the scale product |α·β·γ| = 1),
// but mode rotations swap which factor plays the role of W, and moving along
// a parametric family changes the entry values themselves — those are the
// levers the optimizer has.  Rounding entries to powers of two keeps a
// dyadic algorithm exactly representable, trading a little e for exact
// binary arithmetic.

#pragma once

#include "fmmkit/family.hpp"
#include "fmmkit/mmt.hpp"
#include "fmmkit/rng.hpp"

#include <vector>

namespace fmm {

struct StabilityReport {
  int q = 0;
  double e = 0.0;
  int q_argmax = 0;      // output row attaining q
  int e_argmax = 0;      // output row attaining e
  std::vector<int> row_q;
  Vec row_e;
  double zero_tol = 0.0;
};

int q_factor(const Pd& pd, double zero_tol = 1e-9);
double e_factor(const Pd& pd, double zero_tol = 1e-9);
StabilityReport stability_report(const Pd& pd, double zero_tol = 1e-9);

// Nearest power of two with the sign preserved: sign(v)·2^round(log2|v|),
// ties (exact midpoints in log scale) toward the smaller exponent; 0 ↦ 0.
double round_pow2(double v);
Pd round_pow2(const Pd& pd);

struct StabOptConfig {
  std::uint64_t seed = 0;
  int budget = 2000;          // total objective evaluations
  int restarts = 8;           // random restarts around/beyond the best point
  double simplex_scale = 0.25;
  double min_margin = 1e-3;   // exclusion margin below which a point is
                              // penalized as inadmissible
  double zero_tol = 1e-9;
  double residual_guard = 1e-6;  // optimized points must stay this exact
};

struct StabOptResult {
  Vec params;        // best parameters found
  double e = 0.0;    // e-factor at best
  int q = 0;
  int evals = 0;
  double residual = 0.0;  // decomposition residual norm at best (guard)
  // Best point after rounding every factor entry to a power of two, when the
  // rounded decomposition still multiplies exactly; e_pow2 < 0 otherwise.
  Vec params_pow2;
  double e_pow2 = -1.0;
  int q_pow2 = 0;
  bool pow2_exact = false;
};

// Derivative-free minimization of e(params) over the family's admissible
// set (Nelder–Mead with random restarts; inadmissible points get a large
// penalty).  Exactness is rechecked at the optimum against the tensor.
StabOptResult optimize_family_stability(const FamilyDef& def, const Vec& init,
                                        const StabOptConfig& cfg);

}  // namespace fmm
