// SPDX-License-Identifier: MIT
//
// cs.hpp — cyclic-symmetric (CS) decompositions of cubic tensors <m,m,m>.
//
// The tensor is invariant under the mode rotation (U,V,W) → (V,W,U); a CS
// decomposition makes the symmetry explicit with S symmetric terms a⊗a⊗a and
// T orbit triples (b,d,c), (c,b,d), (d,c,b), so rank R = S + 3T.  Expansion
// into an ordinary decomposition uses the fixed column layout
//   U = [A B C D],  V = [A D B C],  W = [A C D B]
// (blocks: A is m²×S, B/C/D are m²×T), whose mode rotation is exactly a
// column permutation.  The reduced variable vector is
//   ξ = [vec A; vec B; vec C; vec D],  length m²(S + 3T),
// and every full variable copies exactly one reduced variable, so reduced
// derivatives are obtained by summing full ones over the duplication map.

#pragma once

#include "fmmkit/al.hpp"
#include "fmmkit/mmt.hpp"
#include "fmmkit/rng.hpp"

#include <vector>

namespace fmm {

struct CsPd {
  int m = 0;
  Mat A, B, C, D;  // m²×S, m²×T, m²×T, m²×T

  int S() const { return static_cast<int>(A.cols()); }
  int T() const { return static_cast<int>(B.cols()); }
  int rank() const { return S() + 3 * T(); }
  Dims dims() const { return {m, m, m}; }
  void check() const;  // throws DataError on inconsistent shapes
};

// Expansion with the fixed column layout above.
Pd expand_cs(const CsPd& cs);

// Reduced variables ξ = [vec A; vec B; vec C; vec D].
Vec cs_pack(const CsPd& cs);
CsPd cs_unpack(int m, int S, int T, const Vec& xi);
Index cs_size(int m, int S, int T);

// map[full_index] = reduced_index for x = pack(expand_cs(ξ)); every full
// variable of the expanded decomposition copies exactly one reduced one.
std::vector<Index> cs_duplication_map(int m, int S, int T);

Vec cs_residual(const CsPd& cs, const MmTensor& t, EvalWorkspace* ws = nullptr);
double cs_cost(const CsPd& cs, const MmTensor& t, EvalWorkspace* ws = nullptr);
// Reduced gradient: entries of the full gradient summed over the map.
Vec cs_gradient(const CsPd& cs, const MmTensor& t, EvalWorkspace* ws = nullptr);
// Dense reduced Jacobian: columns of the full Jacobian summed over the map.
Mat cs_jacobian(const CsPd& cs);
// Reduced Gauss–Newton matrix DᵀJᵀJD via the structured full JᵀJ.
void cs_gauss_newton(const CsPd& cs, Mat& H);

// AlProblem over reduced variables (for constrained searches in CS form).
class CsAlProblem final : public AlProblem {
 public:
  CsAlProblem(int m, int S, int T);

  Index dim() const override { return cs_size(m_, S_, T_); }
  double f(const Vec& xi) override;
  Vec grad_f(const Vec& xi) override;
  void gn_f(const Vec& xi, Mat& H) override;
  Vec residual_f(const Vec& xi) override;

  int m() const { return m_; }
  int S() const { return S_; }
  int T() const { return T_; }

 private:
  int m_, S_, T_;
  MmTensor tensor_;
  EvalWorkspace ws_;
  Mat Hfull_;
};

struct CsSearchConfig {
  std::uint64_t seed = 0;
  int starts = 50;
  double init_scale = 0.5;   // Gaussian start scale on ξ
  bool discrete = false;     // add h(ξ) = ξ³ − ξ to force {−1,0,1} entries
  double success_cost = 1e-20;  // f threshold that counts as an exact find
  AlConfig al;               // bounds, tolerances, budget per start
};

struct CsStartReport {
  int start = 0;
  double cost = 0.0;
  double feas = 0.0;
  bool success = false;
  int inner_iters = 0;
};

struct CsSearchResult {
  CsPd best;
  double best_cost = 0.0;
  int successes = 0;
  std::vector<CsStartReport> per_start;
};

// Multi-start AL search for a CS decomposition with the given (S, T).
// Start k draws from the independent child stream (seed, k), so results do
// not depend on evaluation order.
CsSearchResult cs_search(int m, int S, int T, const CsSearchConfig& cfg);

}  // namespace fmm
