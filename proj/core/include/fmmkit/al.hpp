// SPDX-License-Identifier: MIT
//
// al.hpp — bound-constrained augmented Lagrangian search for decompositions:
//
//   min ½‖F(x) − t‖²  subject to  h(x) = 0,  l ≤ x ≤ u.
//
// The box constraint is handled through a slack vector z with l ≤ z ≤ u and
// the coupling x = z; for fixed (x, y) the optimal slack is the closed form
// z* = clamp(x + y₂/β, l, u), which eliminates z from the subproblem.  With
//   box(x) := x − z* + y₂/β = [x + y₂/β − u]₊ − [l − x − y₂/β]₊
// the inner subproblem is the least-squares objective Φ(x) = ½‖F_β(x;y)‖²,
//   F_β = [ (1/√β)(F(x) − t);  h(x) + y₁/β;  box(x) ],
// whose constraint part h_β := [h + y₁/β; box] measures shifted feasibility.
// The augmented Lagrangian itself satisfies the identity
//   L_A(x, y, z*; β) = (β/2)‖F_β‖² − ‖y‖²/(2β),
// so minimizing Φ minimizes L_A over (x, z).  Outer iterations follow the
// classic first-order multiplier scheme: after an inner solve to gradient
// tolerance ω, a feasible result (‖h_β‖ < η) updates the multipliers and
// tightens (η, ω); an infeasible one grows β and resets them.

#pragma once

#include "fmmkit/constraints.hpp"
#include "fmmkit/lm.hpp"
#include "fmmkit/mmt.hpp"

#include <memory>
#include <vector>

namespace fmm {

// Smooth data-fitting part f(x) = ½‖F(x) − t‖² with structured derivatives.
struct AlProblem {
  virtual ~AlProblem() = default;
  virtual Index dim() const = 0;
  virtual double f(const Vec& x) = 0;
  virtual Vec grad_f(const Vec& x) = 0;
  virtual void gn_f(const Vec& x, Mat& H) = 0;  // Gauss–Newton of f
  virtual Vec residual_f(const Vec& x) = 0;     // F(x) − t
};

// Full (unstructured) polyadic decomposition of an <m,p,n> tensor.
class MmtAlProblem final : public AlProblem {
 public:
  MmtAlProblem(const Dims& dims, int R);

  Index dim() const override { return x_size(dims_, R_); }
  double f(const Vec& x) override;
  Vec grad_f(const Vec& x) override;
  void gn_f(const Vec& x, Mat& H) override;
  Vec residual_f(const Vec& x) override;

  const Dims& dims() const { return dims_; }
  int rank() const { return R_; }
  const MmTensor& tensor() const { return tensor_; }

 private:
  Dims dims_;
  int R_;
  MmTensor tensor_;
  EvalWorkspace ws_;
};

// Multiplier/penalty state.  l, u are elementwise bounds (broadcast from the
// scalar config values at setup).
struct AlState {
  Vec y1;       // multipliers of h(x) = 0
  Vec y2;       // multipliers of x = z (box coupling)
  double beta;  // penalty parameter
  Vec l, u;
};

// Optimal slack z* = clamp(x + y₂/β, l, u).
Vec z_optimal(const Vec& x, const Vec& y2, double beta, const Vec& l,
              const Vec& u);
// Signed box residual [x + y₂/β − u]₊ − [l − x − y₂/β]₊.
Vec box_residual(const Vec& x, const Vec& y2, double beta, const Vec& l,
                 const Vec& u);

// Stacked augmented residual F_β(x; y) (see header comment).
Vec augmented_residual(AlProblem& prob, const EqualityConstraint& con,
                       const Vec& x, const AlState& s);
// Inner objective Φ = ½‖F_β‖² (computed without forming the residual).
double augmented_phi(AlProblem& prob, const EqualityConstraint& con,
                     const Vec& x, const AlState& s);
// Outer objective (β/2)‖F_β‖².
double augmented_objective(AlProblem& prob, const EqualityConstraint& con,
                           const Vec& x, const AlState& s);
// ∇Φ = (1/β)∇f + Jhᵀ(h + y₁/β) + box(x).
Vec augmented_gradient(AlProblem& prob, const EqualityConstraint& con,
                       const Vec& x, const AlState& s);
// Gauss–Newton matrix of Φ: (1/β)JᵀJ + JhᵀJh + I_g, where I_g has unit
// diagonal exactly at the coordinates with active box residual.
void augmented_gauss_newton(AlProblem& prob, const EqualityConstraint& con,
                            const Vec& x, const AlState& s, Mat& H);
// Augmented Lagrangian L_A(x, y, z; β) at arbitrary slack z (for tests).
double lagrangian_value(AlProblem& prob, const EqualityConstraint& con,
                        const Vec& x, const Vec& z, const AlState& s);
// Shifted feasibility measure ‖[h + y₁/β; box]‖.
double shifted_feasibility(const EqualityConstraint& con, const Vec& x,
                           const AlState& s);
// Unshifted feasibility: ‖h‖ and the box violation, stacked norm.
double true_feasibility(const EqualityConstraint& con, const Vec& x,
                        const Vec& l, const Vec& u);
// First-order multiplier update at x (in place).
void multiplier_update(AlState& s, const EqualityConstraint& con,
                       const Vec& x);

// Adapter presenting Φ(·; y, β) to the inner LM solver.
class AugmentedLmProblem final : public LmProblem {
 public:
  AugmentedLmProblem(AlProblem& prob, const EqualityConstraint& con,
                     const AlState& s)
      : prob_(prob), con_(con), s_(s) {}
  Index dim() const override { return prob_.dim(); }
  double cost(const Vec& x) override { return augmented_phi(prob_, con_, x, s_); }
  Vec gradient(const Vec& x) override {
    return augmented_gradient(prob_, con_, x, s_);
  }
  void gauss_newton(const Vec& x, Mat& H) override {
    augmented_gauss_newton(prob_, con_, x, s_, H);
  }

 private:
  AlProblem& prob_;
  const EqualityConstraint& con_;
  const AlState& s_;
};

struct AlConfig {
  double beta0 = 10.0;  // initial penalty (must be ≥ 1)
  double growth = 2.0;  // β multiplier on infeasible outer rounds (> 1)
  double alpha_omega = 1.0, beta_omega = 1.0;
  double eta_bar = 1.0, omega_bar = 1.0;  // both ≤ 1
  double alpha_eta = 0.1;                 // < min(1, alpha_omega)
  double gamma_bar = 0.1;                 // < 1
  double beta_eta = 0.9;                  // < min(1, beta_omega)
  double omega_star = 1e-12;              // final gradient tolerance
  double eta_star = 1e-10;                // final feasibility tolerance
  int outer_max = 100;
  int inner_iters = 40;  // accepted LM steps per outer round
  int budget = -1;       // total inner LM steps; negative = outer_max·inner
  double lower = -1.0, upper = 1.0;  // box bounds (broadcast)
  LmConfig inner;                    // step/solve tolerances for inner LM

  void validate() const;  // throws UsageError on out-of-range parameters
};

struct AlOuterRow {
  int outer;
  double beta;
  double cost;       // f(x) (data-fitting part)
  double shifted_feas;
  double grad_norm;  // ‖∇Φ‖ at inner exit
  double eta, omega;
  bool multiplier_step;  // true: feasible branch; false: penalty grew
  int inner_iters;
};

struct AlResult {
  Vec x;
  double cost = 0.0;       // f(x) at exit
  double feas = 0.0;       // true (unshifted) feasibility at exit
  double grad_norm = 0.0;  // ‖∇Φ‖ at exit
  bool converged = false;
  // Heuristic: the iterates track a border (rank-deficient limit) solution —
  // variables pile up on the bounds while the data-fitting cost plateaus and
  // the penalty keeps growing.  Diagnostic only.
  bool border_rank_suspect = false;
  int outer_iters = 0;
  int inner_iters_total = 0;
  std::vector<AlOuterRow> history;
  AlState state;
};

AlResult al_search(AlProblem& prob, const EqualityConstraint& con,
                   const Vec& x0, const AlConfig& cfg);

}  // namespace fmm
