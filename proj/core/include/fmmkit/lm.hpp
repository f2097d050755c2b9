// SPDX-License-Identifier: MIT
//
// lm.hpp — damped Gauss–Newton (Levenberg–Marquardt) minimization of
// nonlinear least-squares objectives f(x) = ½‖F(x)‖².
//
// The solver sees the problem only through cost / gradient / Gauss–Newton
// callbacks, so structured problems can supply JᵀJ without ever forming the
// Jacobian (see pd_gauss_newton); ResidualProblem adapts the plain
// residual-plus-Jacobian formulation.
//
// Iteration: solve (JᵀJ + μI)Δ = −∇f, accept when the gain ratio
// ρ = (f(x) − f(x+Δ)) / (½Δᵀ(μΔ − ∇f)) is positive (the denominator is
// positive by construction), then shrink μ by max(1/3, 1 − (2ρ−1)³); on
// rejection grow μ by ν and double ν.  Iteration counts accepted steps.

#pragma once

#include "fmmkit/types.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace fmm {

struct LmProblem {
  virtual ~LmProblem() = default;
  virtual Index dim() const = 0;
  virtual double cost(const Vec& x) = 0;
  virtual Vec gradient(const Vec& x) = 0;
  // Gauss–Newton approximation of the Hessian (JᵀJ, positive semidefinite).
  virtual void gauss_newton(const Vec& x, Mat& H) = 0;
};

// Adapter for problems given as residual and Jacobian callbacks.
class ResidualProblem final : public LmProblem {
 public:
  using ResidualFn = std::function<Vec(const Vec&)>;
  using JacobianFn = std::function<Mat(const Vec&)>;

  ResidualProblem(Index dim, ResidualFn residual, JacobianFn jacobian)
      : dim_(dim), residual_(std::move(residual)), jacobian_(std::move(jacobian)) {}

  Index dim() const override { return dim_; }
  double cost(const Vec& x) override { return 0.5 * residual_(x).squaredNorm(); }
  Vec gradient(const Vec& x) override {
    return jacobian_(x).transpose() * residual_(x);
  }
  void gauss_newton(const Vec& x, Mat& H) override {
    Mat J = jacobian_(x);
    H.noalias() = J.transpose() * J;
  }

 private:
  Index dim_;
  ResidualFn residual_;
  JacobianFn jacobian_;
};

struct LmConfig {
  // Initial damping; negative selects 1e-3 · max diagonal of JᵀJ at x0.
  double mu0 = -1.0;
  double grad_tol = 1e-12;  // stop when ‖∇f‖ drops below this
  double step_tol = 1e-15;  // stop when ‖Δx‖ ≤ step_tol·(‖x‖ + step_tol)
  int max_iters = 200;      // budget of accepted steps
  // Safety cap on linear solves (an accepted step may be preceded by several
  // rejected trials); negative selects 20·max_iters.
  int max_solves = -1;
  bool record_history = true;
};

enum class LmStatus { GradConverged, StepConverged, MaxIters, SolveFailed };

const char* to_string(LmStatus s);

struct LmHistoryRow {
  int iter;  // accepted-step counter
  double cost;
  double grad_norm;
  double mu;
};

struct LmResult {
  Vec x;
  double cost = 0.0;
  double grad_norm = 0.0;
  double mu = 0.0;  // damping at exit
  LmStatus status = LmStatus::MaxIters;
  int iters = 0;   // accepted steps
  int solves = 0;  // linear systems solved (accepted + rejected trials)
  std::vector<LmHistoryRow> history;
};

LmResult lm_minimize(LmProblem& problem, const Vec& x0,
                     const LmConfig& cfg = {});

// CSV with header iter,cost,grad_norm,mu — one row per accepted iterate,
// for offline inspection of plateaus and swamps.
void write_history_csv(std::ostream& os, const std::vector<LmHistoryRow>& h);

}  // namespace fmm
