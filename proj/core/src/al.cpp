// SPDX-License-Identifier: MIT

#include "fmmkit/al.hpp"

#include <algorithm>
#include <cmath>

namespace fmm {

MmtAlProblem::MmtAlProblem(const Dims& dims, int R)
    : dims_(dims), R_(R), tensor_(build_mmt(dims)) {
  if (R < 1) throw UsageError("MmtAlProblem: rank must be positive");
}

double MmtAlProblem::f(const Vec& x) {
  return pd_cost(unpack(dims_, R_, x), tensor_, &ws_);
}

Vec MmtAlProblem::grad_f(const Vec& x) {
  return pd_gradient(unpack(dims_, R_, x), tensor_, &ws_);
}

void MmtAlProblem::gn_f(const Vec& x, Mat& H) {
  pd_gauss_newton(unpack(dims_, R_, x), H);
}

Vec MmtAlProblem::residual_f(const Vec& x) {
  return pd_residual(unpack(dims_, R_, x), tensor_, &ws_);
}

Vec z_optimal(const Vec& x, const Vec& y2, double beta, const Vec& l,
              const Vec& u) {
  return (x + y2 / beta).cwiseMax(l).cwiseMin(u);
}

Vec box_residual(const Vec& x, const Vec& y2, double beta, const Vec& l,
                 const Vec& u) {
  Vec shifted = x + y2 / beta;
  return (shifted - u).cwiseMax(0.0) - (l - shifted).cwiseMax(0.0);
}

Vec augmented_residual(AlProblem& prob, const EqualityConstraint& con,
                       const Vec& x, const AlState& s) {
  Vec data = prob.residual_f(x) / std::sqrt(s.beta);
  Vec hshift = con.value(x) + s.y1 / s.beta;
  Vec box = box_residual(x, s.y2, s.beta, s.l, s.u);
  Vec out(data.size() + hshift.size() + box.size());
  out << data, hshift, box;
  return out;
}

double augmented_phi(AlProblem& prob, const EqualityConstraint& con,
                     const Vec& x, const AlState& s) {
  double data = prob.f(x) / s.beta;
  double hpart = 0.5 * (con.value(x) + s.y1 / s.beta).squaredNorm();
  double boxpart = 0.5 * box_residual(x, s.y2, s.beta, s.l, s.u).squaredNorm();
  return data + hpart + boxpart;
}

double augmented_objective(AlProblem& prob, const EqualityConstraint& con,
                           const Vec& x, const AlState& s) {
  return s.beta * augmented_phi(prob, con, x, s);
}

Vec augmented_gradient(AlProblem& prob, const EqualityConstraint& con,
                       const Vec& x, const AlState& s) {
  Vec g = prob.grad_f(x) / s.beta;
  Vec hshift = con.value(x) + s.y1 / s.beta;
  if (hshift.size() > 0) g += con.jt_apply(x, hshift);
  g += box_residual(x, s.y2, s.beta, s.l, s.u);
  return g;
}

void augmented_gauss_newton(AlProblem& prob, const EqualityConstraint& con,
                            const Vec& x, const AlState& s, Mat& H) {
  prob.gn_f(x, H);
  H /= s.beta;
  con.add_gram(x, H);
  // I_g: unit diagonal where the box residual is active (the box part of the
  // stacked residual has Jacobian rows e_iᵀ exactly there).
  Vec shifted = x + s.y2 / s.beta;
  for (Index i = 0; i < x.size(); ++i)
    if (shifted[i] < s.l[i] || shifted[i] > s.u[i]) H(i, i) += 1.0;
}

double lagrangian_value(AlProblem& prob, const EqualityConstraint& con,
                        const Vec& x, const Vec& z, const AlState& s) {
  Vec h = con.value(x);
  Vec xz = x - z;
  return prob.f(x) + s.y1.dot(h) + s.y2.dot(xz) +
         0.5 * s.beta * (h.squaredNorm() + xz.squaredNorm());
}

double shifted_feasibility(const EqualityConstraint& con, const Vec& x,
                           const AlState& s) {
  Vec hshift = con.value(x) + s.y1 / s.beta;
  Vec box = box_residual(x, s.y2, s.beta, s.l, s.u);
  return std::sqrt(hshift.squaredNorm() + box.squaredNorm());
}

double true_feasibility(const EqualityConstraint& con, const Vec& x,
                        const Vec& l, const Vec& u) {
  double h2 = con.value(x).squaredNorm();
  double box2 = (x - u).cwiseMax(0.0).squaredNorm() +
                (l - x).cwiseMax(0.0).squaredNorm();
  return std::sqrt(h2 + box2);
}

void multiplier_update(AlState& s, const EqualityConstraint& con,
                       const Vec& x) {
  Vec h = con.value(x);
  if (h.size() > 0) s.y1 += s.beta * h;
  s.y2 = (s.y2 + s.beta * (x - s.u)).cwiseMax(0.0) -
         (s.beta * (s.l - x) - s.y2).cwiseMax(0.0);
}

void AlConfig::validate() const {
  if (beta0 < 1.0) throw UsageError("AlConfig: beta0 must be >= 1");
  if (growth <= 1.0) throw UsageError("AlConfig: growth must be > 1");
  if (eta_bar > 1.0 || omega_bar > 1.0)
    throw UsageError("AlConfig: eta_bar and omega_bar must be <= 1");
  if (!(alpha_eta < std::min(1.0, alpha_omega)))
    throw UsageError("AlConfig: need alpha_eta < min(1, alpha_omega)");
  if (!(gamma_bar < 1.0)) throw UsageError("AlConfig: gamma_bar must be < 1");
  if (!(beta_eta < std::min(1.0, beta_omega)))
    throw UsageError("AlConfig: need beta_eta < min(1, beta_omega)");
  if (!(omega_star < 1.0 && eta_star < 1.0))
    throw UsageError("AlConfig: omega_star and eta_star must be < 1");
  if (upper < lower) throw UsageError("AlConfig: upper bound below lower");
}

AlResult al_search(AlProblem& prob, const EqualityConstraint& con,
                   const Vec& x0, const AlConfig& cfg) {
  cfg.validate();
  if (x0.size() != prob.dim())
    throw UsageError("al_search: x0 length does not match problem dimension");

  const Index n = prob.dim();
  AlResult res;
  res.state.beta = cfg.beta0;
  res.state.y1 = Vec::Zero(con.rows(n));
  res.state.y2 = Vec::Zero(n);
  res.state.l = Vec::Constant(n, cfg.lower);
  res.state.u = Vec::Constant(n, cfg.upper);
  res.x = x0;

  const int budget =
      cfg.budget >= 0 ? cfg.budget : cfg.outer_max * cfg.inner_iters;
  double stage = std::min(1.0 / cfg.beta0, cfg.gamma_bar);
  double eta = cfg.eta_bar * std::pow(stage, cfg.alpha_eta);
  double omega = cfg.omega_bar * std::pow(stage, cfg.alpha_omega);

  // Border-tracking diagnostic: consecutive penalty growths while the
  // data-fitting cost stalls and iterates press against the bounds.
  int consecutive_growth = 0;
  double last_cost = std::numeric_limits<double>::infinity();

  for (int outer = 1; outer <= cfg.outer_max; ++outer) {
    int remaining = budget - res.inner_iters_total;
    if (remaining <= 0) break;

    LmConfig inner = cfg.inner;
    inner.max_iters = std::min(cfg.inner_iters, remaining);
    // Inner target: the current forcing tolerance, with a floor that avoids
    // spinning on gradients below what double precision can resolve.
    inner.grad_tol = std::max(omega, 1e-15);
    inner.record_history = false;

    AugmentedLmProblem sub(prob, con, res.state);
    LmResult lm = lm_minimize(sub, res.x, inner);
    res.x = lm.x;
    res.inner_iters_total += lm.iters;
    res.outer_iters = outer;

    double fb = shifted_feasibility(con, res.x, res.state);
    double fcost = prob.f(res.x);
    bool feasible = fb < eta;

    res.history.push_back({outer, res.state.beta, fcost, fb, lm.grad_norm,
                           eta, omega, feasible, lm.iters});

    if (feasible) {
      consecutive_growth = 0;
      if (fb < cfg.eta_star && lm.grad_norm < cfg.omega_star) {
        res.converged = true;
        res.grad_norm = lm.grad_norm;
        break;
      }
      multiplier_update(res.state, con, res.x);
      eta *= std::pow(res.state.beta, -cfg.beta_eta);
      omega *= std::pow(res.state.beta, -cfg.beta_omega);
    } else {
      ++consecutive_growth;
      res.state.beta *= cfg.growth;
      eta = cfg.eta_bar * std::pow(cfg.gamma_bar, cfg.alpha_eta) *
            std::pow(res.state.beta, -cfg.alpha_eta);
      omega = cfg.omega_bar * std::pow(cfg.gamma_bar, cfg.alpha_omega) *
              std::pow(res.state.beta, -cfg.alpha_omega);
    }

    // Border suspicion: repeated growth, stalled cost, iterates at bounds.
    if (consecutive_growth >= 3 && fcost > 1e-12 &&
        std::abs(last_cost - fcost) < 0.01 * std::max(fcost, 1e-300)) {
      double reach = std::max(((res.x - res.state.l).cwiseAbs().minCoeff()),
                              0.0);  // distance to lower bound
      double reach_u = (res.state.u - res.x).cwiseAbs().minCoeff();
      if (std::min(reach, reach_u) < 1e-6 ||
          res.x.cwiseAbs().maxCoeff() >=
              0.98 * res.state.u.cwiseAbs().maxCoeff())
        res.border_rank_suspect = true;
    }
    last_cost = fcost;
    res.grad_norm = lm.grad_norm;
  }

  res.cost = prob.f(res.x);
  res.feas = true_feasibility(con, res.x, res.state.l, res.state.u);
  return res;
}

}  // namespace fmm
