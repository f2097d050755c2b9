// SPDX-License-Identifier: MIT

#include "fmmkit/lm.hpp"

#include "fmmkit/linalg.hpp"

#include <cmath>
#include <ostream>

namespace fmm {

const char* to_string(LmStatus s) {
  switch (s) {
    case LmStatus::GradConverged: return "grad_converged";
    case LmStatus::StepConverged: return "step_converged";
    case LmStatus::MaxIters: return "max_iters";
    case LmStatus::SolveFailed: return "solve_failed";
  }
  return "unknown";
}

LmResult lm_minimize(LmProblem& problem, const Vec& x0, const LmConfig& cfg) {
  if (x0.size() != problem.dim())
    throw UsageError("lm_minimize: x0 has length " + std::to_string(x0.size()) +
                     ", problem dimension is " + std::to_string(problem.dim()));
  const int max_solves =
      cfg.max_solves >= 0 ? cfg.max_solves : 20 * std::max(cfg.max_iters, 1);

  LmResult res;
  res.x = x0;
  double f = problem.cost(res.x);
  Vec g = problem.gradient(res.x);
  res.grad_norm = g.norm();

  Mat H;
  bool have_H = false;
  double mu = cfg.mu0;
  double nu = 2.0;
  int k = 0;

  auto record = [&](double mu_now) {
    if (cfg.record_history) res.history.push_back({k, f, res.grad_norm, mu_now});
  };

  // μ default: scaled to the curvature at the starting point.
  if (mu < 0.0) {
    problem.gauss_newton(res.x, H);
    have_H = true;
    double dmax = H.diagonal().maxCoeff();
    mu = 1e-3 * (dmax > 0.0 ? dmax : 1.0);
  }
  record(mu);

  while (true) {
    if (res.grad_norm < cfg.grad_tol) {
      res.status = LmStatus::GradConverged;
      break;
    }
    if (k >= cfg.max_iters || res.solves >= max_solves) {
      res.status = LmStatus::MaxIters;
      break;
    }
    if (!have_H) {
      problem.gauss_newton(res.x, H);
      have_H = true;
    }
    // Solve (H + μI)Δ = −g; on a failed factorization stiffen and retry.
    Mat Hd = H;
    Hd.diagonal().array() += mu;
    Vec step;
    bool ok = try_solve_spd(Hd, -g, step);
    ++res.solves;
    if (!ok) {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu)) {
        res.status = LmStatus::SolveFailed;
        break;
      }
      continue;
    }
    // Step-size stop: tiny Δ relative to ‖x‖ means the ascent has stalled;
    // the step is still taken (it cannot hurt: the model accepted it).
    double step_norm = step.norm();
    if (step_norm <= cfg.step_tol * (res.x.norm() + cfg.step_tol)) {
      res.x += step;
      f = problem.cost(res.x);
      g = problem.gradient(res.x);
      res.grad_norm = g.norm();
      ++k;
      record(mu);
      res.status = LmStatus::StepConverged;
      break;
    }
    double f_new = problem.cost(res.x + step);
    // Gain ratio: actual decrease over the decrease predicted by the local
    // model; the denominator ½Δᵀ(μΔ − g) is positive by construction.
    double denom = 0.5 * step.dot(mu * step - g);
    double rho = (f - f_new) / denom;
    if (std::isfinite(f_new) && rho > 0.0) {
      res.x += step;
      f = f_new;
      g = problem.gradient(res.x);
      res.grad_norm = g.norm();
      have_H = false;
      ++k;
      double shrink = 1.0 - std::pow(2.0 * rho - 1.0, 3);
      mu *= std::max(1.0 / 3.0, shrink);
      nu = 2.0;
      record(mu);
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu)) {
        res.status = LmStatus::SolveFailed;
        break;
      }
    }
  }

  res.cost = f;
  res.mu = mu;
  res.iters = k;
  return res;
}

void write_history_csv(std::ostream& os, const std::vector<LmHistoryRow>& h) {
  os << "iter,cost,grad_norm,mu\n";
  char buf[128];
  for (const auto& row : h) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", row.iter,
                  row.cost, row.grad_norm, row.mu);
    os << buf;
  }
}

}  // namespace fmm
