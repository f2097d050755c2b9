// SPDX-License-Identifier: MIT
//
// The damped Gauss–Newton solver on textbook problems with known answers,
// plus a refinement run on a perturbed exact decomposition.

#include "fmmkit/catalog.hpp"
#include "fmmkit/lm.hpp"
#include "fmmkit/mmt.hpp"
#include "fmmkit/rng.hpp"
#include "fmmkit/seeding.hpp"

#include "doctest.h"
#include "test_support.hpp"

#include <sstream>

using namespace fmm;

TEST_SUITE_BEGIN("lm");

namespace {

// Rosenbrock as a two-residual least-squares problem:
// F = (10(x2 − x1²), 1 − x1), minimum f = 0 at (1,1).
ResidualProblem rosenbrock() {
  return ResidualProblem(
      2,
      [](const Vec& x) {
        Vec r(2);
        r << 10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0];
        return r;
      },
      [](const Vec& x) {
        Mat J(2, 2);
        J << -20.0 * x[0], 10.0, -1.0, 0.0;
        return J;
      });
}

}  // namespace

TEST_CASE("converges on Rosenbrock from the standard start") {
  ResidualProblem prob = rosenbrock();
  Vec x0(2);
  x0 << -1.2, 1.0;
  LmResult res = lm_minimize(prob, x0);
  CHECK(res.cost < 1e-16);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.status == LmStatus::GradConverged);
}

TEST_CASE("linear least squares solves in one accepted step") {
  Rng rng(31);
  Mat A = rng.normal_mat(10, 4);
  Vec b = rng.normal_vec(10);
  ResidualProblem prob(
      4, [&](const Vec& x) { return Vec(A * x - b); },
      [&](const Vec&) { return A; });
  Vec x0 = Vec::Zero(4);
  LmResult res = lm_minimize(prob, x0);
  Vec x_ref = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  CHECK(fmmtest::rel_diff(res.x, x_ref) < 1e-8);
  // The first trial step may be damped, but very few steps are needed.
  CHECK(res.iters <= 5);
}

TEST_CASE("immediate convergence at a stationary point") {
  ResidualProblem prob = rosenbrock();
  Vec xstar(2);
  xstar << 1.0, 1.0;
  LmResult res = lm_minimize(prob, xstar);
  CHECK(res.status == LmStatus::GradConverged);
  CHECK(res.iters == 0);
  CHECK((res.x - xstar).norm() == 0.0);
}

TEST_CASE("iteration cap reports MaxIters") {
  ResidualProblem prob = rosenbrock();
  Vec x0(2);
  x0 << -1.2, 1.0;
  LmConfig cfg;
  cfg.max_iters = 2;
  LmResult res = lm_minimize(prob, x0, cfg);
  CHECK(res.status == LmStatus::MaxIters);
  CHECK(res.iters == 2);
}

TEST_CASE("history rows cover the initial point and every accepted step") {
  ResidualProblem prob = rosenbrock();
  Vec x0(2);
  x0 << -1.2, 1.0;
  LmConfig cfg;
  cfg.record_history = true;
  LmResult res = lm_minimize(prob, x0, cfg);
  REQUIRE(!res.history.empty());
  CHECK(res.history.front().iter == 0);
  CHECK(static_cast<int>(res.history.size()) == res.iters + 1);
  // Costs along accepted steps never increase.
  for (std::size_t i = 1; i < res.history.size(); ++i)
    CHECK(res.history[i].cost <= res.history[i - 1].cost);

  std::ostringstream os;
  write_history_csv(os, res.history);
  CHECK(os.str().rfind("iter,cost,grad_norm,mu\n", 0) == 0);
}

TEST_CASE("refines a perturbed exact decomposition back to exactness") {
  Rng rng(32);
  Pd exact = classic_222_pd();
  Pd start = perturb_known(exact, 1e-3, rng);
  MmTensor t = build_mmt(exact.dims);
  ResidualProblem prob(
      x_size(exact.dims, 7),
      [&](const Vec& x) { return pd_residual(unpack(exact.dims, 7, x), t); },
      [&](const Vec& x) { return pd_jacobian(unpack(exact.dims, 7, x)); });
  LmConfig cfg;
  cfg.max_iters = 100;
  LmResult res = lm_minimize(prob, pack(start), cfg);
  CHECK(res.cost < 1e-20);
}

TEST_CASE("to_string names every status") {
  CHECK(std::string(to_string(LmStatus::GradConverged)) == "grad_converged");
  CHECK(std::string(to_string(LmStatus::StepConverged)) == "step_converged");
  CHECK(std::string(to_string(LmStatus::MaxIters)) == "max_iters");
  CHECK(std::string(to_string(LmStatus::SolveFailed)) == "solve_failed");
}

TEST_SUITE_END();
