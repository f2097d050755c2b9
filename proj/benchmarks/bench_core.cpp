// SPDX-License-Identifier: MIT
//
// Microbenchmarks for the hot paths: residual evaluation, the structured
// Gauss–Newton matrix, Jacobian rank, and recursive application.

#include "fmmkit/catalog.hpp"
#include "fmmkit/mmt.hpp"
#include "fmmkit/rng.hpp"
#include "fmmkit/seeding.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace fmm;

Pd random_pd(const Dims& d, int R, std::uint64_t seed) {
  Rng rng(seed);
  return gaussian_start(d, R, 0.5, rng);
}

void BM_Residual(benchmark::State& state) {
  Dims d{3, 3, 3};
  int R = 23;
  MmTensor t = build_mmt(d);
  Pd pd = random_pd(d, R, 1);
  EvalWorkspace ws;
  for (auto _ : state) {
    Vec r = pd_residual(pd, t, &ws);
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_Residual);

void BM_Gradient(benchmark::State& state) {
  Dims d{3, 3, 3};
  int R = 23;
  MmTensor t = build_mmt(d);
  Pd pd = random_pd(d, R, 1);
  EvalWorkspace ws;
  for (auto _ : state) {
    Vec g = pd_gradient(pd, t, &ws);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_Gradient);

void BM_GaussNewton(benchmark::State& state) {
  Dims d{static_cast<int>(state.range(0)), static_cast<int>(state.range(0)),
         static_cast<int>(state.range(0))};
  int R = d.m == 2 ? 7 : 23;
  Pd pd = random_pd(d, R, 1);
  Mat H;
  for (auto _ : state) {
    pd_gauss_newton(pd, H);
    benchmark::DoNotOptimize(H.data());
  }
}
BENCHMARK(BM_GaussNewton)->Arg(2)->Arg(3);

void BM_JacobianRank(benchmark::State& state) {
  Pd pd = classic_222_pd();
  for (auto _ : state) {
    RankReport rr = jacobian_rank(pd);
    benchmark::DoNotOptimize(rr.rank);
  }
}
BENCHMARK(BM_JacobianRank);

void BM_JacobianRank444(benchmark::State& state) {
  Pd pd = pd_power(classic_222_pd(), 2);
  for (auto _ : state) {
    RankReport rr = jacobian_rank(pd);
    benchmark::DoNotOptimize(rr.rank);
  }
}
BENCHMARK(BM_JacobianRank444)->Unit(benchmark::kSecond)->Iterations(1);

void BM_ApplyRecursive(benchmark::State& state) {
  int levels = static_cast<int>(state.range(0));
  Pd pd = classic_222_pd();
  int n = 1 << levels;
  Rng rng(7);
  Mat A = rng.normal_mat(n, n);
  Mat B = rng.normal_mat(n, n);
  for (auto _ : state) {
    Mat C = apply_recursive(pd, A, B, levels);
    benchmark::DoNotOptimize(C.data());
  }
}
BENCHMARK(BM_ApplyRecursive)->Arg(2)->Arg(4)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
