// SPDX-License-Identifier: MIT

#include "fmmkit/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fmm {

Pd gaussian_start(const Dims& dims, int R, double scale, Rng& rng) {
  if (R < 1) throw UsageError("gaussian_start: rank must be positive");
  Pd pd;
  pd.dims = dims;
  pd.U = scale * rng.normal_mat(dims.mp(), R);
  pd.V = scale * rng.normal_mat(dims.pn(), R);
  pd.W = scale * rng.normal_mat(dims.mn(), R);
  return pd;
}

Pd trivial_ones_start(const MmTensor& t, const std::vector<int>& pick) {
  const Dims& d = t.dims;
  int R = static_cast<int>(pick.size());
  if (R < 1) throw UsageError("trivial_ones_start: empty selection");
  Pd pd;
  pd.dims = d;
  pd.U = Mat::Zero(d.mp(), R);
  pd.V = Mat::Zero(d.pn(), R);
  pd.W = Mat::Zero(d.mn(), R);
  int prev = -1;
  for (int r = 0; r < R; ++r) {
    int o = pick[static_cast<std::size_t>(r)];
    if (o <= prev || o >= static_cast<int>(t.ones.size()))
      throw UsageError("trivial_ones_start: selection must be strictly "
                       "increasing indices into the unit-entry list");
    prev = o;
    pd.U(t.ones[o][0], r) = 1.0;
    pd.V(t.ones[o][1], r) = 1.0;
    pd.W(t.ones[o][2], r) = 1.0;
  }
  return pd;
}

Pd trivial_ones_start(const MmTensor& t, int R, Rng& rng) {
  return trivial_ones_start(
      t, sample_combination(rng, static_cast<int>(t.ones.size()), R));
}

double trivial_start_count(const Dims& dims, int R) {
  int n = dims.mpn();
  if (R < 0 || R > n) return 0.0;
  int k = std::min(R, n - R);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c *= static_cast<double>(n - k + i) / static_cast<double>(i);
    if (!std::isfinite(c)) return std::numeric_limits<double>::infinity();
  }
  return std::round(c);
}

std::vector<int> sample_combination(Rng& rng, int n, int k) {
  if (k < 0 || k > n) throw UsageError("sample_combination: need 0 <= k <= n");
  // Floyd's algorithm, then sort: k draws regardless of n.
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int j = n - k; j < n; ++j) {
    int v = static_cast<int>(rng.uniform_int(0, j));
    bool dup = false;
    for (int x : out)
      if (x == v) {
        dup = true;
        break;
      }
    out.push_back(dup ? j : v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Pd zero_out_start(const Pd& known, const MmTensor& t) {
  known.check();
  if (!(known.dims == t.dims))
    throw UsageError("zero_out_start: dims mismatch");
  const Dims& d = known.dims;
  int R = known.rank();
  Mat keepU = Mat::Zero(d.mp(), R), keepV = Mat::Zero(d.pn(), R),
      keepW = Mat::Zero(d.mn(), R);
  for (const auto& o : t.ones) {
    int best_r = 0;
    double best = -1.0;
    for (int r = 0; r < R; ++r) {
      double c = std::abs(known.U(o[0], r) * known.V(o[1], r) *
                          known.W(o[2], r));
      if (c > best) {  // strict: ties keep the smallest r
        best = c;
        best_r = r;
      }
    }
    keepU(o[0], best_r) = 1.0;
    keepV(o[1], best_r) = 1.0;
    keepW(o[2], best_r) = 1.0;
  }
  Pd pd = known;
  pd.U = known.U.cwiseProduct(keepU);
  pd.V = known.V.cwiseProduct(keepV);
  pd.W = known.W.cwiseProduct(keepW);
  return pd;
}

Pd perturb_known(const Pd& known, double scale, Rng& rng) {
  known.check();
  Pd pd = known;
  pd.U += scale * rng.normal_mat(pd.U.rows(), pd.U.cols());
  pd.V += scale * rng.normal_mat(pd.V.rows(), pd.V.cols());
  pd.W += scale * rng.normal_mat(pd.W.rows(), pd.W.cols());
  return pd;
}

}  // namespace fmm
