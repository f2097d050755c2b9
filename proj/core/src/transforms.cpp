// SPDX-License-Identifier: MIT

#include "fmmkit/transforms.hpp"

#include "fmmkit/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace fmm {

PqrTriple PqrTriple::identity(const Dims& d) {
  return {Mat::Identity(d.m, d.m), Mat::Identity(d.p, d.p),
          Mat::Identity(d.n, d.n)};
}

PqrTriple PqrTriple::random(const Dims& d, Rng& rng, double min_abs_det) {
  auto draw = [&](int n) {
    for (int tries = 0; tries < 100; ++tries) {
      Mat M = rng.normal_mat(n, n);
      if (std::abs(M.determinant()) > min_abs_det) return M;
    }
    throw NumericalError("PqrTriple::random: could not draw a well-"
                         "conditioned matrix");
  };
  return {draw(d.m), draw(d.p), draw(d.n)};
}

Pd pqr_transform(const Pd& pd, const PqrTriple& g) {
  pd.check();
  const Dims& d = pd.dims;
  if (g.P.rows() != d.m || g.P.cols() != d.m || g.Q.rows() != d.p ||
      g.Q.cols() != d.p || g.R.rows() != d.n || g.R.cols() != d.n)
    throw UsageError("pqr_transform: matrix sizes do not match dims " +
                     d.str());
  Mat Pinv = inverse_checked(g.P);
  Mat Qinv = inverse_checked(g.Q);
  Mat Rinv = inverse_checked(g.R);
  Pd out;
  out.dims = d;
  int R = pd.rank();
  out.U.resize(d.mp(), R);
  out.V.resize(d.pn(), R);
  out.W.resize(d.mn(), R);
  for (int r = 0; r < R; ++r) {
    Eigen::Map<const Mat> Ur(pd.U.col(r).data(), d.m, d.p);
    Eigen::Map<const Mat> Vr(pd.V.col(r).data(), d.p, d.n);
    Eigen::Map<const Mat> Wr(pd.W.col(r).data(), d.n, d.m);
    Mat u2 = g.P * Ur * Qinv;
    Mat v2 = g.Q * Vr * Rinv;
    Mat w2 = g.R * Wr * Pinv;
    out.U.col(r) = Eigen::Map<const Vec>(u2.data(), u2.size());
    out.V.col(r) = Eigen::Map<const Vec>(v2.data(), v2.size());
    out.W.col(r) = Eigen::Map<const Vec>(w2.data(), w2.size());
  }
  return out;
}

Pd scale_columns(const Pd& pd, const Vec& alpha, const Vec& beta) {
  pd.check();
  int R = pd.rank();
  if (alpha.size() != R || beta.size() != R)
    throw UsageError("scale_columns: need one alpha and beta per column");
  Pd out = pd;
  for (int r = 0; r < R; ++r) {
    double ab = alpha[r] * beta[r];
    if (std::abs(ab) < 1e-300)
      throw NumericalError("scale_columns: alpha*beta vanishes at column " +
                           std::to_string(r));
    out.U.col(r) *= alpha[r];
    out.V.col(r) *= beta[r];
    out.W.col(r) /= ab;
  }
  return out;
}

Pd transpose_transform(const Pd& pd) {
  pd.check();
  if (!pd.dims.is_cubic())
    throw UsageError("transpose_transform: requires a cubic shape, got " +
                     pd.dims.str());
  const int m = pd.dims.m;
  Pd out;
  out.dims = pd.dims;
  int R = pd.rank();
  out.U.resize(m * m, R);
  out.V.resize(m * m, R);
  out.W.resize(m * m, R);
  for (int r = 0; r < R; ++r) {
    Eigen::Map<const Mat> Ur(pd.U.col(r).data(), m, m);
    Eigen::Map<const Mat> Vr(pd.V.col(r).data(), m, m);
    Eigen::Map<const Mat> Wr(pd.W.col(r).data(), m, m);
    Mat ut = Vr.transpose();
    Mat vt = Ur.transpose();
    Mat wt = Wr.transpose();
    out.U.col(r) = Eigen::Map<const Vec>(ut.data(), ut.size());
    out.V.col(r) = Eigen::Map<const Vec>(vt.data(), vt.size());
    out.W.col(r) = Eigen::Map<const Vec>(wt.data(), wt.size());
  }
  return out;
}

Pd cyclic_transform(const Pd& pd, Cycle c) {
  pd.check();
  if (!pd.dims.is_cubic())
    throw UsageError("cyclic_transform: requires a cubic shape, got " +
                     pd.dims.str());
  return permute_pd(pd, c);
}

Fingerprint fingerprint(const Pd& pd, double rank_rel_tol) {
  pd.check();
  const Dims& d = pd.dims;
  Fingerprint fp;
  int R = pd.rank();
  fp.traces.reserve(R);
  fp.product_ranks.reserve(R);
  fp.factor_ranks.reserve(R);
  for (int r = 0; r < R; ++r) {
    Eigen::Map<const Mat> Ur(pd.U.col(r).data(), d.m, d.p);
    Eigen::Map<const Mat> Vr(pd.V.col(r).data(), d.p, d.n);
    Eigen::Map<const Mat> Wr(pd.W.col(r).data(), d.n, d.m);
    Mat prod = Ur * Vr * Wr;  // m×m
    fp.traces.push_back(prod.trace());
    fp.product_ranks.push_back(numerical_rank(prod, rank_rel_tol).rank);
    fp.factor_ranks.push_back({numerical_rank(Ur, rank_rel_tol).rank,
                               numerical_rank(Vr, rank_rel_tol).rank,
                               numerical_rank(Wr, rank_rel_tol).rank});
  }
  std::sort(fp.traces.begin(), fp.traces.end());
  std::sort(fp.product_ranks.begin(), fp.product_ranks.end());
  std::sort(fp.factor_ranks.begin(), fp.factor_ranks.end());
  fp.jac_rank = jacobian_rank(pd, rank_rel_tol).rank;
  return fp;
}

bool fingerprints_match(const Fingerprint& a, const Fingerprint& b,
                        double trace_tol) {
  if (a.traces.size() != b.traces.size()) return false;
  for (std::size_t i = 0; i < a.traces.size(); ++i)
    if (std::abs(a.traces[i] - b.traces[i]) > trace_tol) return false;
  return a.product_ranks == b.product_ranks &&
         a.factor_ranks == b.factor_ranks && a.jac_rank == b.jac_rank;
}

DiscreteCheck discretizable_necessary(const Pd& pd, double tol) {
  const Dims& d = pd.dims;
  DiscreteCheck out;
  out.traces.reserve(pd.rank());
  for (int r = 0; r < pd.rank(); ++r) {
    Eigen::Map<const Mat> Ur(pd.U.col(r).data(), d.m, d.p);
    Eigen::Map<const Mat> Vr(pd.V.col(r).data(), d.p, d.n);
    Eigen::Map<const Mat> Wr(pd.W.col(r).data(), d.n, d.m);
    out.traces.push_back((Ur * Vr * Wr).trace());
  }
  std::sort(out.traces.begin(), out.traces.end());
  out.max_deviation = 0.0;
  for (double t : out.traces)
    out.max_deviation =
        std::max(out.max_deviation, std::abs(t - std::round(t)));
  out.pass = out.max_deviation <= tol;
  return out;
}

}  // namespace fmm
