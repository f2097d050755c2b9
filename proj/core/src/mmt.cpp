// SPDX-License-Identifier: MIT

#include "fmmkit/mmt.hpp"

#include <cmath>
#include <cstdint>

namespace fmm {

namespace {

// X ⊗ Y with 0-based block layout: out(i·Yr+a, j·Yc+b) = X(i,j)·Y(a,b).
Mat kron(const Mat& X, const Mat& Y) {
  Mat out(X.rows() * Y.rows(), X.cols() * Y.cols());
  for (Index j = 0; j < X.cols(); ++j)
    for (Index i = 0; i < X.rows(); ++i)
      out.block(i * Y.rows(), j * Y.cols(), Y.rows(), Y.cols()) = X(i, j) * Y;
  return out;
}

Index ipow(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

void Pd::check() const {
  if (!dims.valid()) throw DataError("Pd::check: invalid dims " + dims.str());
  int R = static_cast<int>(U.cols());
  if (V.cols() != R || W.cols() != R)
    throw DataError("Pd::check: factor column counts disagree");
  if (U.rows() != dims.mp() || V.rows() != dims.pn() || W.rows() != dims.mn())
    throw DataError("Pd::check: factor row counts do not match dims " +
                    dims.str());
}

Vec pack(const Pd& pd) {
  pd.check();
  int R = pd.rank();
  const Dims& d = pd.dims;
  Vec x(x_size(d, R));
  Index o = 0;
  x.segment(o, static_cast<Index>(d.mp()) * R) =
      Eigen::Map<const Vec>(pd.U.data(), pd.U.size());
  o += pd.U.size();
  x.segment(o, static_cast<Index>(d.pn()) * R) =
      Eigen::Map<const Vec>(pd.V.data(), pd.V.size());
  o += pd.V.size();
  x.segment(o, static_cast<Index>(d.mn()) * R) =
      Eigen::Map<const Vec>(pd.W.data(), pd.W.size());
  return x;
}

Pd unpack(const Dims& dims, int R, const Vec& x) {
  if (x.size() != x_size(dims, R))
    throw UsageError("unpack: variable vector has length " +
                     std::to_string(x.size()) + ", expected " +
                     std::to_string(x_size(dims, R)));
  Pd pd;
  pd.dims = dims;
  Index o = 0;
  pd.U = Eigen::Map<const Mat>(x.data() + o, dims.mp(), R);
  o += static_cast<Index>(dims.mp()) * R;
  pd.V = Eigen::Map<const Mat>(x.data() + o, dims.pn(), R);
  o += static_cast<Index>(dims.pn()) * R;
  pd.W = Eigen::Map<const Mat>(x.data() + o, dims.mn(), R);
  return pd;
}

MmTensor build_mmt(const Dims& dims) {
  if (!dims.valid()) throw UsageError("build_mmt: invalid dims " + dims.str());
  MmTensor t;
  t.dims = dims;
  t.ones.reserve(static_cast<std::size_t>(dims.mpn()));
  // One unit entry per scalar product A(i1,i2)·B(i2,j2) of the naive
  // algorithm; it lands in C(i1,j2), stored transposed (see types.hpp).
  for (int i1 = 0; i1 < dims.m; ++i1)
    for (int i2 = 0; i2 < dims.p; ++i2)
      for (int j2 = 0; j2 < dims.n; ++j2)
        t.ones.push_back({i1 + i2 * dims.m,   // row of vec(A)
                          i2 + j2 * dims.p,   // row of vec(B)
                          j2 + i1 * dims.n}); // row of vec((AB)ᵀ)
  return t;
}

Vec vec_tensor(const MmTensor& t) {
  Vec v = Vec::Zero(t.dims.tensor_len());
  for (const auto& o : t.ones) v[t.flat(o[0], o[1], o[2])] += 1.0;
  return v;
}

Vec contract(const MmTensor& t, const Vec& vecA, const Vec& vecB) {
  if (vecA.size() != t.dims.mp() || vecB.size() != t.dims.pn())
    throw UsageError("contract: operand lengths do not match dims " +
                     t.dims.str());
  Vec out = Vec::Zero(t.dims.mn());
  for (const auto& o : t.ones) out[o[2]] += vecA[o[0]] * vecB[o[1]];
  return out;
}

void EvalWorkspace::ensure(const Dims& dims, int R) {
  Index uv_rows = static_cast<Index>(dims.mp()) * dims.pn();
  if (UV.rows() != uv_rows || UV.cols() != R) UV.resize(uv_rows, R);
  if (F.size() != dims.tensor_len()) F.resize(dims.tensor_len());
  if (MU.rows() != uv_rows || MU.cols() != R) MU.resize(uv_rows, R);
  if (GW.rows() != dims.mn() || GW.cols() != R) GW.resize(dims.mn(), R);
}

namespace {

// Fills ws.UV and ws.F with the decomposition's dense tensor value, then
// subtracts the unit entries, leaving the residual in ws.F.
void residual_into(const Pd& pd, const MmTensor& t, EvalWorkspace& ws) {
  pd.check();
  if (!(pd.dims == t.dims))
    throw UsageError("pd/tensor dims mismatch: " + pd.dims.str() + " vs " +
                     t.dims.str());
  const Dims& d = pd.dims;
  int R = pd.rank();
  ws.ensure(d, R);
  for (int r = 0; r < R; ++r) {
    Eigen::Map<Mat> uv(ws.UV.col(r).data(), d.mp(), d.pn());
    uv.noalias() = pd.U.col(r) * pd.V.col(r).transpose();
  }
  Eigen::Map<Mat> Fm(ws.F.data(), static_cast<Index>(d.mp()) * d.pn(), d.mn());
  Fm.noalias() = ws.UV * pd.W.transpose();
  for (const auto& o : t.ones) ws.F[t.flat(o[0], o[1], o[2])] -= 1.0;
}

void gradient_from_ws(const Pd& pd, const Vec& residual, EvalWorkspace& ws,
                      Vec& g) {
  const Dims& d = pd.dims;
  int R = pd.rank();
  Index mp = d.mp(), pn = d.pn(), mn = d.mn();
  Eigen::Map<const Mat> Rm(residual.data(), mp * pn, mn);
  ws.GW.noalias() = Rm.transpose() * ws.UV;  // mn × R: gradient of W
  ws.MU.noalias() = Rm * pd.W;               // col r = vec(Σ_k w_r(k)·Res_k)
  g.resize(x_size(d, R));
  Index v0 = static_cast<Index>(mp) * R;
  Index w0 = v0 + static_cast<Index>(pn) * R;
  for (int r = 0; r < R; ++r) {
    Eigen::Map<const Mat> Mr(ws.MU.col(r).data(), mp, pn);
    g.segment(static_cast<Index>(r) * mp, mp).noalias() = Mr * pd.V.col(r);
    g.segment(v0 + static_cast<Index>(r) * pn, pn).noalias() =
        Mr.transpose() * pd.U.col(r);
  }
  Eigen::Map<Mat>(g.data() + w0, mn, R) = ws.GW;
}

}  // namespace

Vec pd_residual(const Pd& pd, const MmTensor& t, EvalWorkspace* ws) {
  EvalWorkspace local;
  EvalWorkspace& w = ws ? *ws : local;
  residual_into(pd, t, w);
  return w.F;
}

double pd_cost(const Pd& pd, const MmTensor& t, EvalWorkspace* ws) {
  EvalWorkspace local;
  EvalWorkspace& w = ws ? *ws : local;
  residual_into(pd, t, w);
  return 0.5 * w.F.squaredNorm();
}

Vec pd_gradient(const Pd& pd, const MmTensor& t, EvalWorkspace* ws) {
  EvalWorkspace local;
  EvalWorkspace& w = ws ? *ws : local;
  residual_into(pd, t, w);
  Vec g;
  gradient_from_ws(pd, w.F, w, g);
  return g;
}

Vec pd_gradient_from_residual(const Pd& pd, const Vec& residual,
                              EvalWorkspace* ws) {
  EvalWorkspace local;
  EvalWorkspace& w = ws ? *ws : local;
  const Dims& d = pd.dims;
  if (residual.size() != d.tensor_len())
    throw UsageError("pd_gradient_from_residual: residual length mismatch");
  w.ensure(d, pd.rank());
  for (int r = 0; r < pd.rank(); ++r) {
    Eigen::Map<Mat> uv(w.UV.col(r).data(), d.mp(), d.pn());
    uv.noalias() = pd.U.col(r) * pd.V.col(r).transpose();
  }
  Vec g;
  gradient_from_ws(pd, residual, w, g);
  return g;
}

Mat pd_jacobian(const Pd& pd) {
  pd.check();
  const Dims& d = pd.dims;
  int R = pd.rank();
  Index mp = d.mp(), pn = d.pn(), mn = d.mn();
  Mat J = Mat::Zero(d.tensor_len(), x_size(d, R));
  Index v0 = mp * R, w0 = v0 + pn * R;
  for (int r = 0; r < R; ++r) {
    for (Index k = 0; k < mn; ++k) {
      double wk = pd.W(k, r);
      for (Index j = 0; j < pn; ++j) {
        double vj = pd.V(j, r);
        Index row0 = mp * (j + pn * k);
        for (Index i = 0; i < mp; ++i) {
          double ui = pd.U(i, r);
          Index row = row0 + i;
          J(row, r * mp + i) = vj * wk;
          J(row, v0 + r * pn + j) = ui * wk;
          J(row, w0 + r * mn + k) = ui * vj;
        }
      }
    }
  }
  return J;
}

void pd_gauss_newton(const Pd& pd, Mat& H) {
  pd.check();
  const Dims& d = pd.dims;
  int R = pd.rank();
  Index mp = d.mp(), pn = d.pn(), mn = d.mn();
  Index N = x_size(d, R);
  Index v0 = mp * R, w0 = v0 + pn * R;
  H.resize(N, N);
  H.setZero();
  Mat Cu = pd.U.transpose() * pd.U;
  Mat Cv = pd.V.transpose() * pd.V;
  Mat Cw = pd.W.transpose() * pd.W;
  Mat Auu = Cw.cwiseProduct(Cv);
  Mat Avv = Cw.cwiseProduct(Cu);
  Mat Aww = Cv.cwiseProduct(Cu);
  for (int r = 0; r < R; ++r) {
    for (int s = 0; s < R; ++s) {
      H.block(r * mp, s * mp, mp, mp).diagonal().setConstant(Auu(r, s));
      H.block(v0 + r * pn, v0 + s * pn, pn, pn)
          .diagonal()
          .setConstant(Avv(r, s));
      H.block(w0 + r * mn, w0 + s * mn, mn, mn)
          .diagonal()
          .setConstant(Aww(r, s));
      // Mixed blocks: column s of the leading factor against column r of the
      // trailing one (the derivative pairing is not symmetric in r, s).
      Mat uv = Cw(r, s) * (pd.U.col(s) * pd.V.col(r).transpose());
      H.block(r * mp, v0 + s * pn, mp, pn) = uv;
      H.block(v0 + s * pn, r * mp, pn, mp) = uv.transpose();
      Mat uw = Cv(r, s) * (pd.U.col(s) * pd.W.col(r).transpose());
      H.block(r * mp, w0 + s * mn, mp, mn) = uw;
      H.block(w0 + s * mn, r * mp, mn, mp) = uw.transpose();
      Mat vw = Cu(r, s) * (pd.V.col(s) * pd.W.col(r).transpose());
      H.block(v0 + r * pn, w0 + s * mn, pn, mn) = vw;
      H.block(w0 + s * mn, v0 + r * pn, mn, pn) = vw.transpose();
    }
  }
}

RankReport jacobian_rank(const Pd& pd, double rel_tol) {
  return numerical_rank(pd_jacobian(pd), rel_tol);
}

Mat apply_pd(const Pd& pd, const Mat& A, const Mat& B, long long* mult_count) {
  pd.check();
  const Dims& d = pd.dims;
  if (A.rows() != d.m || A.cols() != d.p || B.rows() != d.p ||
      B.cols() != d.n)
    throw UsageError("apply_pd: operand shapes do not match dims " + d.str());
  Vec s = pd.U.transpose() * Eigen::Map<const Vec>(A.data(), A.size());
  Vec t = pd.V.transpose() * Eigen::Map<const Vec>(B.data(), B.size());
  Mat CT = Mat::Zero(d.n, d.m);  // accumulate Cᵀ = reshape(w_r, n, m) slices
  for (int r = 0; r < pd.rank(); ++r) {
    double prod = s[r] * t[r];
    if (mult_count) ++*mult_count;
    CT.noalias() +=
        prod * Eigen::Map<const Mat>(pd.W.col(r).data(), d.n, d.m);
  }
  return CT.transpose();
}

Mat apply_recursive(const Pd& pd, const Mat& A, const Mat& B, int levels,
                    long long* mult_count) {
  pd.check();
  const Dims& d = pd.dims;
  if (levels < 1) throw UsageError("apply_recursive: levels must be >= 1");
  if (A.rows() != ipow(d.m, levels) || A.cols() != ipow(d.p, levels) ||
      B.rows() != ipow(d.p, levels) || B.cols() != ipow(d.n, levels))
    throw UsageError("apply_recursive: operands are not m^L×p^L and p^L×n^L");
  if (levels == 1) return apply_pd(pd, A, B, mult_count);
  Index ar = A.rows() / d.m, ac = A.cols() / d.p, bc = B.cols() / d.n;
  Mat C = Mat::Zero(A.rows(), B.cols());
  Mat Ar(ar, ac), Br(ac, bc);
  for (int r = 0; r < pd.rank(); ++r) {
    Ar.setZero();
    for (int i2 = 0; i2 < d.p; ++i2)
      for (int i1 = 0; i1 < d.m; ++i1) {
        double c = pd.U(i1 + i2 * d.m, r);
        if (c != 0.0) Ar.noalias() += c * A.block(i1 * ar, i2 * ac, ar, ac);
      }
    Br.setZero();
    for (int j2 = 0; j2 < d.n; ++j2)
      for (int j1 = 0; j1 < d.p; ++j1) {
        double c = pd.V(j1 + j2 * d.p, r);
        if (c != 0.0) Br.noalias() += c * B.block(j1 * ac, j2 * bc, ac, bc);
      }
    Mat Pr = apply_recursive(pd, Ar, Br, levels - 1, mult_count);
    for (int a = 0; a < d.m; ++a)
      for (int b = 0; b < d.n; ++b) {
        double c = pd.W(b + a * d.n, r);
        if (c != 0.0) C.block(a * ar, b * bc, ar, bc).noalias() += c * Pr;
      }
  }
  return C;
}

Pd pd_kron(const Pd& a, const Pd& b) {
  a.check();
  b.check();
  Pd out;
  out.dims = {a.dims.m * b.dims.m, a.dims.p * b.dims.p, a.dims.n * b.dims.n};
  int R = a.rank() * b.rank();
  out.U.resize(out.dims.mp(), R);
  out.V.resize(out.dims.pn(), R);
  out.W.resize(out.dims.mn(), R);
  for (int r = 0; r < a.rank(); ++r) {
    Eigen::Map<const Mat> U1(a.U.col(r).data(), a.dims.m, a.dims.p);
    Eigen::Map<const Mat> V1(a.V.col(r).data(), a.dims.p, a.dims.n);
    Eigen::Map<const Mat> W1(a.W.col(r).data(), a.dims.n, a.dims.m);
    for (int s = 0; s < b.rank(); ++s) {
      Eigen::Map<const Mat> U2(b.U.col(s).data(), b.dims.m, b.dims.p);
      Eigen::Map<const Mat> V2(b.V.col(s).data(), b.dims.p, b.dims.n);
      Eigen::Map<const Mat> W2(b.W.col(s).data(), b.dims.n, b.dims.m);
      int col = r * b.rank() + s;
      Mat ku = kron(U1, U2), kv = kron(V1, V2), kw = kron(W1, W2);
      out.U.col(col) = Eigen::Map<const Vec>(ku.data(), ku.size());
      out.V.col(col) = Eigen::Map<const Vec>(kv.data(), kv.size());
      out.W.col(col) = Eigen::Map<const Vec>(kw.data(), kw.size());
    }
  }
  return out;
}

Pd permute_pd(const Pd& pd, Cycle c) {
  pd.check();
  Pd out;
  switch (c) {
    case Cycle::None:
      return pd;
    case Cycle::Left:
      out.dims = {pd.dims.p, pd.dims.n, pd.dims.m};
      out.U = pd.V;
      out.V = pd.W;
      out.W = pd.U;
      return out;
    case Cycle::Right:
      out.dims = {pd.dims.n, pd.dims.m, pd.dims.p};
      out.U = pd.W;
      out.V = pd.U;
      out.W = pd.V;
      return out;
  }
  throw UsageError("permute_pd: bad cycle");
}

Pd transpose_family_pd(const Pd& pd) {
  pd.check();
  const Dims& d = pd.dims;
  Pd out;
  out.dims = {d.m, d.n, d.p};
  int R = pd.rank();
  out.U.resize(out.dims.mp(), R);
  out.V.resize(out.dims.pn(), R);
  out.W.resize(out.dims.mn(), R);
  for (int r = 0; r < R; ++r) {
    Eigen::Map<const Mat> Ur(pd.U.col(r).data(), d.m, d.p);
    Eigen::Map<const Mat> Vr(pd.V.col(r).data(), d.p, d.n);
    Eigen::Map<const Mat> Wr(pd.W.col(r).data(), d.n, d.m);
    Mat ut = Wr.transpose();  // m×n  → new U slice
    Mat vt = Vr.transpose();  // n×p  → new V slice
    Mat wt = Ur.transpose();  // p×m  → new W slice
    out.U.col(r) = Eigen::Map<const Vec>(ut.data(), ut.size());
    out.V.col(r) = Eigen::Map<const Vec>(vt.data(), vt.size());
    out.W.col(r) = Eigen::Map<const Vec>(wt.data(), wt.size());
  }
  return out;
}

}  // namespace fmm
