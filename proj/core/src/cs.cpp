// SPDX-License-Identifier: MIT

#include "fmmkit/cs.hpp"

#include <array>
#include <limits>

namespace fmm {

void CsPd::check() const {
  if (m < 1) throw DataError("CsPd::check: invalid m");
  Index mm = static_cast<Index>(m) * m;
  if (A.rows() != mm || B.rows() != mm || C.rows() != mm || D.rows() != mm)
    throw DataError("CsPd::check: blocks must have m² rows");
  if (B.cols() != C.cols() || B.cols() != D.cols())
    throw DataError("CsPd::check: B, C, D must have equal column counts");
  if (A.cols() + B.cols() == 0)
    throw DataError("CsPd::check: empty decomposition");
}

Pd expand_cs(const CsPd& cs) {
  cs.check();
  Index mm = static_cast<Index>(cs.m) * cs.m;
  int S = cs.S(), T = cs.T();
  Pd pd;
  pd.dims = cs.dims();
  pd.U.resize(mm, S + 3 * T);
  pd.V.resize(mm, S + 3 * T);
  pd.W.resize(mm, S + 3 * T);
  pd.U << cs.A, cs.B, cs.C, cs.D;
  pd.V << cs.A, cs.D, cs.B, cs.C;
  pd.W << cs.A, cs.C, cs.D, cs.B;
  return pd;
}

Index cs_size(int m, int S, int T) {
  return static_cast<Index>(m) * m * (S + 3 * T);
}

Vec cs_pack(const CsPd& cs) {
  cs.check();
  Vec xi(cs_size(cs.m, cs.S(), cs.T()));
  Index o = 0;
  for (const Mat* blk : {&cs.A, &cs.B, &cs.C, &cs.D}) {
    xi.segment(o, blk->size()) = Eigen::Map<const Vec>(blk->data(), blk->size());
    o += blk->size();
  }
  return xi;
}

CsPd cs_unpack(int m, int S, int T, const Vec& xi) {
  if (xi.size() != cs_size(m, S, T))
    throw UsageError("cs_unpack: variable vector length mismatch");
  Index mm = static_cast<Index>(m) * m;
  CsPd cs;
  cs.m = m;
  Index o = 0;
  cs.A = Eigen::Map<const Mat>(xi.data() + o, mm, S);
  o += mm * S;
  cs.B = Eigen::Map<const Mat>(xi.data() + o, mm, T);
  o += mm * T;
  cs.C = Eigen::Map<const Mat>(xi.data() + o, mm, T);
  o += mm * T;
  cs.D = Eigen::Map<const Mat>(xi.data() + o, mm, T);
  return cs;
}

std::vector<Index> cs_duplication_map(int m, int S, int T) {
  // Reduced layout: [vec A | vec B | vec C | vec D] with block offsets
  // 0, S·m², (S+T)·m², (S+2T)·m².  Full layout: x = [vec U; vec V; vec W]
  // with U = [A B C D], V = [A D B C], W = [A C D B].
  Index mm = static_cast<Index>(m) * m;
  Index oA = 0, oB = S * mm, oC = (S + T) * mm, oD = (S + 2 * T) * mm;
  // Reduced block offset of each full factor's column blocks, in order.
  const std::array<std::array<Index, 4>, 3> layout = {{
      {oA, oB, oC, oD},  // U
      {oA, oD, oB, oC},  // V
      {oA, oC, oD, oB},  // W
  }};
  std::vector<Index> map;
  map.reserve(static_cast<std::size_t>(3 * (S + 3 * T)) * mm);
  for (const auto& fac : layout) {
    const int widths[4] = {S, T, T, T};
    for (int blk = 0; blk < 4; ++blk)
      for (Index c = 0; c < widths[blk]; ++c)
        for (Index e = 0; e < mm; ++e) map.push_back(fac[blk] + c * mm + e);
  }
  return map;
}

Vec cs_residual(const CsPd& cs, const MmTensor& t, EvalWorkspace* ws) {
  return pd_residual(expand_cs(cs), t, ws);
}

double cs_cost(const CsPd& cs, const MmTensor& t, EvalWorkspace* ws) {
  return pd_cost(expand_cs(cs), t, ws);
}

Vec cs_gradient(const CsPd& cs, const MmTensor& t, EvalWorkspace* ws) {
  Vec g_full = pd_gradient(expand_cs(cs), t, ws);
  auto map = cs_duplication_map(cs.m, cs.S(), cs.T());
  Vec g = Vec::Zero(cs_size(cs.m, cs.S(), cs.T()));
  for (std::size_t i = 0; i < map.size(); ++i)
    g[map[i]] += g_full[static_cast<Index>(i)];
  return g;
}

Mat cs_jacobian(const CsPd& cs) {
  Mat Jf = pd_jacobian(expand_cs(cs));
  auto map = cs_duplication_map(cs.m, cs.S(), cs.T());
  Mat J = Mat::Zero(Jf.rows(), cs_size(cs.m, cs.S(), cs.T()));
  for (std::size_t i = 0; i < map.size(); ++i)
    J.col(map[i]) += Jf.col(static_cast<Index>(i));
  return J;
}

void cs_gauss_newton(const CsPd& cs, Mat& H) {
  Mat Hf;
  pd_gauss_newton(expand_cs(cs), Hf);
  auto map = cs_duplication_map(cs.m, cs.S(), cs.T());
  Index nred = cs_size(cs.m, cs.S(), cs.T());
  H.resize(nred, nred);
  H.setZero();
  Index nfull = Hf.rows();
  for (Index q = 0; q < nfull; ++q) {
    Index cq = map[static_cast<std::size_t>(q)];
    for (Index p = 0; p < nfull; ++p)
      H(map[static_cast<std::size_t>(p)], cq) += Hf(p, q);
  }
}

CsAlProblem::CsAlProblem(int m, int S, int T)
    : m_(m), S_(S), T_(T), tensor_(build_mmt({m, m, m})) {
  if (m < 1 || S < 0 || T < 0 || S + T == 0)
    throw UsageError("CsAlProblem: invalid (m, S, T)");
}

double CsAlProblem::f(const Vec& xi) {
  return cs_cost(cs_unpack(m_, S_, T_, xi), tensor_, &ws_);
}

Vec CsAlProblem::grad_f(const Vec& xi) {
  return cs_gradient(cs_unpack(m_, S_, T_, xi), tensor_, &ws_);
}

void CsAlProblem::gn_f(const Vec& xi, Mat& H) {
  cs_gauss_newton(cs_unpack(m_, S_, T_, xi), H);
}

Vec CsAlProblem::residual_f(const Vec& xi) {
  return cs_residual(cs_unpack(m_, S_, T_, xi), tensor_, &ws_);
}

CsSearchResult cs_search(int m, int S, int T, const CsSearchConfig& cfg) {
  CsAlProblem prob(m, S, T);
  DiscretenessConstraint discrete;
  NoConstraint none;
  const EqualityConstraint& con =
      cfg.discrete ? static_cast<const EqualityConstraint&>(discrete)
                   : static_cast<const EqualityConstraint&>(none);
  CsSearchResult out;
  out.best_cost = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.starts; ++k) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(k));
    Vec x0 = cfg.init_scale * rng.normal_vec(prob.dim());
    AlResult r = al_search(prob, con, x0, cfg.al);
    CsStartReport rep;
    rep.start = k;
    rep.cost = r.cost;
    rep.feas = r.feas;
    rep.success = r.cost < cfg.success_cost;
    rep.inner_iters = r.inner_iters_total;
    out.per_start.push_back(rep);
    if (rep.success) ++out.successes;
    if (r.cost < out.best_cost) {
      out.best_cost = r.cost;
      out.best = cs_unpack(m, S, T, r.x);
    }
  }
  return out;
}

}  // namespace fmm
