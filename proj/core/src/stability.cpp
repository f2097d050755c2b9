// SPDX-License-Identifier: MIT

#include "fmmkit/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fmm {

namespace {

int nnz(const Vec& v, double tol) {
  int c = 0;
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > tol) ++c;
  return c;
}

}  // namespace

StabilityReport stability_report(const Pd& pd, double zero_tol) {
  pd.check();
  const Dims& d = pd.dims;
  int R = pd.rank();
  StabilityReport rep;
  rep.zero_tol = zero_tol;
  rep.row_q.assign(static_cast<std::size_t>(d.mn()), 0);
  rep.row_e = Vec::Zero(d.mn());
  std::vector<int> term_support(static_cast<std::size_t>(R));
  Vec term_l1(R);
  for (int r = 0; r < R; ++r) {
    term_support[static_cast<std::size_t>(r)] =
        nnz(pd.U.col(r), zero_tol) + nnz(pd.V.col(r), zero_tol);
    term_l1[r] = pd.U.col(r).lpNorm<1>() * pd.V.col(r).lpNorm<1>();
  }
  for (Index i = 0; i < d.mn(); ++i) {
    int active = 0, worst = 0;
    double e = 0.0;
    for (int r = 0; r < R; ++r) {
      double w = pd.W(i, r);
      if (std::abs(w) > zero_tol) {
        ++active;
        worst = std::max(worst, term_support[static_cast<std::size_t>(r)]);
        e += term_l1[r] * std::abs(w);
      }
    }
    rep.row_q[static_cast<std::size_t>(i)] = active + worst;
    rep.row_e[i] = e;
    if (rep.row_q[static_cast<std::size_t>(i)] > rep.q) {
      rep.q = rep.row_q[static_cast<std::size_t>(i)];
      rep.q_argmax = static_cast<int>(i);
    }
    if (e > rep.e) {
      rep.e = e;
      rep.e_argmax = static_cast<int>(i);
    }
  }
  return rep;
}

int q_factor(const Pd& pd, double zero_tol) {
  return stability_report(pd, zero_tol).q;
}

double e_factor(const Pd& pd, double zero_tol) {
  return stability_report(pd, zero_tol).e;
}

double round_pow2(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  double e = std::log2(std::abs(v));
  // Nearest exponent in log scale; a value sitting exactly halfway between
  // two powers of two snaps to the smaller one.
  double k = std::floor(e + 0.5);
  if (e + 0.5 == k && std::abs(v) != std::exp2(k)) k -= 1.0;
  return std::copysign(std::exp2(k), v);
}

Pd round_pow2(const Pd& pd) {
  Pd out = pd;
  for (Mat* M : {&out.U, &out.V, &out.W})
    for (Index i = 0; i < M->size(); ++i)
      M->data()[i] = round_pow2(M->data()[i]);
  return out;
}

namespace {

// Nelder–Mead with adaptive restarts; objective must be cheap.
struct NelderMead {
  std::function<double(const Vec&)> f;
  int evals = 0;
  int budget;

  double eval(const Vec& x) {
    ++evals;
    return f(x);
  }

  // One Nelder–Mead run from the given simplex; returns best (x, f).
  std::pair<Vec, double> run(std::vector<Vec> simplex) {
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    std::size_t n1 = simplex.size();
    std::vector<double> fv(n1);
    for (std::size_t i = 0; i < n1; ++i) fv[i] = eval(simplex[i]);
    std::vector<std::size_t> ord(n1);
    while (evals < budget) {
      for (std::size_t i = 0; i < n1; ++i) ord[i] = i;
      std::sort(ord.begin(), ord.end(),
                [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      std::vector<Vec> sx(n1);
      std::vector<double> sf(n1);
      for (std::size_t i = 0; i < n1; ++i) {
        sx[i] = simplex[ord[i]];
        sf[i] = fv[ord[i]];
      }
      simplex = sx;
      fv = sf;
      if (std::abs(fv.front() - fv.back()) <=
          1e-10 * (1.0 + std::abs(fv.front())))
        break;
      Vec centroid = Vec::Zero(simplex[0].size());
      for (std::size_t i = 0; i + 1 < n1; ++i) centroid += simplex[i];
      centroid /= static_cast<double>(n1 - 1);
      Vec xr = centroid + alpha * (centroid - simplex.back());
      double fr = eval(xr);
      if (fr < fv.front()) {
        Vec xe = centroid + gamma * (xr - centroid);
        double fe = eval(xe);
        if (fe < fr) {
          simplex.back() = xe;
          fv.back() = fe;
        } else {
          simplex.back() = xr;
          fv.back() = fr;
        }
      } else if (fr < fv[n1 - 2]) {
        simplex.back() = xr;
        fv.back() = fr;
      } else {
        Vec xc = centroid + rho * (simplex.back() - centroid);
        double fc = eval(xc);
        if (fc < fv.back()) {
          simplex.back() = xc;
          fv.back() = fc;
        } else {
          for (std::size_t i = 1; i < n1; ++i) {
            simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0]);
            fv[i] = eval(simplex[i]);
          }
        }
      }
      if (evals >= budget) break;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < n1; ++i)
      if (fv[i] < fv[best]) best = i;
    return {simplex[best], fv[best]};
  }
};

}  // namespace

StabOptResult optimize_family_stability(const FamilyDef& def, const Vec& init,
                                        const StabOptConfig& cfg) {
  if (init.size() != def.param_count())
    throw UsageError("optimize_family_stability: init has wrong length");
  MmTensor t = build_mmt(def.dims);
  const double kPenalty = 1e100;

  auto objective = [&](const Vec& p) -> double {
    double margin = exclusion_margin(def, param_env(def, p));
    if (!(margin >= cfg.min_margin)) return kPenalty;
    try {
      Pd pd = eval_family(def, p);
      double mx = std::max({pd.U.cwiseAbs().maxCoeff(),
                            pd.V.cwiseAbs().maxCoeff(),
                            pd.W.cwiseAbs().maxCoeff()});
      if (!std::isfinite(mx) || mx > 1e8) return kPenalty;
      return e_factor(pd, cfg.zero_tol);
    } catch (const NumericalError&) {
      return kPenalty;
    }
  };

  NelderMead nm{objective, 0, cfg.budget};
  Rng rng(cfg.seed);
  Index n = init.size();

  auto make_simplex = [&](const Vec& center, double scale) {
    std::vector<Vec> sx;
    sx.push_back(center);
    for (Index i = 0; i < n; ++i) {
      Vec v = center;
      double step = scale * (std::abs(center[i]) + 0.25);
      v[i] += step;
      sx.push_back(v);
    }
    return sx;
  };

  Vec best = init;
  double fbest = nm.eval(init);
  auto [x0, f0] = nm.run(make_simplex(init, cfg.simplex_scale));
  if (f0 < fbest) {
    best = x0;
    fbest = f0;
  }
  for (int r = 0; r < cfg.restarts && nm.evals < cfg.budget; ++r) {
    Vec start = best;
    for (Index i = 0; i < n; ++i)
      start[i] += rng.normal() * (0.5 * std::abs(best[i]) + 0.25);
    auto [xr, fr] = nm.run(make_simplex(start, cfg.simplex_scale));
    if (fr < fbest) {
      best = xr;
      fbest = fr;
    }
  }

  StabOptResult out;
  out.params = best;
  out.evals = nm.evals;
  Pd pd = eval_family(def, best);
  StabilityReport rep = stability_report(pd, cfg.zero_tol);
  out.e = rep.e;
  out.q = rep.q;
  out.residual = pd_residual(pd, t).norm();
  if (out.residual > cfg.residual_guard)
    throw NumericalError(
        "optimize_family_stability: optimized point lost exactness "
        "(residual " + std::to_string(out.residual) + ")");

  // Power-of-two snap: keep it only when it stays exact.
  Pd snapped = round_pow2(pd);
  double snap_res = pd_residual(snapped, t).norm();
  if (snap_res <= cfg.residual_guard) {
    StabilityReport rp = stability_report(snapped, cfg.zero_tol);
    out.pow2_exact = true;
    out.e_pow2 = rp.e;
    out.q_pow2 = rp.q;
    out.params_pow2 = best;  // parameters unchanged; factors were snapped
  }
  return out;
}

}  // namespace fmm
