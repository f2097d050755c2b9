// SPDX-License-Identifier: MIT

#include "fmmkit/catalog.hpp"

#include "fmmkit/linalg.hpp"
#include "fmmkit/pd_io.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>

namespace fmm {

const char* to_string(CatalogKind k) {
  switch (k) {
    case CatalogKind::DiscretePd: return "pd";
    case CatalogKind::DiscreteCsPd: return "cspd";
    case CatalogKind::Family: return "family";
    case CatalogKind::CsFamily: return "cs-family";
  }
  return "?";
}

std::string default_data_dir() {
  namespace fs = std::filesystem;
  if (const char* env = std::getenv("FMMKIT_DATA_DIR"); env && *env) {
    if (fs::is_directory(env)) return env;
    throw DataError(std::string("FMMKIT_DATA_DIR is not a directory: ") + env);
  }
  if (fs::is_directory(FMMKIT_SOURCE_DATA_DIR)) return FMMKIT_SOURCE_DATA_DIR;
  if (fs::is_directory(FMMKIT_INSTALL_DATA_DIR)) return FMMKIT_INSTALL_DATA_DIR;
  throw DataError("no data directory found (set FMMKIT_DATA_DIR)");
}

namespace {

std::vector<CatalogEntry> builtin_entries() {
  std::vector<CatalogEntry> v;
  v.push_back({"strassen-222", CatalogKind::DiscretePd, {2, 2, 2}, 7, 0, "",
               "classic rank-7 <2,2,2>, entries in {-1,0,1}"});
  v.push_back({"strassen-444-rec", CatalogKind::DiscretePd, {4, 4, 4}, 49, 0,
               "", "rank-7 <2,2,2> applied recursively: rank-49 <4,4,4>"});
  v.push_back({"strassen-222-cs", CatalogKind::DiscreteCsPd, {2, 2, 2}, 7, 0,
               "", "the same algorithm in cyclic-symmetric form (S=1, T=2)"});
  v.push_back({"cs-s4t1-222", CatalogKind::DiscreteCsPd, {2, 2, 2}, 7, 0,
               "decompositions/cs_s4t1_222.cspd",
               "cyclic-symmetric rank-7 <2,2,2> with S=4, T=1"});
  v.push_back({"fam-333-r23-2p", CatalogKind::Family, {3, 3, 3}, 23, 2,
               "families/333_r23_2p.fam",
               "two-parameter rank-23 <3,3,3> family (not discretizable)"});
  v.push_back({"fam-333-r23-9p", CatalogKind::Family, {3, 3, 3}, 23, 9,
               "families/333_r23_9p.fam",
               "nine-parameter rank-23 <3,3,3> family"});
  v.push_back({"fam-345-r47-3p", CatalogKind::Family, {3, 4, 5}, 47, 3,
               "families/345_r47_3p.fam",
               "three-parameter rank-47 <3,4,5> family"});
  v.push_back({"fam-444-r49-13p", CatalogKind::Family, {4, 4, 4}, 49, 13,
               "families/444_r49_13p.fam",
               "thirteen-parameter rank-49 <4,4,4> family"});
  v.push_back({"fam-444-r49-cs-5p", CatalogKind::CsFamily, {4, 4, 4}, 49, 5,
               "families/444_r49_cs_5p.fam",
               "five-parameter cyclic-symmetric rank-49 <4,4,4> family "
               "(S=13, T=12)"});
  return v;
}

std::string resolve(const std::string& data_dir, const std::string& rel) {
  std::string dir = data_dir.empty() ? default_data_dir() : data_dir;
  return (std::filesystem::path(dir) / rel).string();
}

}  // namespace

std::vector<CatalogEntry> load_catalog(const std::string& data_dir) {
  std::vector<CatalogEntry> entries = builtin_entries();
  for (const CatalogEntry& e : entries) {
    switch (e.kind) {
      case CatalogKind::DiscretePd: {
        Pd pd = catalog_pd(e, data_dir);
        if (!(pd.dims == e.dims) || pd.rank() != e.rank)
          throw DataError("catalog entry " + e.id + ": shape mismatch");
        MmTensor t = build_mmt(pd.dims);
        if (pd_cost(pd, t) > 1e-20)
          throw DataError("catalog entry " + e.id + ": not exact");
        break;
      }
      case CatalogKind::DiscreteCsPd: {
        CsPd cs = catalog_cspd(e, data_dir);
        Pd pd = expand_cs(cs);
        if (!(pd.dims == e.dims) || pd.rank() != e.rank)
          throw DataError("catalog entry " + e.id + ": shape mismatch");
        MmTensor t = build_mmt(pd.dims);
        if (pd_cost(pd, t) > 1e-20)
          throw DataError("catalog entry " + e.id + ": not exact");
        break;
      }
      case CatalogKind::Family:
      case CatalogKind::CsFamily: {
        FamilyDef def = catalog_family(e, data_dir);
        bool want_cs = e.kind == CatalogKind::CsFamily;
        if (def.cs != want_cs || !(def.dims == e.dims) ||
            def.rank != e.rank || def.param_count() != e.params)
          throw DataError("catalog entry " + e.id + ": shape mismatch");
        break;
      }
    }
  }
  return entries;
}

const CatalogEntry& find_entry(const std::vector<CatalogEntry>& catalog,
                               const std::string& id) {
  for (const CatalogEntry& e : catalog)
    if (e.id == id) return e;
  throw DataError("unknown catalog id: " + id);
}

Pd catalog_pd(const CatalogEntry& e, const std::string& data_dir) {
  if (e.kind != CatalogKind::DiscretePd)
    throw UsageError("catalog entry " + e.id + " is not a plain decomposition");
  if (e.file.empty()) {
    if (e.id == "strassen-222") return classic_222_pd();
    if (e.id == "strassen-444-rec") return pd_power(classic_222_pd(), 2);
    throw DataError("catalog entry " + e.id + ": no built-in constructor");
  }
  return load_pd(resolve(data_dir, e.file));
}

CsPd catalog_cspd(const CatalogEntry& e, const std::string& data_dir) {
  if (e.kind != CatalogKind::DiscreteCsPd)
    throw UsageError("catalog entry " + e.id +
                     " is not a cyclic-symmetric decomposition");
  if (e.file.empty()) {
    if (e.id == "strassen-222-cs") return classic_222_cs();
    throw DataError("catalog entry " + e.id + ": no built-in constructor");
  }
  return load_cspd(resolve(data_dir, e.file));
}

FamilyDef catalog_family(const CatalogEntry& e, const std::string& data_dir) {
  if (e.kind != CatalogKind::Family && e.kind != CatalogKind::CsFamily)
    throw UsageError("catalog entry " + e.id + " is not a family");
  return load_family(resolve(data_dir, e.file));
}

Pd classic_222_pd() {
  Pd pd;
  pd.dims = {2, 2, 2};
  pd.U.resize(4, 7);
  pd.V.resize(4, 7);
  pd.W.resize(4, 7);
  // Column r holds the coefficients of product r: U for the left operand,
  // V for the right, W for scattering the product into the result (slices
  // vectorized column-major, W slices transposed — see types.hpp).
  pd.U << 1, 0, 1, 0, 1, -1, 0,  //
      0, 1, 0, 0, 0, 1, 0,       //
      0, 0, 0, 0, 1, 0, 1,       //
      1, 1, 0, 1, 0, 0, -1;
  pd.V << 1, 1, 0, -1, 0, 1, 0,  //
      0, 0, 0, 1, 0, 0, 1,       //
      0, 0, 1, 0, 0, 1, 0,       //
      1, 0, -1, 0, 1, 0, 1;
  pd.W << 1, 0, 0, 1, -1, 0, 1,  //
      0, 0, 1, 0, 1, 0, 0,       //
      0, 1, 0, 1, 0, 0, 0,       //
      1, -1, 1, 0, 0, 1, 0;
  return pd;
}

CsPd classic_222_cs() {
  // The classic decomposition is a column permutation of a cyclic-symmetric
  // arrangement: one symmetric column plus two orbits.
  CsPd cs;
  cs.m = 2;
  cs.A.resize(4, 1);
  cs.B.resize(4, 2);
  cs.C.resize(4, 2);
  cs.D.resize(4, 2);
  cs.A << 1, 0, 0, 1;
  cs.B << 0, 1,  //
      0, 0,      //
      0, 0,      //
      1, 0;
  cs.C << 1, 0,  //
      0, 1,      //
      1, 0,      //
      0, 1;
  cs.D << -1, 0,  //
      1, 0,       //
      0, 1,       //
      0, -1;
  return cs;
}

Pd pd_power(const Pd& base, int levels) {
  base.check();
  if (levels < 1) throw UsageError("pd_power: levels must be >= 1");
  Pd acc = base;
  for (int l = 1; l < levels; ++l) acc = pd_kron(acc, base);
  return acc;
}

Pd MergeFamily::at(double a, double b) const {
  double det = 1.0 - a * b;
  if (std::abs(det) <= 1e-12)
    throw NumericalError("two-term merge is singular at a*b = 1");
  Pd out = base;
  Vec vi = base.V.col(i), vj = base.V.col(j);
  Vec wi = base.W.col(i), wj = base.W.col(j);
  out.U.col(i) /= det;
  out.U.col(j) /= det;
  out.V.col(i) = vi + a * vj;
  out.V.col(j) = vj + b * vi;
  out.W.col(i) = wi - b * wj;
  out.W.col(j) = wj - a * wi;
  return out;
}

MergeFamily two_term_merge(const Pd& pd, int i, int j, double tol) {
  pd.check();
  int R = pd.rank();
  if (i < 0 || j < 0 || i >= R || j >= R || i == j)
    throw UsageError("two_term_merge: column indices out of range");
  Vec ui = pd.U.col(i), uj = pd.U.col(j);
  double nii = ui.squaredNorm();
  if (nii == 0.0) throw UsageError("two_term_merge: U column i is zero");
  double c = ui.dot(uj) / nii;
  if ((uj - c * ui).norm() > tol * std::max(1.0, uj.norm()))
    throw UsageError("two_term_merge: U columns are not collinear");
  MergeFamily fam;
  fam.base = pd;
  fam.i = i;
  fam.j = j;
  // Fold the collinearity factor into V so both columns share u exactly.
  fam.base.U.col(j) = ui;
  fam.base.V.col(j) *= c;
  return fam;
}

Pd two_term_merge(const Pd& pd, int i, int j, double a, double b) {
  return two_term_merge(pd, i, j).at(a, b);
}

int parameter_count_bound(const Pd& pd, const std::vector<Index>& pinned,
                          double rel_tol) {
  pd.check();
  Index N = x_size(pd.dims, pd.rank());
  Mat J = pd_jacobian(pd);
  Mat M(J.rows() + static_cast<Index>(pinned.size()), N);
  M.topRows(J.rows()) = J;
  M.bottomRows(static_cast<Index>(pinned.size())).setZero();
  for (std::size_t k = 0; k < pinned.size(); ++k) {
    Index idx = pinned[k];
    if (idx < 0 || idx >= N)
      throw UsageError("parameter_count_bound: pinned index out of range");
    M(J.rows() + static_cast<Index>(k), idx) = 1.0;
  }
  RankReport rr = numerical_rank(M, rel_tol);
  // Nullity of the stacked matrix, minus the 2R scaling directions that are
  // always present (and never violate the pins).
  int bound = static_cast<int>(M.cols()) - rr.rank - 2 * pd.rank();
  return bound;
}

}  // namespace fmm
