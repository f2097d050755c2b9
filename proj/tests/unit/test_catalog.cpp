// SPDX-License-Identifier: MIT
//
// Tests for the built-in catalog: classic constructions, shipped data files,
// term merging, and the parameter-count bound.

#include "fmmkit/catalog.hpp"

#include "fmmkit/linalg.hpp"
#include "fmmkit/mmt.hpp"
#include "fmmkit/rng.hpp"
#include "fmmkit/seeding.hpp"
#include "fmmkit/stability.hpp"
#include "fmmkit/transforms.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

using namespace fmm;

TEST_SUITE("catalog") {

TEST_CASE("classic 2x2x2 scheme is exact, discrete, and rank 7") {
  Pd pd = classic_222_pd();
  CHECK(pd.dims == Dims{2, 2, 2});
  CHECK(pd.rank() == 7);
  CHECK(pd_cost(pd, build_mmt(pd.dims)) < 1e-28);
  for (const Mat* M : {&pd.U, &pd.V, &pd.W})
    CHECK(((M->array() == 0.0) || (M->array().abs() == 1.0)).all());
}

TEST_CASE("symmetric arrangement expands to an equivalent scheme") {
  CsPd cs = classic_222_cs();
  CHECK(cs.S() == 1);
  CHECK(cs.T() == 2);
  Pd pd = expand_cs(cs);
  CHECK(pd_cost(pd, build_mmt(pd.dims)) < 1e-28);
  CHECK(fingerprints_match(fingerprint(pd), fingerprint(classic_222_pd())));
}

TEST_CASE("Kronecker powers") {
  Pd pd2 = pd_power(classic_222_pd(), 2);
  CHECK(pd2.dims == Dims{4, 4, 4});
  CHECK(pd2.rank() == 49);
  CHECK(pd_cost(pd2, build_mmt(pd2.dims)) < 1e-24);
  CHECK(pd_power(classic_222_pd(), 1).rank() == 7);
  CHECK_THROWS_AS((void)pd_power(classic_222_pd(), 0), UsageError);
}

TEST_CASE("catalog loads and validates every shipped entry") {
  std::vector<CatalogEntry> cat = load_catalog();
  CHECK(cat.size() == 9);
  for (const char* id :
       {"strassen-222", "strassen-444-rec", "strassen-222-cs", "cs-s4t1-222",
        "fam-333-r23-2p", "fam-333-r23-9p", "fam-345-r47-3p",
        "fam-444-r49-13p", "fam-444-r49-cs-5p"}) {
    const CatalogEntry& e = find_entry(cat, id);
    CHECK(e.id == id);
  }
  CHECK_THROWS_AS((void)find_entry(cat, "no-such-entry"), DataError);

  const CatalogEntry& strassen = find_entry(cat, "strassen-222");
  CHECK(strassen.kind == CatalogKind::DiscretePd);
  CHECK(catalog_pd(strassen).rank() == 7);
  // Kind mismatches are call errors, not data errors.
  CHECK_THROWS_AS((void)catalog_family(strassen), UsageError);
  CHECK_THROWS_AS((void)catalog_cspd(strassen), UsageError);

  const CatalogEntry& rec = find_entry(cat, "strassen-444-rec");
  CHECK(rec.kind == CatalogKind::DiscretePd);
  Pd rec_pd = catalog_pd(rec);
  CHECK(rec_pd.dims == Dims{4, 4, 4});
  CHECK(rec_pd.rank() == 49);

  const CatalogEntry& fam = find_entry(cat, "fam-333-r23-9p");
  CHECK(fam.kind == CatalogKind::Family);
  CHECK(fam.params == 9);
  CHECK(catalog_family(fam).param_count() == 9);
  CHECK_THROWS_AS((void)catalog_pd(fam), UsageError);
}

TEST_CASE("shipped families evaluate exactly at admissible points") {
  std::vector<CatalogEntry> cat = load_catalog();
  Rng rng(2024);
  for (const CatalogEntry& e : cat) {
    if (e.kind != CatalogKind::Family && e.kind != CatalogKind::CsFamily)
      continue;
    FamilyDef def = catalog_family(e);
    MmTensor t = build_mmt(def.dims);
    for (int trial = 0; trial < 3; ++trial) {
      Vec p = sample_admissible(def, rng);
      Pd pd = eval_family(def, p);
      CHECK(pd.rank() == e.rank);
      CHECK(pd_cost(pd, t) < 1e-16);
    }
  }
}

TEST_CASE("orientation changes the stability measures of the rank-47 family") {
  std::vector<CatalogEntry> cat = load_catalog();
  FamilyDef def = catalog_family(find_entry(cat, "fam-345-r47-3p"));
  REQUIRE(def.dims == Dims{3, 4, 5});
  REQUIRE(def.param_count() == 3);

  // Native orientation at its preferred parameters (a, b, c) = (1, 2, 1/2).
  Vec opt(3);
  opt << 1.0, 2.0, 0.5;
  Pd tuned = eval_family(def, opt);
  REQUIRE(pd_cost(tuned, build_mmt(tuned.dims)) < 1e-20);
  CHECK(q_factor(tuned) == 20);
  CHECK(e_factor(tuned) == doctest::Approx(66.0).epsilon(1e-12));

  // <3,4,5> → <4,3,5>: transpose, then rotate the modes right.  At all-ones
  // parameters this orientation reaches a different optimum.
  Pd native = eval_family(def, Vec::Ones(3));
  Pd rotated = permute_pd(transpose_family_pd(native), Cycle::Right);
  REQUIRE(rotated.dims == Dims{4, 3, 5});
  REQUIRE(pd_cost(rotated, build_mmt(rotated.dims)) < 1e-20);
  CHECK(q_factor(rotated) == 18);
  CHECK(e_factor(rotated) == doctest::Approx(75.0).epsilon(1e-12));
}

TEST_CASE("two-term merge: collinear columns open a two-parameter family") {
  Dims d{2, 2, 2};
  MmTensor t = build_mmt(d);
  std::vector<int> all(8);
  std::iota(all.begin(), all.end(), 0);
  Pd base = trivial_ones_start(t, all);

  // The naive scheme reuses each u vector; find one collinear pair.
  int ci = -1, cj = -1;
  for (int i = 0; i < 8 && ci < 0; ++i)
    for (int j = i + 1; j < 8 && ci < 0; ++j) {
      Vec ui = base.U.col(i), uj = base.U.col(j);
      if ((ui * uj.dot(ui) / ui.squaredNorm() - uj).norm() < 1e-12) {
        ci = i;
        cj = j;
      }
    }
  REQUIRE(ci >= 0);

  MergeFamily fam = two_term_merge(base, ci, cj);
  Pd at0 = fam.at(0.0, 0.0);
  CHECK(pd_cost(at0, t) < 1e-28);
  Pd at = fam.at(0.3, -0.7);
  CHECK(pd_cost(at, t) < 1e-25);
  CHECK((at.U.col(ci) - at.U.col(cj)).norm() < 1e-12);
  CHECK_THROWS_AS((void)fam.at(2.0, 0.5), NumericalError);

  // The one-shot form evaluates the same family.
  Pd shot = two_term_merge(base, ci, cj, 0.3, -0.7);
  CHECK((shot.U - at.U).norm() == 0.0);
  CHECK((shot.V - at.V).norm() == 0.0);
  CHECK((shot.W - at.W).norm() == 0.0);

  // Collinear but unequal columns still merge: fold the ratio into V.
  Pd scaled = base;
  scaled.U.col(cj) *= 2.0;
  scaled.V.col(cj) *= 0.5;
  REQUIRE(pd_cost(scaled, t) < 1e-28);
  MergeFamily fam2 = two_term_merge(scaled, ci, cj);
  CHECK(pd_cost(fam2.at(0.0, 0.0), t) < 1e-28);
  CHECK(pd_cost(fam2.at(-0.4, 0.25), t) < 1e-25);

  // The classic scheme has no collinear U columns.
  CHECK_THROWS_AS((void)two_term_merge(classic_222_pd(), 0, 1), UsageError);
}

TEST_CASE("parameter-count bound matches a direct computation") {
  Pd pd = classic_222_pd();
  const int R = pd.rank();
  Vec x = pack(pd);

  // Pin every zero entry of the factors.
  std::vector<Index> pinned;
  for (Index i = 0; i < x.size(); ++i)
    if (x[i] == 0.0) pinned.push_back(i);

  // Direct computation: stack the decomposition Jacobian with one row per
  // pinned coordinate, take the nullity, discount the 2R column-scaling
  // directions.
  Mat J = pd_jacobian(pd);
  Mat M = Mat::Zero(J.rows() + static_cast<Index>(pinned.size()), J.cols());
  M.topRows(J.rows()) = J;
  for (std::size_t k = 0; k < pinned.size(); ++k)
    M(J.rows() + static_cast<Index>(k), pinned[k]) = 1.0;
  int expected =
      static_cast<int>(M.cols()) - numerical_rank(M).rank - 2 * R;

  int bound = parameter_count_bound(pd, pinned);
  CHECK(bound == expected);
  // Two-parameter families through this point are known, so the bound must
  // leave room for them.
  CHECK(bound >= 2);

  // Without pins the bound is the plain Jacobian nullity less the scaling
  // directions; dropping constraints can only widen it.
  int free_bound = parameter_count_bound(pd, {});
  CHECK(free_bound ==
        static_cast<int>(J.cols()) - numerical_rank(J).rank - 2 * R);
  CHECK(free_bound >= bound);
}

TEST_CASE("family files list exactly the nonzero positions") {
  std::vector<CatalogEntry> cat = load_catalog();
  FamilyDef def = catalog_family(find_entry(cat, "fam-333-r23-2p"));
  Rng rng(7);
  Pd pd = eval_family(def, sample_admissible(def, rng));
  auto nnz = [](const Mat& M) {
    return static_cast<std::size_t>((M.array() != 0.0).count());
  };
  CHECK(nnz(pd.U) + nnz(pd.V) + nnz(pd.W) == def.entries.size());
}

TEST_CASE("parameter-count bound admits the two-parameter family") {
  std::vector<CatalogEntry> cat = load_catalog();
  FamilyDef def = catalog_family(find_entry(cat, "fam-333-r23-2p"));
  Rng rng(11);
  Pd pd = eval_family(def, sample_admissible(def, rng));
  Vec x = pack(pd);
  std::vector<Index> pinned;
  for (Index i = 0; i < x.size(); ++i)
    if (x[i] == 0.0) pinned.push_back(i);
  // The family itself moves two directions inside this sparsity pattern.
  CHECK(parameter_count_bound(pd, pinned) >= 2);
}

TEST_CASE("data directory resolution honors the environment override") {
  CHECK_THROWS_AS((void)load_catalog("/nonexistent/data"), DataError);
  CHECK(!default_data_dir().empty());
}

}  // TEST_SUITE
