// SPDX-License-Identifier: MIT
//
// Starting-point generators: shapes, exact start costs, combinatorics of the
// trivial starts, and the support structure of zero-out starts.

#include "fmmkit/catalog.hpp"
#include "fmmkit/mmt.hpp"
#include "fmmkit/rng.hpp"
#include "fmmkit/seeding.hpp"

#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <set>

using namespace fmm;

TEST_SUITE_BEGIN("seeding");

TEST_CASE("gaussian start has the right shape and scale") {
  Rng rng(71);
  Dims d{3, 4, 2};
  Pd pd = gaussian_start(d, 9, 0.01, rng);
  CHECK(pd.dims == d);
  CHECK(pd.rank() == 9);
  CHECK(pd.U.rows() == d.mp());
  CHECK(pd.V.rows() == d.pn());
  CHECK(pd.W.rows() == d.mn());
  CHECK(pack(pd).cwiseAbs().maxCoeff() < 0.1);  // ~N(0, 0.01^2)
}

TEST_CASE("a full trivial start reproduces the naive algorithm exactly") {
  Dims d{2, 2, 2};
  MmTensor t = build_mmt(d);
  std::vector<int> all(static_cast<std::size_t>(d.mpn()));
  for (int i = 0; i < d.mpn(); ++i) all[static_cast<std::size_t>(i)] = i;
  Pd pd = trivial_ones_start(t, all);
  CHECK(pd.rank() == d.mpn());
  CHECK(pd_cost(pd, t) < 1e-30);
}

TEST_CASE("partial trivial starts cost exactly half the uncovered entries") {
  Dims d{3, 3, 3};
  MmTensor t = build_mmt(d);
  Rng rng(72);
  for (int R : {23, 25, 27}) {
    Pd pd = trivial_ones_start(t, R, rng);
    CHECK(pd_cost(pd, t) == doctest::Approx(0.5 * (d.mpn() - R)).epsilon(1e-14));
  }
}

TEST_CASE("trivial start validation") {
  MmTensor t = build_mmt({2, 2, 2});
  CHECK_THROWS_AS(trivial_ones_start(t, std::vector<int>{3, 3}), UsageError);
  CHECK_THROWS_AS(trivial_ones_start(t, std::vector<int>{5, 3}), UsageError);
  CHECK_THROWS_AS(trivial_ones_start(t, std::vector<int>{0, 99}), UsageError);
}

TEST_CASE("number of trivial starts") {
  CHECK(trivial_start_count({2, 2, 2}, 7) == 8.0);     // C(8,7)
  CHECK(trivial_start_count({2, 2, 2}, 8) == 1.0);     // C(8,8)
  CHECK(trivial_start_count({3, 3, 3}, 23) == 17550.0);  // C(27,23)
  CHECK(trivial_start_count({3, 3, 3}, 22) == 80730.0);  // C(27,22)
}

TEST_CASE("random combinations are sorted, distinct, in range") {
  Rng rng(73);
  for (int rep = 0; rep < 50; ++rep) {
    auto pick = sample_combination(rng, 27, 23);
    REQUIRE(pick.size() == 23);
    std::set<int> uniq(pick.begin(), pick.end());
    CHECK(uniq.size() == 23);
    CHECK(*pick.begin() >= 0);
    CHECK(pick.back() < 27);
    CHECK(std::is_sorted(pick.begin(), pick.end()));
  }
}

TEST_CASE("zero-out start keeps a generator for every unit entry") {
  Pd known = classic_222_pd();
  MmTensor t = build_mmt(known.dims);
  Pd zo = zero_out_start(known, t);
  // Support is a subset of the original support.
  for (Index i = 0; i < zo.U.size(); ++i)
    if (zo.U.data()[i] != 0.0) CHECK(zo.U.data()[i] == known.U.data()[i]);
  // Every unit entry of the tensor keeps at least one active term.
  for (const auto& one : t.ones) {
    bool covered = false;
    for (int r = 0; r < zo.rank() && !covered; ++r)
      covered = zo.U(one[0], r) != 0.0 && zo.V(one[1], r) != 0.0 &&
                zo.W(one[2], r) != 0.0;
    CHECK(covered);
  }
  // It is a genuine start, not the solution: strictly sparser than known.
  int nnz_known = 0, nnz_zo = 0;
  for (Index i = 0; i < known.U.size(); ++i) {
    nnz_known += known.U.data()[i] != 0.0;
    nnz_zo += zo.U.data()[i] != 0.0;
  }
  CHECK(nnz_zo < nnz_known);
}

TEST_CASE("perturbation displaces by about the requested scale") {
  Rng rng(74);
  Pd known = classic_222_pd();
  Pd moved = perturb_known(known, 1e-3, rng);
  Vec diff = pack(moved) - pack(known);
  CHECK(diff.cwiseAbs().maxCoeff() < 1e-2);
  CHECK(diff.cwiseAbs().maxCoeff() > 1e-5);
  CHECK(diff.norm() / std::sqrt(static_cast<double>(diff.size())) ==
        doctest::Approx(1e-3).epsilon(0.5));
}

TEST_SUITE_END();
