// SPDX-License-Identifier: MIT
//
// Equivalence transformations: they must stay on the tensor (exactness
// preserved) and leave the fingerprint invariants unchanged.

#include "fmmkit/catalog.hpp"
#include "fmmkit/mmt.hpp"
#include "fmmkit/rng.hpp"
#include "fmmkit/seeding.hpp"
#include "fmmkit/transforms.hpp"

#include "doctest.h"
#include "test_support.hpp"

using namespace fmm;

TEST_SUITE_BEGIN("transforms");

TEST_CASE("sandwich transform preserves exactness") {
  Rng rng(51);
  Pd pd = classic_222_pd();
  MmTensor t = build_mmt(pd.dims);
  for (int rep = 0; rep < 5; ++rep) {
    PqrTriple g = PqrTriple::random(pd.dims, rng);
    Pd moved = pqr_transform(pd, g);
    CHECK(pd_cost(moved, t) < 1e-22);
  }
}

TEST_CASE("sandwich transform preserves the Jacobian rank") {
  Rng rng(52);
  Pd pd = classic_222_pd();
  int base_rank = jacobian_rank(pd).rank;
  CHECK(base_rank == 61);
  for (int rep = 0; rep < 5; ++rep) {
    PqrTriple g = PqrTriple::random(pd.dims, rng);
    CHECK(jacobian_rank(pqr_transform(pd, g)).rank == base_rank);
  }
}

TEST_CASE("identity triple is a no-op") {
  Pd pd = classic_222_pd();
  Pd same = pqr_transform(pd, PqrTriple::identity(pd.dims));
  CHECK((pack(same) - pack(pd)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("column scaling preserves exactness and traces") {
  Rng rng(53);
  Pd pd = classic_222_pd();
  MmTensor t = build_mmt(pd.dims);
  Vec alpha = rng.uniform_vec(7, 0.5, 2.0);
  Vec beta = rng.uniform_vec(7, 0.5, 2.0);
  Pd scaled = scale_columns(pd, alpha, beta);
  CHECK(pd_cost(scaled, t) < 1e-24);
  Fingerprint fa = fingerprint(pd);
  Fingerprint fb = fingerprint(scaled);
  CHECK(fingerprints_match(fa, fb));

  Vec bad = alpha;
  bad[3] = 0.0;
  CHECK_THROWS_AS(scale_columns(pd, bad, beta), NumericalError);
}

TEST_CASE("transpose and cyclic transforms stay on the cubic tensor") {
  Pd pd = classic_222_pd();
  MmTensor t = build_mmt(pd.dims);
  CHECK(pd_cost(transpose_transform(pd), t) < 1e-24);
  CHECK(pd_cost(cyclic_transform(pd, Cycle::Left), t) < 1e-24);
  CHECK(pd_cost(cyclic_transform(pd, Cycle::Right), t) < 1e-24);

  Rng rng(54);
  Pd non_cubic = gaussian_start({2, 3, 4}, 5, 1.0, rng);
  CHECK_THROWS_AS(transpose_transform(non_cubic), UsageError);
  CHECK_THROWS_AS(cyclic_transform(non_cubic, Cycle::Left), UsageError);
}

TEST_CASE("fingerprints match across the whole equivalence group") {
  Rng rng(55);
  Pd pd = classic_222_pd();
  Fingerprint base = fingerprint(pd);
  PqrTriple g = PqrTriple::random(pd.dims, rng);
  for (const Pd& other :
       {pqr_transform(pd, g), transpose_transform(pd),
        cyclic_transform(pd, Cycle::Left),
        scale_columns(pd, rng.uniform_vec(7, 0.5, 2.0),
                      rng.uniform_vec(7, 0.5, 2.0))}) {
    CHECK(fingerprints_match(base, fingerprint(other)));
  }
}

TEST_CASE("fingerprints separate inequivalent decompositions") {
  Rng rng(56);
  Pd pd = classic_222_pd();
  Pd random_pd = gaussian_start({2, 2, 2}, 7, 1.0, rng);
  CHECK_FALSE(fingerprints_match(fingerprint(pd), fingerprint(random_pd)));
}

TEST_CASE("trace multiset of the classic decomposition") {
  // tr(U_r V_r W_r) per column; invariant under scaling and sandwiching.
  Fingerprint f = fingerprint(classic_222_pd());
  REQUIRE(f.traces.size() == 7);
  double sum = 0;
  for (double tr : f.traces) sum += tr;
  // The trace sum equals tr over the whole bilinear map: m*p*n... for the
  // classic algorithm the individual traces are integers.
  for (double tr : f.traces)
    CHECK(std::abs(tr - std::round(tr)) < 1e-12);
  CHECK(sum == doctest::Approx(8.0));
}

TEST_CASE("integer-trace test accepts the classic algorithm") {
  DiscreteCheck c = discretizable_necessary(classic_222_pd());
  CHECK(c.pass);
  CHECK(c.max_deviation < 1e-12);
}

TEST_CASE("integer-trace test rejects a decomposition with scaled traces") {
  Pd pd = classic_222_pd();
  pd.U.col(0) *= 1.3;  // trace of term 0 becomes 2.6
  DiscreteCheck c = discretizable_necessary(pd);
  CHECK_FALSE(c.pass);
  CHECK(c.max_deviation > 0.25);
}

TEST_SUITE_END();
