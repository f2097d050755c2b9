// SPDX-License-Identifier: MIT
//
// seeding.hpp — starting points for the numerical searches.
//
// Four families of starts, ordered roughly data-free → data-heavy:
//  * Gaussian: all entries i.i.d. N(0, scale²).
//  * Trivial: R of the mpn rank-one unit terms of the naive algorithm
//    (e_i ⊗ e_j ⊗ e_k per unit tensor entry); the remaining mpn − R unit
//    entries are uncovered, so the starting cost is (mpn − R)/2.
//  * Zero-out: a known decomposition stripped down to the entries that
//    generate the tensor's unit entries (each unit entry keeps its strongest
//    contributing term).
//  * Perturb: a known decomposition plus elementwise Gaussian noise.

#pragma once

#include "fmmkit/mmt.hpp"
#include "fmmkit/rng.hpp"

#include <vector>

namespace fmm {

Pd gaussian_start(const Dims& dims, int R, double scale, Rng& rng);

// Columns = the unit rank-one terms of t selected by `pick` (0-based indices
// into t.ones, strictly increasing, |pick| = R).
Pd trivial_ones_start(const MmTensor& t, const std::vector<int>& pick);
// Random R-subset of the mpn unit terms.
Pd trivial_ones_start(const MmTensor& t, int R, Rng& rng);

// Number of distinct trivial starts, C(mpn, R), exactly while it fits a
// double (+inf on overflow).
double trivial_start_count(const Dims& dims, int R);

// Sorted random k-subset of {0, …, n−1}.
std::vector<int> sample_combination(Rng& rng, int n, int k);

// For each unit entry of t, find the term r with the largest contribution
// |u_r(i)·v_r(j)·w_r(k)| (ties: smallest r) and keep that term's three
// supporting entries; zero everything else.  The result reproduces every
// unit entry's generator support but usually not the cancellation structure,
// giving a start that is close in support and far in value.
Pd zero_out_start(const Pd& known, const MmTensor& t);

// known + scale·N(0,1) elementwise.
Pd perturb_known(const Pd& known, double scale, Rng& rng);

}  // namespace fmm
