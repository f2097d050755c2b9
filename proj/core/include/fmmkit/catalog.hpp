// SPDX-License-Identifier: MIT
//
// catalog.hpp — the built-in collection of known decompositions and
// parametric families, plus structural constructions on top of them.
//
// Data files live in the library's data directory (resolved from the
// FMMKIT_DATA_DIR environment variable, the source tree, or the install
// tree, in that order); classic exact constructions are built in code.

#pragma once

#include "fmmkit/cs.hpp"
#include "fmmkit/family.hpp"
#include "fmmkit/mmt.hpp"

#include <string>
#include <vector>

namespace fmm {

enum class CatalogKind { DiscretePd, DiscreteCsPd, Family, CsFamily };

const char* to_string(CatalogKind k);

struct CatalogEntry {
  std::string id;
  CatalogKind kind = CatalogKind::DiscretePd;
  Dims dims;
  int rank = 0;
  int params = 0;        // family parameter count (0 for discrete entries)
  std::string file;      // relative to the data directory; "" = built-in
  std::string note;
};

// Data directory resolution (see header comment); throws DataError when no
// candidate exists on disk.
std::string default_data_dir();

// All shipped entries; every file is loaded and validated (shape checks,
// family checksums).  Discrete entries additionally verify exactness.
std::vector<CatalogEntry> load_catalog(const std::string& data_dir = "");

const CatalogEntry& find_entry(const std::vector<CatalogEntry>& catalog,
                               const std::string& id);

// Materialize an entry (kind must match the call).
Pd catalog_pd(const CatalogEntry& e, const std::string& data_dir = "");
CsPd catalog_cspd(const CatalogEntry& e, const std::string& data_dir = "");
FamilyDef catalog_family(const CatalogEntry& e,
                         const std::string& data_dir = "");

// Classic exact rank-7 decomposition of <2,2,2> (integer entries in
// {−1,0,1}), the base case of every construction here.
Pd classic_222_pd();
// The same algorithm arranged cyclic-symmetrically with S = 1, T = 2.
CsPd classic_222_cs();
// L-fold Kronecker power: rank R^L decomposition of <m^L, p^L, n^L>.
Pd pd_power(const Pd& base, int levels);

// Two terms i ≠ j sharing a (collinear) U column merge into a two-parameter
// family that stays exact wherever a·b ≠ 1:
//   term_i → u ⊗ (v_i + a·v_j) ⊗ (w_i − b·w_j) / (1 − ab)
//   term_j → u ⊗ (v_j + b·v_i) ⊗ (w_j − a·w_i) / (1 − ab)
// (a = b = 0 reproduces the original decomposition).
struct MergeFamily {
  Pd base;
  int i = 0, j = 0;
  Pd at(double a, double b) const;  // throws NumericalError when a·b ≈ 1
};
// Throws UsageError unless U columns i and j are collinear.
MergeFamily two_term_merge(const Pd& pd, int i, int j, double tol = 1e-9);
// One-shot evaluation of the merge family at (a, b).
Pd two_term_merge(const Pd& pd, int i, int j, double a, double b);

// Upper bound on the number of independent parameters any exact family
// through pd can have while keeping the pinned entries zero:
//   nullity(M) − 2R,   M = [J; rows pinning x(I)],
// discounting the 2R column-scaling degrees of freedom.
int parameter_count_bound(const Pd& pd, const std::vector<Index>& pinned,
                          double rel_tol = -1.0);

}  // namespace fmm
