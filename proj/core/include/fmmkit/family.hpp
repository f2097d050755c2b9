// SPDX-License-Identifier: MIT
//
// family.hpp — parametric decomposition families: every factor entry is an
// arithmetic expression in named parameters (plus derived intermediates),
// with exclusion expressions that must stay nonzero for the family to be
// defined.  Families are stored as plain text:
//
//   fmm-family v1
//   name   <identifier>
//   dims   <m> <p> <n>
//   rank   <R>
//   # cyclic-symmetric families carry "cs <S> <T>" and use factors A,B,C,D
//   params <p1> <p2> ...
//   derive <name> <expr>        (evaluated in order, may use earlier ones)
//   exclude <expr>              (admissible points keep every exclusion ≠ 0)
//   entry  <U|V|W> <row> <col> <expr>     (1-based; omitted entries are 0)
//   checksum fnv1a64 <16 hex digits>
//   end
//
// The checksum is FNV-1a 64 over every non-comment, non-blank line from the
// magic line up to (excluding) the checksum line, each right-trimmed and
// '\n'-terminated; the loader recomputes and rejects mismatches, guarding
// hand-maintained coefficient tables against silent corruption.

#pragma once

#include "fmmkit/cs.hpp"
#include "fmmkit/expr.hpp"
#include "fmmkit/rng.hpp"
#include "fmmkit/types.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fmm {

struct FamilyEntry {
  int factor = 0;  // 0,1,2 = U,V,W; for CS families 0..3 = A,B,C,D
  int row = 0, col = 0;  // 0-based in memory (1-based in files)
  ExprPtr expr;
};

struct FamilyDef {
  std::string name;
  Dims dims;
  int rank = 0;
  bool cs = false;
  int cs_S = 0, cs_T = 0;
  std::vector<std::string> params;
  std::vector<std::pair<std::string, ExprPtr>> derived;  // ordered
  std::vector<ExprPtr> exclusions;
  std::vector<FamilyEntry> entries;
  std::uint64_t checksum = 0;

  int param_count() const { return static_cast<int>(params.size()); }
};

// verify_checksum = false skips the integrity check (used to re-canonicalize
// hand-prepared files; write_family always emits a correct checksum).
FamilyDef parse_family(std::istream& in, const std::string& display_name,
                       bool verify_checksum = true);
FamilyDef load_family(const std::string& path, bool verify_checksum = true);
void write_family(std::ostream& os, const FamilyDef& def);

// FNV-1a 64 over the canonical content lines (see header comment).
std::uint64_t family_checksum(const FamilyDef& def);

// Parameter vector (declared order) → name/value environment.
std::map<std::string, double> param_env(const FamilyDef& def, const Vec& p);

// Evaluates derived values and entries; throws NumericalError when an
// exclusion value falls below hard_margin in magnitude (point outside the
// family's domain), DataError when parameters are missing/mismatched.
Pd eval_family(const FamilyDef& def, const std::map<std::string, double>& env,
               double hard_margin = 1e-12);
Pd eval_family(const FamilyDef& def, const Vec& p, double hard_margin = 1e-12);
// CS families only: the reduced form.
CsPd eval_family_cs(const FamilyDef& def, const Vec& p,
                    double hard_margin = 1e-12);

// min over exclusions of |value| (+inf when there are none); NaN when a
// derived value fails to evaluate.
double exclusion_margin(const FamilyDef& def,
                        const std::map<std::string, double>& env);

// Random parameter vector with margin ≥ min_margin and finite, bounded
// entries: magnitudes uniform on [lo, hi] with random sign.  Throws
// NumericalError when max_tries samples all fail.
Vec sample_admissible(const FamilyDef& def, Rng& rng, double lo = 0.25,
                      double hi = 2.0, double min_margin = 0.05,
                      int max_tries = 1000);

}  // namespace fmm
