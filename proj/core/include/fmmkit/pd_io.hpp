// SPDX-License-Identifier: MIT
//
// pd_io.hpp — plain-text interchange formats.
//
// Decomposition (.pd):
//   fmm-pd v1
//   <m> <p> <n> <R>
//   U            (mp lines of R entries)
//   V            (pn lines)
//   W            (mn lines)
// Cyclic-symmetric decomposition (.cspd):
//   fmm-cspd v1
//   <m> <S> <T>
//   A            (m² lines of S entries)
//   B  C  D      (m² lines of T entries each)
// Entries are integers, rationals "p/q", or decimals; '#' starts a comment;
// blank lines are ignored.  Writers emit integers without a decimal point
// and everything else with 17 significant digits (lossless round-trip).

#pragma once

#include "fmmkit/cs.hpp"
#include "fmmkit/types.hpp"

#include <iosfwd>
#include <string>

namespace fmm {

Pd read_pd(std::istream& in, const std::string& display_name = "<stream>");
Pd load_pd(const std::string& path);
void write_pd(std::ostream& os, const Pd& pd, const std::string& comment = "");
void save_pd(const std::string& path, const Pd& pd,
             const std::string& comment = "");

CsPd read_cspd(std::istream& in, const std::string& display_name = "<stream>");
CsPd load_cspd(const std::string& path);
void write_cspd(std::ostream& os, const CsPd& cs,
                const std::string& comment = "");
void save_cspd(const std::string& path, const CsPd& cs,
               const std::string& comment = "");

// Number formatting shared by the writers: exact integers as integers,
// everything else via %.17g.
std::string format_entry(double v);

}  // namespace fmm
