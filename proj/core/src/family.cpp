// SPDX-License-Identifier: MIT

#include "fmmkit/family.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

namespace fmm {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_line(std::uint64_t& h, const std::string& line) {
  for (unsigned char c : line) {
    h ^= c;
    h *= kFnvPrime;
  }
  h ^= static_cast<unsigned char>('\n');
  h *= kFnvPrime;
}

[[noreturn]] void fail(const std::string& name, int lineno,
                       const std::string& what) {
  throw DataError(name + ":" + std::to_string(lineno) + ": " + what);
}

std::string canonical_line(const FamilyEntry& e, bool cs) {
  static const char* pd_facs = "UVW";
  static const char* cs_facs = "ABCD";
  std::string fac(1, cs ? cs_facs[e.factor] : pd_facs[e.factor]);
  return "entry " + fac + " " + std::to_string(e.row + 1) + " " +
         std::to_string(e.col + 1) + " " + to_string(e.expr);
}

int factor_index(const std::string& tok, bool cs, const std::string& name,
                 int lineno) {
  const std::string facs = cs ? "ABCD" : "UVW";
  if (tok.size() == 1) {
    std::size_t i = facs.find(tok[0]);
    if (i != std::string::npos) return static_cast<int>(i);
  }
  fail(name, lineno, "bad factor '" + tok + "' (want one of " + facs + ")");
}

}  // namespace

FamilyDef parse_family(std::istream& in, const std::string& name,
                       bool verify_checksum) {
  FamilyDef def;
  def.dims = {0, 0, 0};
  std::string raw;
  int lineno = 0;
  bool saw_magic = false, saw_checksum = false, saw_end = false;
  std::uint64_t hash = kFnvOffset;
  std::uint64_t declared = 0;

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    std::size_t h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    std::size_t b = line.find_last_not_of(" \t\r");
    if (b == std::string::npos) continue;
    line.erase(b + 1);

    std::istringstream ss(line);
    std::string key;
    ss >> key;

    if (!saw_magic) {
      if (line != "fmm-family v1")
        fail(name, lineno, "missing 'fmm-family v1' magic line");
      saw_magic = true;
      fnv_line(hash, line);
      continue;
    }
    if (key == "checksum") {
      std::string algo, hex;
      if (!(ss >> algo >> hex) || algo != "fnv1a64" || hex.size() != 16)
        fail(name, lineno, "bad checksum line (want: checksum fnv1a64 <16 hex>)");
      declared = std::stoull(hex, nullptr, 16);
      saw_checksum = true;
      continue;
    }
    if (key == "end") {
      saw_end = true;
      break;
    }
    if (saw_checksum) fail(name, lineno, "content after checksum line");
    fnv_line(hash, line);

    if (key == "name") {
      if (!(ss >> def.name)) fail(name, lineno, "bad name line");
    } else if (key == "dims") {
      if (!(ss >> def.dims.m >> def.dims.p >> def.dims.n) || !def.dims.valid())
        fail(name, lineno, "bad dims line");
    } else if (key == "rank") {
      if (!(ss >> def.rank) || def.rank < 1) fail(name, lineno, "bad rank line");
    } else if (key == "cs") {
      if (!(ss >> def.cs_S >> def.cs_T) || def.cs_S < 0 || def.cs_T < 0)
        fail(name, lineno, "bad cs line (want: cs S T)");
      def.cs = true;
    } else if (key == "params") {
      std::string p;
      while (ss >> p) def.params.push_back(p);
      if (def.params.empty()) fail(name, lineno, "empty params line");
    } else if (key == "derive") {
      std::string dname;
      if (!(ss >> dname)) fail(name, lineno, "bad derive line");
      std::string rest;
      std::getline(ss, rest);
      try {
        def.derived.emplace_back(dname, parse_expr(rest));
      } catch (const DataError& e) {
        fail(name, lineno, e.what());
      }
    } else if (key == "exclude") {
      std::string rest;
      std::getline(ss, rest);
      try {
        def.exclusions.push_back(parse_expr(rest));
      } catch (const DataError& e) {
        fail(name, lineno, e.what());
      }
    } else if (key == "entry") {
      std::string fac;
      int row, col;
      if (!(ss >> fac >> row >> col)) fail(name, lineno, "bad entry line");
      std::string rest;
      std::getline(ss, rest);
      FamilyEntry e;
      e.factor = factor_index(fac, def.cs, name, lineno);
      e.row = row - 1;
      e.col = col - 1;
      if (e.row < 0 || e.col < 0) fail(name, lineno, "entry indices are 1-based");
      try {
        e.expr = parse_expr(rest);
      } catch (const DataError& ex) {
        fail(name, lineno, ex.what());
      }
      def.entries.push_back(std::move(e));
    } else {
      fail(name, lineno, "unknown keyword '" + key + "'");
    }
  }

  if (!saw_magic) fail(name, lineno, "empty family file");
  if (!saw_end) fail(name, lineno, "missing 'end' line");
  if (!saw_checksum) fail(name, lineno, "missing checksum line");
  if (def.name.empty()) fail(name, lineno, "missing name");
  if (!def.dims.valid()) fail(name, lineno, "missing dims");
  if (def.cs) {
    if (!def.dims.is_cubic()) fail(name, lineno, "cs families must be cubic");
    if (def.rank == 0) def.rank = def.cs_S + 3 * def.cs_T;
    if (def.rank != def.cs_S + 3 * def.cs_T)
      fail(name, lineno, "rank does not equal S + 3T");
  }
  if (def.rank < 1) fail(name, lineno, "missing rank");

  // Shape and uniqueness checks on entries.
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& e : def.entries) {
    Index rows, cols = def.cs ? (e.factor == 0 ? def.cs_S : def.cs_T)
                              : def.rank;
    if (def.cs) {
      rows = static_cast<Index>(def.dims.m) * def.dims.m;
    } else {
      rows = e.factor == 0   ? def.dims.mp()
             : e.factor == 1 ? def.dims.pn()
                             : def.dims.mn();
    }
    if (e.row >= rows || e.col >= cols)
      fail(name, lineno,
           "entry index (" + std::to_string(e.row + 1) + "," +
               std::to_string(e.col + 1) + ") outside factor shape");
    if (!seen.insert({e.factor, e.row, e.col}).second)
      fail(name, lineno,
           "duplicate entry at " + canonical_line(e, def.cs));
  }

  def.checksum = hash;
  if (verify_checksum && hash != declared)
    fail(name, lineno,
         "checksum mismatch: content hashes to " + std::to_string(hash) +
             ", file declares " + std::to_string(declared));
  return def;
}

FamilyDef load_family(const std::string& path, bool verify_checksum) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_family(in, path, verify_checksum);
}

void write_family(std::ostream& os, const FamilyDef& def) {
  std::vector<std::string> lines;
  lines.push_back("fmm-family v1");
  lines.push_back("name " + def.name);
  lines.push_back("dims " + std::to_string(def.dims.m) + " " +
                  std::to_string(def.dims.p) + " " + std::to_string(def.dims.n));
  lines.push_back("rank " + std::to_string(def.rank));
  if (def.cs)
    lines.push_back("cs " + std::to_string(def.cs_S) + " " +
                    std::to_string(def.cs_T));
  std::string ps = "params";
  for (const auto& p : def.params) ps += " " + p;
  lines.push_back(ps);
  for (const auto& [dname, expr] : def.derived)
    lines.push_back("derive " + dname + " " + to_string(expr));
  for (const auto& ex : def.exclusions)
    lines.push_back("exclude " + to_string(ex));
  for (const auto& e : def.entries) lines.push_back(canonical_line(e, def.cs));

  std::uint64_t hash = kFnvOffset;
  for (const auto& l : lines) fnv_line(hash, l);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  for (const auto& l : lines) os << l << "\n";
  os << "checksum fnv1a64 " << hex << "\n" << "end\n";
}

std::uint64_t family_checksum(const FamilyDef& def) {
  std::ostringstream ss;
  write_family(ss, def);
  std::istringstream in(ss.str());
  return parse_family(in, "<memory>").checksum;
}

std::map<std::string, double> param_env(const FamilyDef& def, const Vec& p) {
  if (p.size() != def.param_count())
    throw DataError("family '" + def.name + "' takes " +
                    std::to_string(def.param_count()) + " parameters, got " +
                    std::to_string(p.size()));
  std::map<std::string, double> env;
  for (int i = 0; i < def.param_count(); ++i)
    env[def.params[static_cast<std::size_t>(i)]] = p[i];
  return env;
}

namespace {

// Env with derived values appended; throws on missing or unknown params.
std::map<std::string, double> full_env(const FamilyDef& def,
                                       const std::map<std::string, double>& in) {
  std::map<std::string, double> env = in;
  for (const auto& p : def.params)
    if (env.find(p) == env.end())
      throw DataError("family '" + def.name + "': missing parameter '" + p +
                      "'");
  for (const auto& [k, v] : in)
    if (std::find(def.params.begin(), def.params.end(), k) ==
        def.params.end())
      throw DataError("family '" + def.name + "': unknown parameter '" + k +
                      "'");
  for (const auto& [dname, expr] : def.derived) env[dname] = eval(expr, env);
  return env;
}

}  // namespace

double exclusion_margin(const FamilyDef& def,
                        const std::map<std::string, double>& in) {
  std::map<std::string, double> env;
  try {
    env = full_env(def, in);
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& ex : def.exclusions) {
    double v;
    try {
      v = eval(ex, env);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
    margin = std::min(margin, std::abs(v));
  }
  return margin;
}

Pd eval_family(const FamilyDef& def, const std::map<std::string, double>& in,
               double hard_margin) {
  if (def.cs) {
    // Evaluate the reduced form, then expand.
    Vec p(def.param_count());
    int i = 0;
    for (const auto& name : def.params) {
      auto it = in.find(name);
      if (it == in.end())
        throw DataError("family '" + def.name + "': missing parameter '" +
                        name + "'");
      p[i++] = it->second;
    }
    return expand_cs(eval_family_cs(def, p, hard_margin));
  }
  std::map<std::string, double> env = full_env(def, in);
  double margin = exclusion_margin(def, in);
  if (!(margin > hard_margin))
    throw NumericalError("family '" + def.name +
                         "': parameters violate an exclusion (margin " +
                         std::to_string(margin) + ")");
  Pd pd;
  pd.dims = def.dims;
  pd.U = Mat::Zero(def.dims.mp(), def.rank);
  pd.V = Mat::Zero(def.dims.pn(), def.rank);
  pd.W = Mat::Zero(def.dims.mn(), def.rank);
  for (const auto& e : def.entries) {
    Mat& M = e.factor == 0 ? pd.U : e.factor == 1 ? pd.V : pd.W;
    M(e.row, e.col) = eval(e.expr, env);
  }
  return pd;
}

Pd eval_family(const FamilyDef& def, const Vec& p, double hard_margin) {
  if (def.cs) return expand_cs(eval_family_cs(def, p, hard_margin));
  return eval_family(def, param_env(def, p), hard_margin);
}

CsPd eval_family_cs(const FamilyDef& def, const Vec& p, double hard_margin) {
  if (!def.cs)
    throw UsageError("eval_family_cs: '" + def.name + "' is not a cs family");
  std::map<std::string, double> in = param_env(def, p);
  std::map<std::string, double> env = full_env(def, in);
  double margin = exclusion_margin(def, in);
  if (!(margin > hard_margin))
    throw NumericalError("family '" + def.name +
                         "': parameters violate an exclusion (margin " +
                         std::to_string(margin) + ")");
  Index mm = static_cast<Index>(def.dims.m) * def.dims.m;
  CsPd cs;
  cs.m = def.dims.m;
  cs.A = Mat::Zero(mm, def.cs_S);
  cs.B = Mat::Zero(mm, def.cs_T);
  cs.C = Mat::Zero(mm, def.cs_T);
  cs.D = Mat::Zero(mm, def.cs_T);
  for (const auto& e : def.entries) {
    Mat& M = e.factor == 0   ? cs.A
             : e.factor == 1 ? cs.B
             : e.factor == 2 ? cs.C
                             : cs.D;
    M(e.row, e.col) = eval(e.expr, env);
  }
  return cs;
}

Vec sample_admissible(const FamilyDef& def, Rng& rng, double lo, double hi,
                      double min_margin, int max_tries) {
  for (int t = 0; t < max_tries; ++t) {
    Vec p(def.param_count());
    for (Index i = 0; i < p.size(); ++i) {
      double mag = rng.uniform(lo, hi);
      p[i] = rng.uniform() < 0.5 ? -mag : mag;
    }
    double margin = exclusion_margin(def, param_env(def, p));
    if (!(margin >= min_margin)) continue;
    try {
      Pd pd = eval_family(def, p);
      double mx = std::max({pd.U.cwiseAbs().maxCoeff(),
                            pd.V.cwiseAbs().maxCoeff(),
                            pd.W.cwiseAbs().maxCoeff()});
      if (std::isfinite(mx) && mx < 1e6) return p;
    } catch (const NumericalError&) {
      continue;
    }
  }
  throw NumericalError("sample_admissible: no admissible point for '" +
                       def.name + "' after " + std::to_string(max_tries) +
                       " tries");
}

}  // namespace fmm
