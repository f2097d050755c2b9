// SPDX-License-Identifier: MIT

#include "fmmkit/pd_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fmm {

namespace {

// Reads the next non-comment, non-blank line; returns false at EOF.
bool next_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    std::size_t b = line.find_last_not_of(" \t\r");
    if (b == std::string::npos) continue;
    line.erase(b + 1);
    return true;
  }
  return false;
}

[[noreturn]] void fail(const std::string& name, int lineno,
                       const std::string& what) {
  throw DataError(name + ":" + std::to_string(lineno) + ": " + what);
}

double parse_entry(const std::string& tok, const std::string& name,
                   int lineno) {
  std::size_t slash = tok.find('/');
  errno = 0;
  char* end = nullptr;
  if (slash != std::string::npos) {
    long long num = std::strtoll(tok.c_str(), &end, 10);
    if (end != tok.c_str() + slash) fail(name, lineno, "bad rational '" + tok + "'");
    long long den = std::strtoll(tok.c_str() + slash + 1, &end, 10);
    if (*end != '\0' || den == 0 || errno != 0)
      fail(name, lineno, "bad rational '" + tok + "'");
    return static_cast<double>(num) / static_cast<double>(den);
  }
  double v = std::strtod(tok.c_str(), &end);
  if (*end != '\0' || errno != 0)
    fail(name, lineno, "bad number '" + tok + "'");
  return v;
}

// Reads `rows` lines of `cols` entries into M.
void read_block(std::istream& in, const std::string& name, int& lineno,
                const char* label, Mat& M, Index rows, Index cols) {
  std::string line;
  if (!next_line(in, line, lineno) || line != label)
    fail(name, lineno, std::string("expected block label '") + label + "'");
  M.resize(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (!next_line(in, line, lineno))
      fail(name, lineno, std::string("unexpected end of file in block ") + label);
    std::istringstream ss(line);
    std::string tok;
    for (Index c = 0; c < cols; ++c) {
      if (!(ss >> tok))
        fail(name, lineno, std::string("short row in block ") + label);
      M(r, c) = parse_entry(tok, name, lineno);
    }
    if (ss >> tok) fail(name, lineno, std::string("extra entries in block ") + label);
  }
}

void write_block(std::ostream& os, const char* label, const Mat& M) {
  os << label << "\n";
  for (Index r = 0; r < M.rows(); ++r) {
    for (Index c = 0; c < M.cols(); ++c) {
      if (c) os << ' ';
      os << format_entry(M(r, c));
    }
    os << "\n";
  }
}

}  // namespace

std::string format_entry(double v) {
  if (v == 0.0) return "0";  // normalize -0
  if (std::rint(v) == v && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Pd read_pd(std::istream& in, const std::string& name) {
  int lineno = 0;
  std::string line;
  if (!next_line(in, line, lineno) || line != "fmm-pd v1")
    fail(name, lineno, "missing 'fmm-pd v1' magic line");
  if (!next_line(in, line, lineno)) fail(name, lineno, "missing dims line");
  std::istringstream ss(line);
  int m, p, n, R;
  if (!(ss >> m >> p >> n >> R) || m < 1 || p < 1 || n < 1 || R < 1)
    fail(name, lineno, "bad dims line '" + line + "' (want: m p n R)");
  Pd pd;
  pd.dims = {m, p, n};
  read_block(in, name, lineno, "U", pd.U, pd.dims.mp(), R);
  read_block(in, name, lineno, "V", pd.V, pd.dims.pn(), R);
  read_block(in, name, lineno, "W", pd.W, pd.dims.mn(), R);
  pd.check();
  return pd;
}

Pd load_pd(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_pd(in, path);
}

void write_pd(std::ostream& os, const Pd& pd, const std::string& comment) {
  pd.check();
  if (!comment.empty()) os << "# " << comment << "\n";
  os << "fmm-pd v1\n"
     << pd.dims.m << ' ' << pd.dims.p << ' ' << pd.dims.n << ' ' << pd.rank()
     << "\n";
  write_block(os, "U", pd.U);
  write_block(os, "V", pd.V);
  write_block(os, "W", pd.W);
}

void save_pd(const std::string& path, const Pd& pd,
             const std::string& comment) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write '" + path + "'");
  write_pd(os, pd, comment);
  if (!os) throw DataError("write failed for '" + path + "'");
}

CsPd read_cspd(std::istream& in, const std::string& name) {
  int lineno = 0;
  std::string line;
  if (!next_line(in, line, lineno) || line != "fmm-cspd v1")
    fail(name, lineno, "missing 'fmm-cspd v1' magic line");
  if (!next_line(in, line, lineno)) fail(name, lineno, "missing shape line");
  std::istringstream ss(line);
  int m, S, T;
  if (!(ss >> m >> S >> T) || m < 1 || S < 0 || T < 0 || S + T == 0)
    fail(name, lineno, "bad shape line '" + line + "' (want: m S T)");
  CsPd cs;
  cs.m = m;
  read_block(in, name, lineno, "A", cs.A, static_cast<Index>(m) * m, S);
  read_block(in, name, lineno, "B", cs.B, static_cast<Index>(m) * m, T);
  read_block(in, name, lineno, "C", cs.C, static_cast<Index>(m) * m, T);
  read_block(in, name, lineno, "D", cs.D, static_cast<Index>(m) * m, T);
  cs.check();
  return cs;
}

CsPd load_cspd(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_cspd(in, path);
}

void write_cspd(std::ostream& os, const CsPd& cs, const std::string& comment) {
  cs.check();
  if (!comment.empty()) os << "# " << comment << "\n";
  os << "fmm-cspd v1\n" << cs.m << ' ' << cs.S() << ' ' << cs.T() << "\n";
  write_block(os, "A", cs.A);
  write_block(os, "B", cs.B);
  write_block(os, "C", cs.C);
  write_block(os, "D", cs.D);
}

void save_cspd(const std::string& path, const CsPd& cs,
               const std::string& comment) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write '" + path + "'");
  write_cspd(os, cs, comment);
  if (!os) throw DataError("write failed for '" + path + "'");
}

}  // namespace fmm
