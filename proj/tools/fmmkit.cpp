// SPDX-License-Identifier: MIT
//
// fmmkit — command-line workbench for fast-matrix-multiplication
// decompositions: multi-start constrained searches, verification, stability
// analysis and optimization, recursive application, and catalog/file
// plumbing.  Reports are JSON (insertion-ordered, schema-versioned); with a
// fixed --seed they are byte-identical across runs.  Exit codes: 0 success,
// 1 usage error, 2 data error (unreadable/inconsistent files), 3 numerical
// failure.

#include "fmmkit/al.hpp"
#include "fmmkit/catalog.hpp"
#include "fmmkit/constraints.hpp"
#include "fmmkit/cs.hpp"
#include "fmmkit/family.hpp"
#include "fmmkit/linalg.hpp"
#include "fmmkit/lm.hpp"
#include "fmmkit/mmt.hpp"
#include "fmmkit/pd_io.hpp"
#include "fmmkit/report.hpp"
#include "fmmkit/rng.hpp"
#include "fmmkit/seeding.hpp"
#include "fmmkit/stability.hpp"
#include "fmmkit/transforms.hpp"
#include "fmmkit/types.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace fmm;

namespace {

// ---- small argument parsers -------------------------------------------------

Dims parse_dims_arg(const std::string& s) {
  Dims d;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> d.m >> c1 >> d.p >> c2 >> d.n) || c1 != ',' || c2 != ',' ||
      !(in >> std::ws).eof() || !d.valid())
    throw UsageError("--dims expects m,p,n with positive integers, got '" + s +
                     "'");
  return d;
}

// A numeric literal: decimal or rational "p/q".
double parse_value(const std::string& s) {
  auto bad = [&] {
    throw UsageError("cannot parse numeric value '" + s + "'");
  };
  if (s.empty()) bad();
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    try {
      long long num = std::stoll(s.substr(0, slash));
      long long den = std::stoll(s.substr(slash + 1));
      if (den == 0) bad();
      return static_cast<double>(num) / static_cast<double>(den);
    } catch (const std::exception&) {
      bad();
    }
  }
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') bad();
  return v;
}

// "a=1,b=2/3" → ordered (name, value) pairs.
std::vector<std::pair<std::string, double>> parse_assignments(
    const std::string& s) {
  std::vector<std::pair<std::string, double>> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError("expected name=value, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), parse_value(item.substr(eq + 1)));
  }
  if (out.empty()) throw UsageError("no assignments in '" + s + "'");
  return out;
}

// Parameter vector in family declaration order; every parameter must be
// assigned exactly once.
Vec family_params_from_assignments(const FamilyDef& def,
                                   const std::string& assignments) {
  auto kv = parse_assignments(assignments);
  Vec p(def.param_count());
  std::vector<bool> seen(def.params.size(), false);
  for (const auto& [name, value] : kv) {
    auto it = std::find(def.params.begin(), def.params.end(), name);
    if (it == def.params.end())
      throw UsageError("family " + def.name + " has no parameter '" + name +
                       "'");
    std::size_t i = static_cast<std::size_t>(it - def.params.begin());
    if (seen[i]) throw UsageError("parameter '" + name + "' assigned twice");
    seen[i] = true;
    p[static_cast<Index>(i)] = value;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw UsageError("parameter '" + def.params[i] + "' not assigned");
  return p;
}

// ---- matrix text format (fmm-mat v1) ----------------------------------------
//
//   fmm-mat v1
//   <rows> <cols>
//   rows lines of cols entries
//
// '#' comments and blank lines are ignored.

std::string next_content_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r\n") != std::string::npos) return line;
  }
  return {};
}

Mat read_mat(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file: " + path);
  if (next_content_line(in).find("fmm-mat v1") == std::string::npos)
    throw DataError(path + ": expected 'fmm-mat v1' header");
  std::istringstream dims(next_content_line(in));
  Index rows = 0, cols = 0;
  if (!(dims >> rows >> cols) || rows <= 0 || cols <= 0)
    throw DataError(path + ": bad matrix dimensions");
  Mat A(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    std::istringstream row(next_content_line(in));
    for (Index j = 0; j < cols; ++j)
      if (!(row >> A(i, j)))
        throw DataError(path + ": short row " + std::to_string(i + 1));
  }
  return A;
}

void write_mat(const std::string& path, const Mat& A) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write matrix file: " + path);
  out << "fmm-mat v1\n" << A.rows() << " " << A.cols() << "\n";
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j)
      out << (j ? " " : "") << format_entry(A(i, j));
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

// ---- shared plumbing ---------------------------------------------------------

void emit_report(const Json& j, const std::string& out_path) {
  std::string text = dump_report(j);
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write report: " + out_path);
  out << text;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  }
};

// Input selection shared by verify/rank/stability/apply: a file path or a
// catalog id, with optional recursive powering.
struct PdSource {
  std::string file;
  std::string catalog_id;
  int power = 1;

  void add_flags(CLI::App* cmd, bool with_power = true) {
    cmd->add_option("file", file, "decomposition file (.pd or .cspd)");
    cmd->add_option("--catalog", catalog_id, "built-in catalog id");
    if (with_power)
      cmd->add_option("--power", power,
                      "analyze the given Kronecker power of the input")
          ->check(CLI::PositiveNumber);
  }

  Pd load(Json* meta = nullptr) const {
    if (file.empty() == catalog_id.empty())
      throw UsageError("give exactly one of FILE or --catalog ID");
    Pd pd;
    Json m;
    if (!file.empty()) {
      if (file.size() > 5 && file.substr(file.size() - 5) == ".cspd") {
        CsPd cs = load_cspd(file);
        pd = expand_cs(cs);
        m["input"] = file;
        m["cs"] = Json{{"S", cs.S()}, {"T", cs.T()}};
      } else {
        pd = load_pd(file);
        m["input"] = file;
      }
    } else {
      auto catalog = load_catalog();
      const CatalogEntry& e = find_entry(catalog, catalog_id);
      switch (e.kind) {
        case CatalogKind::DiscretePd:
          pd = catalog_pd(e);
          break;
        case CatalogKind::DiscreteCsPd: {
          CsPd cs = catalog_cspd(e);
          pd = expand_cs(cs);
          m["cs"] = Json{{"S", cs.S()}, {"T", cs.T()}};
          break;
        }
        default:
          throw UsageError("catalog entry " + e.id +
                           " is a family; evaluate it with `fmmkit family`");
      }
      m["input"] = "catalog:" + e.id;
    }
    if (power > 1) {
      pd = pd_power(pd, power);
      m["power"] = power;
    }
    if (meta) *meta = std::move(m);
    return pd;
  }
};

FamilyDef load_family_arg(const std::string& name, const std::string& file) {
  if (name.empty() == file.empty())
    throw UsageError("give exactly one of --family NAME or --family-file FILE");
  if (!file.empty()) return load_family(file);
  auto catalog = load_catalog();
  const CatalogEntry& e = find_entry(catalog, name);
  if (e.kind != CatalogKind::Family && e.kind != CatalogKind::CsFamily)
    throw UsageError("catalog entry " + name + " is not a family");
  return catalog_family(e);
}

// ---- search ------------------------------------------------------------------

struct SearchOpts {
  std::string dims_str;
  int rank = 0;
  int starts = 20;
  std::uint64_t seed = 0;
  double bound = 1.0;
  std::string start_kind = "gauss";
  double scale = 0.1;
  std::string constraint = "none";
  std::string cs_str;
  double save_tol = 1e-16;
  std::string out_dir = ".";
  bool no_save = false;
  int jobs = 0;
  bool timing = false;
  std::string out;
  std::string trace_dir;
  // augmented-Lagrangian knobs
  double beta0 = 10.0, growth = 2.0;
  int outer_max = 100, inner_iters = 40, budget = -1;
  double omega_star = 1e-12, eta_star = 1e-10;
};

std::unique_ptr<EqualityConstraint> make_constraint(const SearchOpts& o,
                                                    const Dims& dims, int R,
                                                    Json& config) {
  if (o.constraint == "none") return std::make_unique<NoConstraint>();
  if (o.constraint == "discrete")
    return std::make_unique<DiscretenessConstraint>();
  if (o.constraint.rfind("pin:", 0) == 0) {
    std::string file = o.constraint.substr(4);
    Pd ref = load_pd(file);
    if (!(ref.dims == dims) || ref.rank() != R)
      throw UsageError("pin file " + file + " does not match --dims/--rank");
    auto idx = select_near_zero(pack(ref), 1e-8);
    config["pin_count"] = idx.size();
    return std::make_unique<IndexPinConstraint>(std::move(idx));
  }
  throw UsageError("--constraint must be none, discrete, or pin:FILE");
}

void write_outer_trace(const std::string& path,
                       const std::vector<AlOuterRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trace: " + path);
  out << "outer,beta,cost,shifted_feas,grad_norm,eta,omega,multiplier_step,"
         "inner_iters\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n", r.outer,
                  r.beta, r.cost, r.shifted_feas, r.grad_norm, r.eta, r.omega,
                  r.multiplier_step ? 1 : 0, r.inner_iters);
    out << buf;
  }
}

AlConfig al_config_from(const SearchOpts& o) {
  AlConfig cfg;
  cfg.beta0 = o.beta0;
  cfg.growth = o.growth;
  cfg.outer_max = o.outer_max;
  cfg.inner_iters = o.inner_iters;
  cfg.budget = o.budget;
  cfg.omega_star = o.omega_star;
  cfg.eta_star = o.eta_star;
  cfg.lower = -o.bound;
  cfg.upper = o.bound;
  cfg.validate();
  return cfg;
}

std::string start_tag(const Dims& d, int R, std::uint64_t seed, int k) {
  std::ostringstream os;
  os << d.m << "x" << d.p << "x" << d.n << "_r" << R << "_seed" << seed
     << "_start" << k;
  return os.str();
}

void run_search_cs(const SearchOpts& o, Json& report);

void run_search(const SearchOpts& o) {
  Timer timer;
  Json report = report_envelope("search");
  if (!o.cs_str.empty()) {
    run_search_cs(o, report);
    if (o.timing) report["timing"] = Json{{"seconds", timer.seconds()}};
    emit_report(report, o.out);
    return;
  }

  Dims dims = parse_dims_arg(o.dims_str);
  if (o.rank <= 0) throw UsageError("--rank must be a positive integer");
  int R = o.rank;
  MmTensor t = build_mmt(dims);

  Json config;
  config["dims"] = json_dims(dims);
  config["rank"] = R;
  config["starts"] = o.starts;
  config["seed"] = o.seed;
  config["bound"] = o.bound;
  config["start_kind"] = o.start_kind;
  config["scale"] = o.scale;
  config["constraint"] = o.constraint;
  config["save_tol"] = o.save_tol;
  config["beta0"] = o.beta0;
  config["growth"] = o.growth;
  config["outer_max"] = o.outer_max;
  config["inner_iters"] = o.inner_iters;
  config["budget"] = o.budget;

  std::optional<Pd> perturb_base;
  if (o.start_kind.rfind("perturb:", 0) == 0) {
    Pd base = load_pd(o.start_kind.substr(8));
    if (!(base.dims == dims) || base.rank() != R)
      throw UsageError("perturb file does not match --dims/--rank");
    perturb_base = std::move(base);
  } else if (o.start_kind == "trivial") {
    if (R > dims.mpn())
      throw UsageError("trivial starts need rank <= m*p*n");
  } else if (o.start_kind != "gauss") {
    throw UsageError("--start-kind must be gauss, trivial, or perturb:FILE");
  }

  auto con = make_constraint(o, dims, R, config);
  AlConfig al_cfg = al_config_from(o);

  struct StartOutcome {
    AlResult res;
    std::optional<Pd> found;
  };
  std::vector<StartOutcome> outcomes(static_cast<std::size_t>(o.starts));

  auto run_one = [&](int k) {
    Rng rng = Rng::stream(o.seed, static_cast<std::uint64_t>(k));
    Pd start;
    if (perturb_base)
      start = perturb_known(*perturb_base, o.scale, rng);
    else if (o.start_kind == "trivial")
      start = trivial_ones_start(t, R, rng);
    else
      start = gaussian_start(dims, R, o.scale, rng);
    MmtAlProblem prob(dims, R);
    AlResult res = al_search(prob, *con, pack(start), al_cfg);
    StartOutcome& slot = outcomes[static_cast<std::size_t>(k)];
    if (res.cost < o.save_tol)
      slot.found = unpack(dims, R, res.x);
    slot.res = std::move(res);
  };

  int jobs = o.jobs > 0
                 ? o.jobs
                 : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, o.starts);
  if (jobs <= 1) {
    for (int k = 0; k < o.starts; ++k) run_one(k);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (int k = next.fetch_add(1); k < o.starts; k = next.fetch_add(1))
          run_one(k);
      });
    for (auto& th : pool) th.join();
  }

  // Seed-ordered merge: results and files are assembled by start index, so
  // the report does not depend on thread scheduling.
  if (!o.trace_dir.empty()) fs::create_directories(o.trace_dir);
  if (!o.no_save && !o.out_dir.empty()) fs::create_directories(o.out_dir);
  Json starts = Json::array();
  Json saved = Json::array();
  int successes = 0;
  int best_k = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int k = 0; k < o.starts; ++k) {
    const StartOutcome& oc = outcomes[static_cast<std::size_t>(k)];
    Json row = json_al_result(oc.res);
    row["start"] = k;
    if (oc.res.cost < best_cost) {
      best_cost = oc.res.cost;
      best_k = k;
    }
    if (oc.found) {
      ++successes;
      if (!o.no_save && !o.out_dir.empty()) {
        std::string name = "search_" + start_tag(dims, R, o.seed, k) + ".pd";
        std::string path = (fs::path(o.out_dir) / name).string();
        save_pd(path, *oc.found,
                "fmmkit search, cost " + std::to_string(oc.res.cost));
        row["saved"] = path;
        saved.push_back(path);
      }
    }
    if (!o.trace_dir.empty()) {
      std::string name = "search_" + start_tag(dims, R, o.seed, k) + ".csv";
      std::string path = (fs::path(o.trace_dir) / name).string();
      write_outer_trace(path, oc.res.history);
      row["trace"] = path;
    }
    starts.push_back(std::move(row));
  }

  report["config"] = std::move(config);
  report["starts"] = std::move(starts);
  report["summary"] = Json{{"successes", successes},
                           {"best_cost", best_cost},
                           {"best_start", best_k},
                           {"saved", saved}};
  if (o.timing) report["timing"] = Json{{"seconds", timer.seconds()}};
  emit_report(report, o.out);
}

void run_search_cs(const SearchOpts& o, Json& report) {
  Dims dims = parse_dims_arg(o.dims_str);
  if (!dims.is_cubic())
    throw UsageError("--cs searches need cubic dims m,m,m");
  int S = 0, T = 0;
  {
    char c = 0;
    std::istringstream in(o.cs_str);
    if (!(in >> S >> c >> T) || c != ',' || S < 0 || T < 0 || S + T == 0 ||
        !(in >> std::ws).eof())
      throw UsageError("--cs expects S,T with S,T >= 0 and S+T > 0");
  }
  if (o.rank > 0 && o.rank != S + 3 * T)
    throw UsageError("--rank disagrees with --cs (rank = S + 3T)");
  if (o.start_kind != "gauss")
    throw UsageError("--cs searches support only Gaussian starts");
  bool discrete = false;
  if (o.constraint == "discrete")
    discrete = true;
  else if (o.constraint != "none")
    throw UsageError("--cs searches support --constraint none or discrete");

  CsSearchConfig cfg;
  cfg.seed = o.seed;
  cfg.starts = o.starts;
  cfg.init_scale = o.scale;
  cfg.discrete = discrete;
  cfg.success_cost = o.save_tol;
  cfg.al = al_config_from(o);

  CsSearchResult res = cs_search(dims.m, S, T, cfg);

  Json config;
  config["dims"] = json_dims(dims);
  config["cs"] = Json{{"S", S}, {"T", T}};
  config["rank"] = S + 3 * T;
  config["starts"] = o.starts;
  config["seed"] = o.seed;
  config["bound"] = o.bound;
  config["scale"] = o.scale;
  config["constraint"] = o.constraint;
  config["save_tol"] = o.save_tol;
  report["config"] = std::move(config);

  Json starts = Json::array();
  for (const auto& row : res.per_start)
    starts.push_back(Json{{"start", row.start},
                          {"cost", row.cost},
                          {"feasibility", row.feas},
                          {"success", row.success},
                          {"inner_iters", row.inner_iters}});
  report["starts"] = std::move(starts);

  Json summary;
  summary["successes"] = res.successes;
  summary["best_cost"] = res.best_cost;
  if (res.successes > 0 && !o.no_save && !o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    std::ostringstream name;
    name << "search_cs_" << dims.m << "_S" << S << "_T" << T << "_seed"
         << o.seed << ".cspd";
    std::string path = (fs::path(o.out_dir) / name.str()).string();
    save_cspd(path, res.best,
              "fmmkit cs search, cost " + std::to_string(res.best_cost));
    summary["saved"] = Json::array({path});
  }
  report["summary"] = std::move(summary);
}

// ---- verify ------------------------------------------------------------------

struct VerifyOpts {
  PdSource src;
  double tol = 1e-16;
  double zero_tol = 1e-9;
  bool fingerprint = true;
  bool timing = false;
  std::string out;
};

int count_nnz(const Mat& M, double tol) {
  int c = 0;
  for (Index i = 0; i < M.size(); ++i)
    if (std::abs(M.data()[i]) > tol) ++c;
  return c;
}

void run_verify(const VerifyOpts& o) {
  Timer timer;
  Json meta;
  Pd pd = o.src.load(&meta);
  MmTensor t = build_mmt(pd.dims);
  Vec res = pd_residual(pd, t);
  double cost = 0.5 * res.squaredNorm();

  Json report = report_envelope("verify");
  report["input"] = meta["input"];
  if (meta.contains("cs")) report["cs"] = meta["cs"];
  if (meta.contains("power")) report["power"] = meta["power"];
  report["dims"] = json_dims(pd.dims);
  report["rank"] = pd.rank();
  report["residual_norm"] = res.norm();
  report["cost"] = cost;
  report["tol"] = o.tol;
  report["exact"] = cost < o.tol;
  report["nnz"] = Json{{"U", count_nnz(pd.U, o.zero_tol)},
                       {"V", count_nnz(pd.V, o.zero_tol)},
                       {"W", count_nnz(pd.W, o.zero_tol)},
                       {"zero_tol", o.zero_tol}};
  if (o.fingerprint) report["fingerprint"] = json_fingerprint(fingerprint(pd));
  if (o.timing) report["timing"] = Json{{"seconds", timer.seconds()}};
  emit_report(report, o.out);
  if (cost >= o.tol)
    throw NumericalError("decomposition is not exact at tolerance " +
                         std::to_string(o.tol));
}

// ---- rank --------------------------------------------------------------------

struct RankOpts {
  PdSource src;
  double rel_tol = -1.0;
  bool timing = false;
  std::string out;
};

void run_rank(const RankOpts& o) {
  Timer timer;
  Json meta;
  Pd pd = o.src.load(&meta);
  RankReport rr = jacobian_rank(pd, o.rel_tol);
  Json report = report_envelope("rank");
  report["input"] = meta["input"];
  if (meta.contains("power")) report["power"] = meta["power"];
  report["dims"] = json_dims(pd.dims);
  report["rank"] = pd.rank();
  report["jacobian"] = json_rank_report(rr);
  if (o.timing) report["timing"] = Json{{"seconds", timer.seconds()}};
  emit_report(report, o.out);
}

// ---- stability ---------------------------------------------------------------

struct StabilityOpts {
  PdSource src;
  std::string family, family_file, params;
  std::string cycle = "none";
  double zero_tol = 1e-9;
  bool rows = false;
  bool timing = false;
  std::string out;
};

void run_stability(const StabilityOpts& o) {
  Timer timer;
  Json report = report_envelope("stability");
  Pd pd;
  if (!o.family.empty() || !o.family_file.empty()) {
    if (!o.src.file.empty() || !o.src.catalog_id.empty())
      throw UsageError("give either an input decomposition or --family");
    FamilyDef def = load_family_arg(o.family, o.family_file);
    if (o.params.empty())
      throw UsageError("--family needs --params name=value,...");
    Vec p = family_params_from_assignments(def, o.params);
    pd = eval_family(def, p);
    report["input"] = "family:" + def.name;
    Json pj;
    for (int i = 0; i < def.param_count(); ++i)
      pj[def.params[static_cast<std::size_t>(i)]] = p[i];
    report["params"] = std::move(pj);
    if (o.src.power > 1) pd = pd_power(pd, o.src.power);
  } else {
    Json meta;
    pd = o.src.load(&meta);
    report["input"] = meta["input"];
    if (meta.contains("power")) report["power"] = meta["power"];
  }
  if (o.cycle == "left")
    pd = permute_pd(pd, Cycle::Left);
  else if (o.cycle == "right")
    pd = permute_pd(pd, Cycle::Right);
  else if (o.cycle != "none")
    throw UsageError("--cycle must be none, left, or right");
  if (o.cycle != "none") report["cycle"] = o.cycle;

  StabilityReport s = stability_report(pd, o.zero_tol);
  report["dims"] = json_dims(pd.dims);
  report["rank"] = pd.rank();
  report["stability"] = json_stability(s);
  if (o.rows) {
    report["row_q"] = s.row_q;
    Json re = Json::array();
    for (Index i = 0; i < s.row_e.size(); ++i) re.push_back(s.row_e[i]);
    report["row_e"] = std::move(re);
  }
  if (o.timing) report["timing"] = Json{{"seconds", timer.seconds()}};
  emit_report(report, o.out);
}

// ---- optimize-stability --------------------------------------------------------

struct OptStabOpts {
  std::string family, family_file;
  std::string init;
  int budget = 2000;
  int restarts = 8;
  std::uint64_t seed = 0;
  bool round_pow2 = false;
  double zero_tol = 1e-9;
  double min_margin = 1e-3;
  std::string save;
  bool timing = false;
  std::string out;
};

void run_optimize_stability(const OptStabOpts& o) {
  Timer timer;
  FamilyDef def = load_family_arg(o.family, o.family_file);
  if (o.init.empty())
    throw UsageError("--init name=value,... is required");
  Vec p0 = family_params_from_assignments(def, o.init);

  StabOptConfig cfg;
  cfg.seed = o.seed;
  cfg.budget = o.budget;
  cfg.restarts = o.restarts;
  cfg.zero_tol = o.zero_tol;
  cfg.min_margin = o.min_margin;
  StabOptResult res = optimize_family_stability(def, p0, cfg);

  Json report = report_envelope("optimize-stability");
  report["family"] = def.name;
  report["dims"] = json_dims(def.dims);
  report["rank"] = def.rank;
  {
    Pd at0 = eval_family(def, p0);
    StabilityReport s0 = stability_report(at0, o.zero_tol);
    Json init;
    for (int i = 0; i < def.param_count(); ++i)
      init[def.params[static_cast<std::size_t>(i)]] = p0[i];
    report["init"] = Json{{"params", std::move(init)},
                          {"q", s0.q},
                          {"e", s0.e}};
  }
  Json pj;
  for (int i = 0; i < def.param_count(); ++i)
    pj[def.params[static_cast<std::size_t>(i)]] = res.params[i];
  report["optimized"] = Json{{"params", std::move(pj)},
                             {"q", res.q},
                             {"e", res.e},
                             {"evals", res.evals},
                             {"residual", res.residual}};
  if (res.pow2_exact)
    report["round_pow2"] = Json{{"q", res.q_pow2},
                                {"e", res.e_pow2},
                                {"exact", true}};
  else if (o.round_pow2)
    report["round_pow2"] = Json{{"exact", false}};

  if (!o.save.empty()) {
    Pd best = eval_family(def, res.params);
    if (o.round_pow2 && res.pow2_exact) best = round_pow2(best);
    save_pd(o.save, best, "fmmkit optimize-stability on family " + def.name);
    report["saved"] = o.save;
  }
  if (o.timing) report["timing"] = Json{{"seconds", timer.seconds()}};
  emit_report(report, o.out);
}

// ---- apply -------------------------------------------------------------------

struct ApplyOpts {
  PdSource src;  // --power unused here; levels plays that role
  std::string a_file, b_file;
  int levels = 1;
  bool bench = false;
  std::string out;
  std::string report_out;
};

void run_apply(const ApplyOpts& o) {
  Json meta;
  Pd pd = o.src.load(&meta);
  Mat A = read_mat(o.a_file);
  Mat B = read_mat(o.b_file);

  long long mults = 0;
  Mat C = apply_recursive(pd, A, B, o.levels, &mults);
  Mat C_ref = A * B;
  double err = (C - C_ref).cwiseAbs().maxCoeff();
  double naive = std::pow(static_cast<double>(pd.dims.mpn()), o.levels);

  Json report = report_envelope("apply");
  report["input"] = meta["input"];
  report["dims"] = json_dims(pd.dims);
  report["rank"] = pd.rank();
  report["levels"] = o.levels;
  report["A"] = Json{{"rows", A.rows()}, {"cols", A.cols()}};
  report["B"] = Json{{"rows", B.rows()}, {"cols", B.cols()}};
  report["mults"] = Json{{"fast", mults},
                         {"naive", naive},
                         {"ratio", static_cast<double>(mults) / naive}};
  report["max_abs_error"] = err;

  if (o.bench) {
    // Explicitly requested timing: median of 5 runs each.
    auto time_median = [](auto&& fn) {
      std::vector<double> ts;
      for (int i = 0; i < 5; ++i) {
        Timer t;
        fn();
        ts.push_back(t.seconds());
      }
      std::sort(ts.begin(), ts.end());
      return ts[2];
    };
    volatile double sink = 0;
    double t_fast = time_median([&] {
      Mat X = apply_recursive(pd, A, B, o.levels);
      sink = sink + X(0, 0);
    });
    double t_naive = time_median([&] {
      Mat X = A * B;
      sink = sink + X(0, 0);
    });
    report["bench"] = Json{{"fast_seconds", t_fast},
                           {"naive_seconds", t_naive}};
  }
  if (!o.out.empty()) {
    write_mat(o.out, C);
    report["saved"] = o.out;
  }
  emit_report(report, o.report_out);
}

// ---- family ------------------------------------------------------------------

struct FamilyOpts {
  bool list = false;
  std::string name, file;
  bool show_info = false;
  std::string eval;
  std::string out;
  int sample = 0;
  std::uint64_t seed = 0;
  std::string rehash;
  bool timing = false;
  std::string report_out;
};

void run_family(const FamilyOpts& o) {
  Timer timer;
  if (o.list) {
    Json report = report_envelope("family");
    Json rows = Json::array();
    for (const CatalogEntry& e : load_catalog())
      rows.push_back(Json{{"id", e.id},
                          {"kind", to_string(e.kind)},
                          {"dims", json_dims(e.dims)},
                          {"rank", e.rank},
                          {"params", e.params},
                          {"file", e.file},
                          {"note", e.note}});
    report["catalog"] = std::move(rows);
    if (o.timing) report["timing"] = Json{{"seconds", timer.seconds()}};
    emit_report(report, o.report_out);
    return;
  }
  if (!o.rehash.empty()) {
    FamilyDef def = load_family(o.rehash, /*verify_checksum=*/false);
    std::ofstream out(o.rehash);
    if (!out) throw DataError("cannot rewrite " + o.rehash);
    write_family(out, def);
    Json report = report_envelope("family");
    report["rehash"] = o.rehash;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(family_checksum(def)));
    report["checksum"] = buf;
    emit_report(report, o.report_out);
    return;
  }

  FamilyDef def = load_family_arg(o.name, o.file);
  Json report = report_envelope("family");
  report["family"] = def.name;
  report["dims"] = json_dims(def.dims);
  report["rank"] = def.rank;
  if (def.cs) report["cs"] = Json{{"S", def.cs_S}, {"T", def.cs_T}};
  report["params"] = def.params;

  if (o.show_info) {
    Json derived = Json::array();
    for (const auto& [name, expr] : def.derived)
      derived.push_back(Json{{"name", name}, {"expr", to_string(expr)}});
    report["derived"] = std::move(derived);
    Json excl = Json::array();
    for (const auto& e : def.exclusions) excl.push_back(to_string(e));
    report["exclusions"] = std::move(excl);
    report["entries"] = def.entries.size();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(def.checksum));
    report["checksum"] = buf;
  }

  if (!o.eval.empty()) {
    Vec p = family_params_from_assignments(def, o.eval);
    Pd pd = eval_family(def, p);
    MmTensor t = build_mmt(def.dims);
    Json pj;
    for (int i = 0; i < def.param_count(); ++i)
      pj[def.params[static_cast<std::size_t>(i)]] = p[i];
    report["eval"] = Json{{"params", std::move(pj)},
                          {"residual_norm", pd_residual(pd, t).norm()}};
    if (!o.out.empty()) {
      save_pd(o.out, pd, "fmmkit family " + def.name);
      report["saved"] = o.out;
    }
  } else if (!o.out.empty()) {
    throw UsageError("--out needs --eval name=value,...");
  }

  if (o.sample > 0) {
    MmTensor t = build_mmt(def.dims);
    Rng rng(o.seed);
    Json rows = Json::array();
    for (int i = 0; i < o.sample; ++i) {
      Vec p = sample_admissible(def, rng);
      Pd pd = eval_family(def, p);
      Json pj = Json::array();
      for (Index j = 0; j < p.size(); ++j) pj.push_back(p[j]);
      rows.push_back(Json{{"params", std::move(pj)},
                          {"residual_norm", pd_residual(pd, t).norm()}});
    }
    report["samples"] = std::move(rows);
  }

  if (o.timing) report["timing"] = Json{{"seconds", timer.seconds()}};
  emit_report(report, o.report_out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fmmkit — workbench for fast matrix multiplication decompositions"};
  app.require_subcommand(1);

  SearchOpts so;
  CLI::App* search = app.add_subcommand(
      "search", "multi-start augmented-Lagrangian decomposition search");
  search->add_option("--dims", so.dims_str, "tensor shape m,p,n")->required();
  search->add_option("--rank", so.rank, "number of rank-one terms");
  search->add_option("--starts", so.starts, "independent starts")
      ->check(CLI::PositiveNumber);
  search->add_option("--seed", so.seed, "random seed");
  search->add_option("--bound", so.bound, "box bound u (variables in [-u,u])")
      ->check(CLI::PositiveNumber);
  search->add_option("--start-kind", so.start_kind,
                     "gauss | trivial | perturb:FILE");
  search->add_option("--scale", so.scale, "start scale");
  search->add_option("--constraint", so.constraint,
                     "none | discrete | pin:FILE");
  search->add_option("--cs", so.cs_str,
                     "cyclic-symmetric search with S,T (cubic dims)");
  search->add_option("--save-tol", so.save_tol,
                     "cost below which a decomposition is saved");
  search->add_option("--out-dir", so.out_dir, "directory for saved files");
  search->add_flag("--no-save", so.no_save, "do not write decomposition files");
  search->add_option("--jobs", so.jobs, "worker threads (0 = all cores)");
  search->add_flag("--timing", so.timing, "include wall-clock in the report");
  search->add_option("--out", so.out, "report file (default stdout)");
  search->add_option("--trace-dir", so.trace_dir,
                     "write per-start convergence CSVs here");
  search->add_option("--beta0", so.beta0, "initial penalty");
  search->add_option("--growth", so.growth, "penalty growth factor");
  search->add_option("--outer-max", so.outer_max, "outer iteration cap");
  search->add_option("--inner-iters", so.inner_iters,
                     "accepted inner steps per outer round");
  search->add_option("--budget", so.budget,
                     "total inner step budget (-1 = outer-max * inner-iters)");
  search->add_option("--omega-star", so.omega_star,
                     "final gradient tolerance");
  search->add_option("--eta-star", so.eta_star,
                     "final feasibility tolerance");
  search->callback([&] { run_search(so); });

  VerifyOpts vo;
  CLI::App* verify = app.add_subcommand(
      "verify", "check a decomposition against its tensor");
  vo.src.add_flags(verify);
  verify->add_option("--tol", vo.tol, "exactness threshold on the cost");
  verify->add_option("--zero-tol", vo.zero_tol, "threshold for nonzero counts");
  verify->add_flag("--timing", vo.timing, "include wall-clock in the report");
  verify->add_option("--out", vo.out, "report file (default stdout)");
  verify->callback([&] { run_verify(vo); });

  RankOpts ro;
  CLI::App* rank =
      app.add_subcommand("rank", "Jacobian rank report of a decomposition");
  ro.src.add_flags(rank);
  rank->add_option("--rel-tol", ro.rel_tol,
                   "relative rank tolerance (-1 = default)");
  rank->add_flag("--timing", ro.timing, "include wall-clock in the report");
  rank->add_option("--out", ro.out, "report file (default stdout)");
  rank->callback([&] { run_rank(ro); });

  StabilityOpts sto;
  CLI::App* stab = app.add_subcommand(
      "stability", "growth-factor analysis of a decomposition or family");
  sto.src.add_flags(stab);
  stab->add_option("--family", sto.family, "catalog family id");
  stab->add_option("--family-file", sto.family_file, "family definition file");
  stab->add_option("--params", sto.params, "family parameters name=value,...");
  stab->add_option("--cycle", sto.cycle,
                   "analyze a cyclic permutation: none | left | right");
  stab->add_option("--zero-tol", sto.zero_tol, "support threshold");
  stab->add_flag("--rows", sto.rows, "include per-output-row values");
  stab->add_flag("--timing", sto.timing, "include wall-clock in the report");
  stab->add_option("--out", sto.out, "report file (default stdout)");
  stab->callback([&] { run_stability(sto); });

  OptStabOpts oso;
  CLI::App* ostab = app.add_subcommand(
      "optimize-stability",
      "minimize the growth factor e over a family's parameters");
  ostab->add_option("--family", oso.family, "catalog family id");
  ostab->add_option("--family-file", oso.family_file,
                    "family definition file");
  ostab->add_option("--init", oso.init, "starting parameters name=value,...");
  ostab->add_option("--budget", oso.budget, "objective evaluation budget")
      ->check(CLI::PositiveNumber);
  ostab->add_option("--restarts", oso.restarts, "random restarts");
  ostab->add_option("--seed", oso.seed, "random seed");
  ostab->add_flag("--round-pow2", oso.round_pow2,
                  "snap the optimized factors to powers of two when exact");
  ostab->add_option("--zero-tol", oso.zero_tol, "support threshold");
  ostab->add_option("--min-margin", oso.min_margin,
                    "required distance to the exclusion set");
  ostab->add_option("--save", oso.save, "write the optimized decomposition");
  ostab->add_flag("--timing", oso.timing, "include wall-clock in the report");
  ostab->add_option("--out", oso.out, "report file (default stdout)");
  ostab->callback([&] { run_optimize_stability(oso); });

  ApplyOpts ao;
  CLI::App* apply = app.add_subcommand(
      "apply", "multiply two matrices with a decomposition, recursively");
  ao.src.add_flags(apply, /*with_power=*/false);
  apply->add_option("--A", ao.a_file, "left matrix file (fmm-mat v1)")
      ->required();
  apply->add_option("--B", ao.b_file, "right matrix file (fmm-mat v1)")
      ->required();
  apply->add_option("--levels", ao.levels, "recursion depth")
      ->check(CLI::PositiveNumber);
  apply->add_flag("--bench", ao.bench, "time fast vs naive multiplication");
  apply->add_option("--out", ao.out, "product matrix file");
  apply->add_option("--report", ao.report_out, "report file (default stdout)");
  apply->callback([&] { run_apply(ao); });

  FamilyOpts fo;
  CLI::App* family = app.add_subcommand(
      "family", "inspect, evaluate, and maintain parametric families");
  family->add_flag("--list", fo.list, "list the built-in catalog");
  family->add_option("--name", fo.name, "catalog id");
  family->add_option("--file", fo.file, "family definition file");
  family->add_flag("--info", fo.show_info,
                   "include derived symbols, exclusions, checksum");
  family->add_option("--eval", fo.eval, "evaluate at name=value,...");
  family->add_option("--out", fo.out, "write the evaluated decomposition");
  family->add_option("--sample", fo.sample,
                     "sample N admissible points and report residuals");
  family->add_option("--seed", fo.seed, "random seed for --sample");
  family->add_option("--rehash", fo.rehash,
                     "rewrite a family file in canonical form");
  family->add_flag("--timing", fo.timing, "include wall-clock in the report");
  family->add_option("--report", fo.report_out, "report file (default stdout)");
  family->callback([&] { run_family(fo); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "fmmkit: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "fmmkit: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "fmmkit: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "fmmkit: internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
