#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "affinelp/domain.hpp"
#include "affinelp/energy.hpp"
#include "affinelp/fixed_point.hpp"
#include "affinelp/galerkin.hpp"
#include "affinelp/geometry.hpp"

namespace affinelp::cli {

using nlohmann::json;

// Exit statuses: 0 success, 1 certificate failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCertificate = 1;
inline constexpr int kExitUsage = 2;

inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

inline json vec_to_json(const CoefVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline CoefVec vec_from_json(const json& a) {
  CoefVec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i];
  return v;
}

// Timestamps live only in the manifest, so result payloads stay diffable.
inline void write_manifest(const std::filesystem::path& outdir,
                           const std::string& subcommand,
                           const json& resolved_config) {
  json m;
  m["subcommand"] = subcommand;
  m["config"] = resolved_config;
  const auto now = std::chrono::system_clock::now();
  m["timestamp_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
          .count();
  atomic_write(outdir / "manifest.json", m.dump(2) + "\n");
}

// --- config files: plain key=value or JSON -------------------------------

inline std::map<std::string, std::string> load_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::map<std::string, std::string> kv;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const json j = json::parse(text);
    for (const auto& [key, val] : j.items())
      kv[key] = val.is_string() ? val.get<std::string>() : val.dump();
  } else {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string()
                                      : s.substr(a, b - a + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      if (!key.empty()) kv[key] = trim(line.substr(eq + 1));
    }
  }
  return kv;
}

// --- energy ----------------------------------------------------------------

struct EnergyOptions {
  double p = 2.0;
  int m = 1;
  int quad_order = 48;
  int sphere_points = 256;
  std::vector<double> zeta;  // defaults to e1
  std::string outdir = "out";
};

inline int run_energy(const EnergyOptions& opt) {
  const GaugeContext ctx =
      make_gauge_context(opt.m, opt.p, opt.quad_order, opt.sphere_points);
  CoefVec zeta;
  if (opt.zeta.empty()) {
    zeta = CoefVec::Unit(opt.m, 0);
  } else {
    if (static_cast<int>(opt.zeta.size()) != opt.m)
      throw std::invalid_argument("zeta length must equal m");
    zeta = Eigen::Map<const CoefVec>(opt.zeta.data(), opt.m);
  }
  const GradField field = expand(zeta, *ctx.basis);
  const EnergyBreakdown br = affine_energy(field, *ctx.rule, ctx.params);
  json out;
  out["p"] = opt.p;
  out["m"] = opt.m;
  out["gamma_np"] = ctx.params.gamma;
  out["energy"] = br.energy;
  out["grad_lp_norm"] = br.grad_norm;
  out["dir_norm_min"] = br.dir_norms.size() ? br.dir_norms.minCoeff() : 0.0;
  out["dir_norm_max"] = br.dir_norms.size() ? br.dir_norms.maxCoeff() : 0.0;
  out["zeta"] = vec_to_json(zeta);
  const std::filesystem::path dir(opt.outdir);
  atomic_write(dir / "energy.json", out.dump(2) + "\n");
  json cfg = {{"p", opt.p},
              {"m", opt.m},
              {"quad_order", opt.quad_order},
              {"sphere_points", opt.sphere_points}};
  write_manifest(dir, "energy", cfg);
  return kExitOk;
}

// --- geometry ---------------------------------------------------------------

struct GeometryOptions {
  std::string kind = "triangle";  // triangle | nonconvexity
  int m = 8;
  double p = 2.0;
  std::uint64_t seed = 42;
  int budget = 10000;
  int quad_order = 48;
  int sphere_points = 256;
  std::string outdir = "out";
};

inline int run_geometry(const GeometryOptions& opt) {
  const GaugeContext ctx =
      make_gauge_context(opt.m, opt.p, opt.quad_order, opt.sphere_points);
  std::optional<Witness> wit;
  if (opt.kind == "triangle")
    wit = search_triangle_violation(ctx, opt.seed, opt.budget);
  else if (opt.kind == "nonconvexity")
    wit = search_nonconvexity(ctx, opt.seed, opt.budget);
  else
    throw std::invalid_argument("geometry kind must be triangle|nonconvexity");

  json out;
  out["found"] = wit.has_value();
  if (wit) {
    out["kind"] = to_string(wit->kind);
    out["margin"] = wit->margin;
    out["seed"] = wit->seed;
    out["u"] = vec_to_json(wit->u);
    out["v"] = vec_to_json(wit->v);
  } else {
    out["note"] = "budget exhausted; inconclusive, not a disproof";
  }
  const std::filesystem::path dir(opt.outdir);
  atomic_write(dir / "witness.json", out.dump(2) + "\n");
  json cfg = {{"kind", opt.kind},   {"m", opt.m},
              {"p", opt.p},         {"seed", opt.seed},
              {"budget", opt.budget}};
  write_manifest(dir, "geometry", cfg);
  return wit ? kExitOk : kExitCertificate;
}

// --- fixedpoint ---------------------------------------------------------------

struct FixedPointOptions {
  std::string field = "linear";  // identity | linear | random-coercive | euler-lagrange
  std::string gauge = "affine";  // affine | linf
  int m = 6;
  double p = 2.0;
  double alpha = 1.5;            // euler-lagrange only
  std::string source = "constant:1";  // euler-lagrange only
  double rho = 2.0;
  double tol = 1e-10;
  std::uint64_t seed = 1;
  int budget = 100000;
  int quad_order = 48;
  int sphere_points = 256;
  std::string outdir = "out";
};

inline int run_fixedpoint(const FixedPointOptions& opt) {
  const GaugeContext ctx =
      make_gauge_context(opt.m, opt.p, opt.quad_order, opt.sphere_points);
  const int m = opt.m;

  std::optional<ProblemContext> pc;
  VectorField F;
  if (opt.field == "identity") {
    F = {[](const CoefVec& z) { return z; }, "identity"};
  } else if (opt.field == "linear") {
    Rng rng(opt.seed + 1000);
    Eigen::MatrixXd M(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) M(i, j) = rng.normal();
    const Eigen::MatrixXd A =
        M.transpose() * M + Eigen::MatrixXd::Identity(m, m);
    CoefVec b(m);
    for (int i = 0; i < m; ++i) b[i] = 0.1 * rng.normal();
    F = {[A, b](const CoefVec& z) -> CoefVec { return A * z - b; }, "linear"};
  } else if (opt.field == "random-coercive") {
    Rng rng(opt.seed + 2000);
    Eigen::MatrixXd M(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) M(i, j) = rng.normal();
    const Eigen::MatrixXd A =
        M.transpose() * M + Eigen::MatrixXd::Identity(m, m);
    CoefVec b(m);
    for (int i = 0; i < m; ++i) b[i] = 0.1 * rng.normal();
    F = {[A, b](const CoefVec& z) -> CoefVec {
           return A * z + z.squaredNorm() * z - b;
         },
         "random-coercive"};
  } else if (opt.field == "euler-lagrange") {
    ProblemSpec spec;
    spec.p = opt.p;
    spec.alpha = opt.alpha;
    spec.source = parse_source(opt.source);
    spec.m = m;
    spec.quad_order = opt.quad_order;
    spec.sphere_points = opt.sphere_points;
    pc = make_problem_context(spec);
    F = {[&pcref = *pc](const CoefVec& z) { return assemble_F(z, pcref); },
         "euler-lagrange"};
  } else {
    throw std::invalid_argument("unknown field: " + opt.field);
  }

  GaugeBallSpec ball;
  if (opt.gauge == "affine") {
    ball = make_affine_ball(ctx, CoefVec::Zero(m), opt.rho);
  } else if (opt.gauge == "linf") {
    ball = make_norm_ball(
        [](const CoefVec& d) { return d.cwiseAbs().maxCoeff(); }, "linf",
        CoefVec::Zero(m), opt.rho);
  } else {
    throw std::invalid_argument("gauge must be affine|linf");
  }

  const BoundaryReport rep = boundary_condition_check(F, ball, 100, opt.seed);
  const ZeroResult zr = find_zero(F, ball, opt.tol, opt.budget, opt.seed);

  json out;
  out["field"] = opt.field;
  out["gauge"] = ball.gauge_id;
  out["rho"] = opt.rho;
  out["boundary_min_pairing"] = rep.min_pairing;
  out["boundary_pass"] = rep.pass;
  out["z"] = vec_to_json(zr.z);
  out["residual_sup"] = zr.residual_sup;
  out["residual_l2"] = zr.residual_l2;
  out["iterations"] = zr.iterations;
  out["strategy_used"] = zr.strategy_used;
  out["in_ball"] = zr.in_ball;
  out["success"] = zr.success;
  const std::filesystem::path dir(opt.outdir);
  atomic_write(dir / "zero.json", out.dump(2) + "\n");
  json cfg = {{"field", opt.field}, {"gauge", opt.gauge}, {"m", opt.m},
              {"p", opt.p},         {"rho", opt.rho},     {"tol", opt.tol},
              {"seed", opt.seed},   {"budget", opt.budget}};
  write_manifest(dir, "fixedpoint", cfg);
  return zr.success ? kExitOk : kExitCertificate;
}

// --- constants ---------------------------------------------------------------

struct ConstantsOptions {
  double p = 2.0;
  std::vector<double> q_list = {2.0};
  std::vector<int> m_list = {1, 3, 6};
  int samples = 200;
  std::uint64_t seed = 5;
  int quad_order = 48;
  int sphere_points = 256;
  std::string outdir = "out";
};

inline int run_constants(const ConstantsOptions& opt) {
  std::ostringstream csv;
  csv << "# affine Poincare-Sobolev constants and gauge ratio extrema\n";
  csv << "# columns: m, then mu_{p,q} per q (dimensionless), c_m, C, D1, D2, "
         "D3 (dimensionless ratios)\n";
  csv << "m";
  for (double q : opt.q_list) csv << ",mu_p_" << q;
  csv << ",c_m,C,D1,D2,D3\n";
  for (int m : opt.m_list) {
    ProblemSpec spec;
    spec.p = opt.p;
    spec.alpha = 0.5 * (1.0 + opt.p);  // unused by constants, must be valid
    spec.m = m;
    spec.quad_order = opt.quad_order;
    spec.sphere_points = opt.sphere_points;
    const ProblemContext pc = make_problem_context(spec);
    const ConstantsEstimate est =
        estimate_constants(pc, opt.samples, opt.seed, opt.q_list);
    csv << m;
    char buf[160];
    for (double q : opt.q_list) {
      std::snprintf(buf, sizeof buf, ",%.12g", est.mu_pq.at(q));
      csv << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  est.c_m, est.C, est.D1, est.D2, est.D3);
    csv << buf;
  }
  const std::filesystem::path dir(opt.outdir);
  atomic_write(dir / "constants.csv", csv.str());
  json cfg = {{"p", opt.p},
              {"samples", opt.samples},
              {"seed", opt.seed},
              {"m_list", opt.m_list},
              {"q_list", opt.q_list}};
  write_manifest(dir, "constants", cfg);
  return kExitOk;
}

// --- solve ---------------------------------------------------------------

struct SolveOptions {
  double p = 2.0;
  double alpha = 1.5;
  std::string source = "constant:1";
  std::vector<int> m_list = {10};
  std::uint64_t seed = 1;
  double residual_tol = 1e-8;
  int quad_order = 48;
  int sphere_points = 256;
  bool svg = false;
  std::string outdir = "out";
};

inline std::string sweep_svg(const std::vector<int>& ms,
                             const std::vector<double>& eps) {
  const int W = 480, H = 320, pad = 50;
  double ymin = eps[0], ymax = eps[0];
  for (double v : eps) {
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  const double xmin = ms.front(), xmax = std::max(ms.back(), ms.front() + 1);
  auto X = [&](double m) {
    return pad + (m - xmin) / (xmax - xmin) * (W - 2 * pad);
  };
  auto Y = [&](double v) {
    return H - pad - (v - ymin) / (ymax - ymin) * (H - 2 * pad);
  };
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W
      << "' height='" << H << "'>\n";
  svg << "<line x1='" << pad << "' y1='" << H - pad << "' x2='" << W - pad
      << "' y2='" << H - pad << "' stroke='black'/>\n";
  svg << "<line x1='" << pad << "' y1='" << pad << "' x2='" << pad << "' y2='"
      << H - pad << "' stroke='black'/>\n";
  svg << "<text x='" << W / 2 << "' y='" << H - 12
      << "' font-size='12'>m</text>\n";
  svg << "<text x='8' y='" << H / 2 << "' font-size='12'>E^p</text>\n";
  svg << "<polyline fill='none' stroke='steelblue' stroke-width='2' points='";
  for (size_t i = 0; i < ms.size(); ++i)
    svg << X(ms[i]) << "," << Y(eps[i]) << " ";
  svg << "'/>\n</svg>\n";
  return svg.str();
}

inline int run_solve(const SolveOptions& opt) {
  const std::filesystem::path dir(opt.outdir);
  std::ostringstream csv;
  csv << "# Galerkin critical-point sweep; E in W^{1,p}-gradient units, "
         "Phi dimensionless\n";
  csv << "m,E,E_pow_p,Phi,residual_sup,identity_gap,rho_used,l2_norm\n";
  json runs = json::array();
  bool all_ok = true;
  std::vector<double> eps;
  for (int m : opt.m_list) {
    ProblemSpec spec;
    spec.p = opt.p;
    spec.alpha = opt.alpha;
    spec.source = parse_source(opt.source);
    spec.m = m;
    spec.quad_order = opt.quad_order;
    spec.sphere_points = opt.sphere_points;
    spec.residual_tol = opt.residual_tol;
    const SolveResult r = solve_critical_point(spec, opt.seed);
    all_ok = all_ok && r.success;
    const double ep = std::pow(r.energy, opt.p);
    eps.push_back(ep);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%d,%.12g,%.12g,%.12g,%.3g,%.3g,%.12g,%.12g\n", m, r.energy,
                  ep, r.phi_value, r.residual_sup, r.identity_gap, r.rho_used,
                  r.l2_norm_of_u);
    csv << buf;
    json jr;
    jr["m"] = m;
    jr["zeta_star"] = vec_to_json(r.zeta_star);
    jr["energy"] = r.energy;
    jr["phi_value"] = r.phi_value;
    jr["residual_sup"] = r.residual_sup;
    jr["rho_used"] = r.rho_used;
    jr["identity_gap"] = r.identity_gap;
    jr["l2_norm_of_u"] = r.l2_norm_of_u;
    jr["iterations"] = r.iterations;
    jr["mu_pp"] = r.mu_pp;
    jr["mu_palpha"] = r.mu_palpha;
    jr["boundary_pass"] = r.boundary_pass;
    jr["trivial"] = r.trivial;
    jr["success"] = r.success;
    if (!r.success) jr["failure_reason"] = r.failure_reason;
    runs.push_back(jr);
  }
  json out;
  out["runs"] = runs;
  out["max_energy_pow_p"] =
      eps.empty() ? 0.0 : *std::max_element(eps.begin(), eps.end());
  atomic_write(dir / "solve.json", out.dump(2) + "\n");
  atomic_write(dir / "sweep.csv", csv.str());
  if (opt.svg && !opt.m_list.empty())
    atomic_write(dir / "sweep.svg", sweep_svg(opt.m_list, eps));
  json cfg = {{"p", opt.p},       {"alpha", opt.alpha},
              {"source", opt.source}, {"m_list", opt.m_list},
              {"seed", opt.seed}, {"residual_tol", opt.residual_tol},
              {"quad_order", opt.quad_order},
              {"sphere_points", opt.sphere_points}};
  write_manifest(dir, "solve", cfg);
  return all_ok ? kExitOk : kExitCertificate;
}

// --- report ---------------------------------------------------------------

// Aggregates solve.json / zero.json / witness.json files found under a
// directory tree into one CSV.
inline int run_report(const std::string& indir, const std::string& outdir) {
  std::ostringstream csv;
  csv << "# aggregated run results\n";
  csv << "file,kind,key_metric,value,success\n";
  std::vector<std::filesystem::path> files;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(indir))
    if (entry.is_regular_file() && entry.path().extension() == ".json" &&
        entry.path().filename() != "manifest.json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    json j;
    try {
      in >> j;
    } catch (...) {
      continue;
    }
    if (j.contains("runs")) {
      for (const auto& r : j["runs"])
        csv << f.string() << ",solve,residual_sup,"
            << r.value("residual_sup", 0.0) << ","
            << (r.value("success", false) ? 1 : 0) << "\n";
    } else if (j.contains("residual_sup")) {
      csv << f.string() << ",fixedpoint,residual_sup,"
          << j.value("residual_sup", 0.0) << ","
          << (j.value("success", false) ? 1 : 0) << "\n";
    } else if (j.contains("found")) {
      csv << f.string() << ",witness,margin," << j.value("margin", 0.0) << ","
          << (j.value("found", false) ? 1 : 0) << "\n";
    } else if (j.contains("energy")) {
      csv << f.string() << ",energy,E," << j.value("energy", 0.0) << ",1\n";
    }
  }
  atomic_write(std::filesystem::path(outdir) / "report.csv", csv.str());
  write_manifest(outdir, "report", json{{"input_dir", indir}});
  return kExitOk;
}

}  // namespace affinelp::cli
