// Command line front end: energy, geometry, fixedpoint, constants, solve,
// report. Results are deterministic functions of (config, seed); every run
// writes a manifest echoing the resolved configuration.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "affinelp/cli.hpp"

namespace {

using namespace affinelp;
using namespace affinelp::cli;

struct Options {
  EnergyOptions energy;
  GeometryOptions geometry;
  FixedPointOptions fixedpoint;
  ConstantsOptions constants;
  SolveOptions solve;
  std::string report_in = "out";
  std::string report_out = "out";
  std::string subcommand;
  std::string config_path;
};

// Builds the app and parses one argument vector. Options carry take_last
// policy so config-file tokens (injected before user flags) lose to flags.
int parse_args(const std::vector<std::string>& args, Options& o,
               bool& usage_error) {
  CLI::App app{"affine L^p energy toolkit"};
  app.require_subcommand(1);

  auto last = [](CLI::Option* opt) {
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    return opt;
  };

  auto* energy =
      app.add_subcommand("energy", "affine energy of a basis expansion");
  last(energy->add_option("--p", o.energy.p, "integrability exponent p > 1"));
  last(energy->add_option("--m", o.energy.m, "Galerkin dimension"));
  last(energy->add_option("--quad-order", o.energy.quad_order,
                      "Gauss-Legendre points per axis"));
  last(energy->add_option("--sphere-points", o.energy.sphere_points,
                      "directions on the unit circle"));
  energy->add_option("--zeta", o.energy.zeta,
                     "coefficient vector (default: first basis mode)")->delimiter(',');
  last(energy->add_option("--out", o.energy.outdir, "output directory"));
  last(energy->add_option("--config", o.config_path, "config file (key=value or JSON)"));

  auto* geometry = app.add_subcommand(
      "geometry", "non-norm / nonconvexity witness search");
  last(geometry->add_option("--kind", o.geometry.kind,
                        "triangle | nonconvexity"));
  last(geometry->add_option("--m", o.geometry.m, "Galerkin dimension"));
  last(geometry->add_option("--p", o.geometry.p, "integrability exponent p > 1"));
  last(geometry->add_option("--seed", o.geometry.seed, "search seed"));
  last(geometry->add_option("--budget", o.geometry.budget,
                        "gauge evaluation budget"));
  last(geometry->add_option("--quad-order", o.geometry.quad_order,
                        "Gauss-Legendre points per axis"));
  last(geometry->add_option("--sphere-points", o.geometry.sphere_points,
                        "directions on the unit circle"));
  last(geometry->add_option("--out", o.geometry.outdir, "output directory"));
  last(geometry->add_option("--config", o.config_path, "config file (key=value or JSON)"));

  auto* fixedpoint =
      app.add_subcommand("fixedpoint", "zero finding in gauge balls");
  last(fixedpoint->add_option("--field", o.fixedpoint.field,
                          "identity | linear | random-coercive | euler-lagrange"));
  last(fixedpoint->add_option("--gauge", o.fixedpoint.gauge, "affine | linf"));
  last(fixedpoint->add_option("--m", o.fixedpoint.m, "Galerkin dimension"));
  last(fixedpoint->add_option("--p", o.fixedpoint.p, "integrability exponent p > 1"));
  last(fixedpoint->add_option("--alpha", o.fixedpoint.alpha,
                          "subcritical exponent, 1 < alpha < p"));
  last(fixedpoint->add_option("--source", o.fixedpoint.source,
                          "source term, e.g. constant:1, sine:1,1, bump:2"));
  last(fixedpoint->add_option("--rho", o.fixedpoint.rho, "ball radius"));
  last(fixedpoint->add_option("--tol", o.fixedpoint.tol, "sup-norm residual tolerance"));
  last(fixedpoint->add_option("--seed", o.fixedpoint.seed, "multistart seed"));
  last(fixedpoint->add_option("--budget", o.fixedpoint.budget,
                          "field evaluation budget"));
  last(fixedpoint->add_option("--quad-order", o.fixedpoint.quad_order,
                          "Gauss-Legendre points per axis"));
  last(fixedpoint->add_option("--sphere-points", o.fixedpoint.sphere_points,
                          "directions on the unit circle"));
  last(fixedpoint->add_option("--out", o.fixedpoint.outdir, "output directory"));
  last(fixedpoint->add_option("--config", o.config_path,
                          "config file (key=value or JSON)"));

  auto* constants = app.add_subcommand(
      "constants", "Poincare-Sobolev constant estimates");
  last(constants->add_option("--p", o.constants.p, "integrability exponent p > 1"));
  constants->add_option("--q-list", o.constants.q_list,
                         "target L^q exponents")->delimiter(',');
  constants->add_option("--m-list", o.constants.m_list,
                         "Galerkin dimensions to tabulate")->delimiter(',');
  last(constants->add_option("--samples", o.constants.samples,
                         "random samples per extremum estimate"));
  last(constants->add_option("--seed", o.constants.seed, "sampling seed"));
  last(constants->add_option("--quad-order", o.constants.quad_order,
                         "Gauss-Legendre points per axis"));
  last(constants->add_option("--sphere-points", o.constants.sphere_points,
                         "directions on the unit circle"));
  last(constants->add_option("--out", o.constants.outdir, "output directory"));
  last(constants->add_option("--config", o.config_path,
                         "config file (key=value or JSON)"));

  auto* solve = app.add_subcommand(
      "solve", "critical point of the affine functional");
  last(solve->add_option("--p", o.solve.p, "integrability exponent p > 1"));
  last(solve->add_option("--alpha", o.solve.alpha,
                     "subcritical exponent, 1 < alpha < p"));
  last(solve->add_option("--source", o.solve.source,
                     "source term, e.g. constant:1, sine:1,1, bump:2"));
  solve->add_option("--m-list", o.solve.m_list,
                     "Galerkin dimensions for the sweep")->delimiter(',');
  last(solve->add_option("--seed", o.solve.seed, "multistart seed"));
  last(solve->add_option("--residual-tol", o.solve.residual_tol,
                     "sup-norm residual tolerance"));
  last(solve->add_option("--quad-order", o.solve.quad_order,
                     "Gauss-Legendre points per axis"));
  last(solve->add_option("--sphere-points", o.solve.sphere_points,
                     "directions on the unit circle"));
  solve->add_flag("--svg", o.solve.svg, "also render sweep.svg");
  last(solve->add_option("--out", o.solve.outdir, "output directory"));
  last(solve->add_option("--config", o.config_path,
                     "config file (key=value or JSON)"));

  auto* report = app.add_subcommand("report", "aggregate prior run outputs");
  last(report->add_option("--dir", o.report_in, "directory tree of prior runs"));
  last(report->add_option("--out", o.report_out, "output directory"));

  // CLI11 parses argument vectors in reverse order
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    usage_error = true;
    return app.exit(e);
  }

  for (auto* sub : {energy, geometry, fixedpoint, constants, solve, report})
    if (sub->parsed()) o.subcommand = sub->get_name();

  // validate config keys against the chosen subcommand's options
  if (!o.config_path.empty()) {
    CLI::App* sub = app.get_subcommand(o.subcommand);
    for (const auto& [key, value] : load_config_file(o.config_path))
      if (!sub->get_option_no_throw("--" + key))
        throw CLI::ValidationError("unknown config key: " + key);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  Options opts;
  bool usage_error = false;
  try {
    parse_args(args, opts, usage_error);
    if (usage_error) return kExitUsage;

    if (!opts.config_path.empty()) {
      // reparse with config tokens injected right after the subcommand so
      // explicit flags take precedence
      std::vector<std::string> merged;
      merged.push_back(opts.subcommand);
      for (const auto& [key, value] : load_config_file(opts.config_path)) {
        merged.push_back("--" + key);
        merged.push_back(value);
      }
      for (size_t i = 1; i < args.size(); ++i) merged.push_back(args[i]);
      Options fresh;
      parse_args(merged, fresh, usage_error);
      if (usage_error) return kExitUsage;
      opts = fresh;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  }

  try {
    if (opts.subcommand == "energy") return run_energy(opts.energy);
    if (opts.subcommand == "geometry") return run_geometry(opts.geometry);
    if (opts.subcommand == "fixedpoint")
      return run_fixedpoint(opts.fixedpoint);
    if (opts.subcommand == "constants") return run_constants(opts.constants);
    if (opts.subcommand == "solve") return run_solve(opts.solve);
    if (opts.subcommand == "report")
      return run_report(opts.report_in, opts.report_out);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCertificate;
  }
  return kExitUsage;
}
