// Acceptance suite: one pass/fail line per criterion, exit 1 on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "affinelp/domain.hpp"
#include "affinelp/energy.hpp"
#include "affinelp/fixed_point.hpp"
#include "affinelp/galerkin.hpp"
#include "affinelp/geometry.hpp"
#include "affinelp/rng.hpp"
#include "affinelp/sphere.hpp"
#include "test_fields.hpp"

using namespace affinelp;
using affinelp_tests::bump_field;
using affinelp_tests::unimodular;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail, double seconds) {
  std::printf("[%s] %2d %-28s %s (%.1fs)\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

void run(int id, const std::string& name,
         const std::function<bool(std::string&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(id, name, pass, detail, secs);
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", x);
  return buf;
}

CoefVec random_vec(Rng& rng, int m) {
  CoefVec z(m);
  for (int i = 0; i < m; ++i) z[i] = rng.normal();
  return z;
}

}  // namespace

int main() {
  // 1. isotropic equality at default resolution
  run(1, "isotropic equality", [](std::string& detail) {
    const GaugeContext ctx = make_gauge_context(1, 2.0, 48, 256);
    const double E = floor_gauge(CoefVec::Unit(1, 0), ctx);
    const double exact = M_PI / std::sqrt(2.0);
    const double rel = std::abs(E - exact) / exact;
    detail = "rel_err=" + sci(rel);
    return rel < 1e-6;
  });

  // 2. upper-bound inequality over random samples
  run(2, "upper bound E <= ||grad u||_p", [](std::string& detail) {
    const DomainSpec dom(48);
    const BasisSpec basis = build_basis(10, dom);
    const SphereRule rule = build_circle_rule(256);
    Rng rng(1001);
    std::vector<CoefVec> samples;
    for (int s = 0; s < 1000; ++s) samples.push_back(random_vec(rng, 10));
    int violations = 0;
    double worst = 0.0;
    for (double p : {1.5, 2.0, 3.0}) {
      const EnergyParams params = make_energy_params(p);
      for (const CoefVec& z : samples) {
        const EnergyBreakdown br =
            affine_energy(expand(z, basis), rule, params);
        const double ratio = br.energy / br.grad_norm;
        worst = std::max(worst, ratio);
        if (br.energy > (1.0 + 1e-6) * br.grad_norm) ++violations;
      }
    }
    detail = "violations=" + std::to_string(violations) +
             " max_ratio=" + sci(worst);
    return violations == 0;
  });

  // 3. SL(2) invariance on sheared bumps
  run(3, "SL(2) invariance", [](std::string& detail) {
    const DomainSpec dom(48);
    const SphereRule rule = build_circle_rule(256);
    const EnergyParams params = make_energy_params(2.0);
    const double base = affine_energy(bump_field(dom), rule, params).energy;
    Rng rng(77);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Matrix2d A =
          unimodular(rng.uniform(0.0, 2.0 * M_PI),
                     rng.uniform(0.0, 2.0 * M_PI), rng.uniform(0.8, 1.25));
      const double sheared =
          affine_energy(bump_field(dom, {0.5, 0.5}, 0.35, A), rule, params)
              .energy;
      worst = std::max(worst, std::abs(sheared - base) / base);
    }
    detail = "max_rel_dev=" + sci(worst);
    return worst < 1e-6;
  });

  // 4. Euler identity <energy_grad(zeta), zeta> = E^p
  run(4, "Euler identity", [](std::string& detail) {
    const DomainSpec dom(48);
    const BasisSpec basis = build_basis(10, dom);
    const SphereRule rule = build_circle_rule(256);
    Rng rng(2024);
    double worst = 0.0;
    for (double p : {2.0, 2.5}) {
      const EnergyParams params = make_energy_params(p);
      for (int s = 0; s < 100; ++s) {
        const CoefVec z = random_vec(rng, 10);
        const double lhs = energy_grad(z, basis, rule, params).dot(z);
        const double ep =
            std::pow(affine_energy(expand(z, basis), rule, params).energy, p);
        worst = std::max(worst, std::abs(lhs - ep) / ep);
      }
    }
    detail = "max_rel_err=" + sci(worst);
    return worst < 1e-10;
  });

  // 5. assemble_F vs central finite differences of phi_m
  run(5, "gradient correctness of F", [](std::string& detail) {
    ProblemSpec spec;
    spec.p = 2.0;
    spec.alpha = 1.5;
    spec.source = parse_source("constant:1");
    spec.m = 10;
    const ProblemContext pc = make_problem_context(spec);
    Rng rng(555);
    double worst = 0.0;
    const double h = 1e-5;
    for (int point = 0; point < 20; ++point) {
      const CoefVec z = random_vec(rng, 10);
      const Eigen::VectorXd F = assemble_F(z, pc);
      const double scale = F.cwiseAbs().maxCoeff();
      for (int i = 0; i < 10; ++i) {
        CoefVec zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        const double fd = (phi_m(zp, pc) - phi_m(zm, pc)) / (2.0 * h);
        worst = std::max(worst, std::abs(F[i] - fd) /
                                    std::max(std::abs(fd), scale));
      }
    }
    detail = "max_rel_err=" + sci(worst);
    return worst < 1e-5;
  });

  // 6. witness searches with bit-exact replay
  run(6, "non-norm/nonconvexity witnesses", [](std::string& detail) {
    const GaugeContext ctx = make_gauge_context(8, 2.0, 48, 256);
    const auto tri = search_triangle_violation(ctx, 42, 10000);
    if (!tri) {
      detail = "triangle witness not found";
      return false;
    }
    const auto tri2 = search_triangle_violation(ctx, 42, 10000);
    const bool tri_replay =
        tri2 && tri2->margin == tri->margin && tri2->u == tri->u;
    const auto ncv = search_nonconvexity(ctx, 7, 10000);
    if (!ncv) {
      detail = "nonconvexity witness not found";
      return false;
    }
    const auto ncv2 = search_nonconvexity(ctx, 7, 10000);
    const bool ncv_replay =
        ncv2 && ncv2->margin == ncv->margin && ncv2->u == ncv->u;
    detail = "tri_margin=" + sci(tri->margin) +
             " ncv_margin=" + sci(ncv->margin);
    return tri->margin > 1e-4 && ncv->margin > 1e-4 && tri_replay &&
           ncv_replay;
  });

  // 7. homeomorphism roundtrip
  run(7, "homeomorphism roundtrip", [](std::string& detail) {
    const GaugeContext ctx = make_gauge_context(6, 2.0, 48, 256);
    Rng rng(31);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const CoefVec center = random_vec(rng, 6);
      const double rho = rng.uniform(0.5, 5.0);
      CoefVec d = random_vec(rng, 6);
      d *= rng.uniform() * rho / floor_gauge(d, ctx);
      const CoefVec x = center + d;
      const CoefVec gtx = map_G(map_T(x, center, rho, ctx), center, rho, ctx);
      worst = std::max(worst, (gtx - x).norm());
      CoefVec y = random_vec(rng, 6);
      y *= rng.uniform() / w1pm_norm(y, ctx);
      const CoefVec tgy = map_T(map_G(y, center, rho, ctx), center, rho, ctx);
      worst = std::max(worst, (tgy - y).norm());
    }
    detail = "max_roundtrip_err=" + sci(worst);
    return worst < 1e-10;
  });

  // 8. fixed-point harness on generated boundary-compliant fields
  run(8, "fixed-point harness", [](std::string& detail) {
    Rng rng(808);
    int successes = 0;
    const int total = 100;
    double worst_linear = 0.0;
    for (int trial = 0; trial < total; ++trial) {
      const int m = 3 + static_cast<int>(rng.uniform() * 8.0);  // 3..10
      Eigen::MatrixXd M(m, m), S(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          M(i, j) = rng.normal();
          S(i, j) = rng.normal();
        }
      const Eigen::MatrixXd A =
          M.transpose() * M + Eigen::MatrixXd::Identity(m, m);
      const Eigen::MatrixXd K = 0.3 * (S - S.transpose());
      CoefVec b(m);
      for (int i = 0; i < m; ++i) b[i] = 0.3 * rng.normal();
      GaugeBallSpec ball = make_norm_ball(
          [](const CoefVec& d) { return d.norm(); }, "l2", CoefVec::Zero(m),
          3.0);
      if (trial % 2 == 0) {
        // pure linear field; compare against the direct solve
        const VectorField F{
            [A, b](const CoefVec& z) -> CoefVec { return A * z - b; },
            "linear"};
        const ZeroResult r = find_zero(F, ball, 1e-8, 30000, trial);
        if (r.success) ++successes;
        const CoefVec direct = A.lu().solve(b);
        worst_linear =
            std::max(worst_linear, (r.z - direct).cwiseAbs().maxCoeff());
      } else {
        const double quartic = 0.5 * rng.uniform();
        const VectorField F{[A, K, b, quartic](const CoefVec& z) -> CoefVec {
                              return A * z + K * z +
                                     quartic * z.squaredNorm() * z - b;
                            },
                            "random-coercive"};
        const ZeroResult r = find_zero(F, ball, 1e-8, 30000, trial);
        if (r.success) ++successes;
      }
    }
    detail = "successes=" + std::to_string(successes) + "/100" +
             " linear_dev=" + sci(worst_linear);
    return successes >= 95 && worst_linear <= 1e-8;
  });

  // 9. certified critical-point sweep, end to end
  static std::vector<SolveResult> sweep;  // reused by criterion 11
  run(9, "critical-point sweep", [](std::string& detail) {
    bool all_ok = true;
    double max_ep = 0.0;
    for (int m : {5, 10, 15, 20, 25}) {
      ProblemSpec spec;
      spec.p = 2.0;
      spec.alpha = 1.5;
      spec.source = parse_source("constant:1");
      spec.m = m;
      const SolveResult r = solve_critical_point(spec, 1);
      sweep.push_back(r);
      const double ep = std::pow(r.energy, spec.p);
      max_ep = std::max(max_ep, ep);
      const bool ok = r.success && r.residual_sup <= 1e-8 &&
                      r.energy <= r.rho_used * (1.0 + 1e-9) &&
                      r.identity_gap <= 1e-6 * (1.0 + ep) &&
                      r.l2_norm_of_u > 0.0;
      if (!ok) {
        all_ok = false;
        detail += "m=" + std::to_string(m) + " failed (" + r.failure_reason +
                  ") ";
      }
    }
    detail += "max_E^p=" + sci(max_ep);
    return all_ok && std::isfinite(max_ep);
  });

  // 10. mu estimate sanity and monotonicity across nested m
  run(10, "mu estimate sanity", [](std::string& detail) {
    double prev = std::numeric_limits<double>::infinity();
    double m1_value = 0.0;
    CoefVec warm;
    bool monotone = true;
    for (int m : {1, 3, 6, 10}) {
      ProblemSpec spec;
      spec.p = 2.0;
      spec.alpha = 1.5;
      spec.m = m;
      const ProblemContext pc = make_problem_context(spec);
      const MuEstimate mu =
          estimate_mu(pc, 2.0, 6, 4000, 17,
                      warm.size() ? std::optional<CoefVec>(warm)
                                  : std::nullopt);
      if (m == 1) m1_value = mu.value;
      if (mu.value > prev + 1e-10) monotone = false;
      prev = mu.value;
      warm = mu.minimizer;
    }
    const double exact = M_PI * std::sqrt(2.0);
    const double rel = std::abs(m1_value - exact) / exact;
    detail = "m1_rel_err=" + sci(rel) +
             " monotone=" + (monotone ? std::string("yes") : "no");
    return rel < 1e-6 && monotone;
  });

  // 11. boundary coercivity at the computed existence radius
  run(11, "boundary coercivity at rho", [](std::string& detail) {
    ProblemSpec spec;
    spec.p = 2.0;
    spec.alpha = 1.5;
    spec.source = parse_source("constant:1");
    spec.m = 10;
    const ProblemContext pc = make_problem_context(spec);
    const double rho = sweep.size() >= 2 ? sweep[1].rho_used : 5.0;
    const VectorField F{[&pc](const CoefVec& z) { return assemble_F(z, pc); },
                        "euler-lagrange"};
    Rng rng(404);
    double min_pairing = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 200; ++s) {
      CoefVec d = random_vec(rng, 10);
      d *= rho / floor_gauge(d, pc.gauge);
      min_pairing = std::min(min_pairing, assemble_F(d, pc).dot(d));
    }
    detail = "rho=" + sci(rho) +
             " min_pairing=" + sci(min_pairing);
    return min_pairing > 0.0;
  });

  std::printf("%s: %d criterion(s) failed\n",
              failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
              failures);
  return failures == 0 ? 0 : 1;
}
