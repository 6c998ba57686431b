#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "affinelp/domain.hpp"
#include "affinelp/energy.hpp"
#include "affinelp/fixed_point.hpp"
#include "affinelp/geometry.hpp"

namespace affinelp {

// Closed-form source terms, so ||f||_{L^{p'}} is quadrature-accurate.
struct SourceSpec {
  enum class Kind { constant, sine_product, bump_poly };
  Kind kind = Kind::constant;
  double amplitude = 1.0;
  int j = 1, k = 1;  // sine_product frequencies

  double eval(double x, double y) const {
    switch (kind) {
      case Kind::constant:
        return amplitude;
      case Kind::sine_product:
        return amplitude * std::sin(j * M_PI * x) * std::sin(k * M_PI * y);
      case Kind::bump_poly:
        return amplitude * x * y * (1.0 - x) * (1.0 - y);
    }
    return 0.0;
  }

  bool is_zero() const { return amplitude == 0.0; }
};

inline SourceSpec parse_source(const std::string& text) {
  SourceSpec s;
  auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::string rest = text.substr(colon + 1);
    size_t pos = 0;
    while (pos < rest.size()) {
      size_t next = rest.find(',', pos);
      if (next == std::string::npos) next = rest.size();
      args.push_back(std::stod(rest.substr(pos, next - pos)));
      pos = next + 1;
    }
  }
  if (name == "constant") {
    s.kind = SourceSpec::Kind::constant;
    s.amplitude = args.empty() ? 1.0 : args[0];
  } else if (name == "sine") {
    s.kind = SourceSpec::Kind::sine_product;
    s.j = args.size() > 0 ? static_cast<int>(args[0]) : 1;
    s.k = args.size() > 1 ? static_cast<int>(args[1]) : 1;
    s.amplitude = args.size() > 2 ? args[2] : 1.0;
  } else if (name == "bump") {
    s.kind = SourceSpec::Kind::bump_poly;
    s.amplitude = args.empty() ? 1.0 : args[0];
  } else {
    throw std::invalid_argument("unknown source term: " + text);
  }
  return s;
}

struct ProblemSpec {
  double p = 2.0;
  double alpha = 1.5;
  SourceSpec source;
  int m = 10;
  int quad_order = 48;
  int sphere_points = 256;
  double residual_tol = 1e-8;
  double identity_rel_tol = 1e-6;
  int solver_budget = 200000;

  void validate() const {
    if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
    if (!(alpha > 1.0 && alpha < p))
      throw std::invalid_argument("alpha must satisfy 1 < alpha < p");
    if (m < 1) throw std::invalid_argument("m must be >= 1");
  }

  double p_conj() const { return p / (p - 1.0); }
};

// Assembled tables for one (p, alpha, f, m) problem.
struct ProblemContext {
  ProblemSpec spec;
  GaugeContext gauge;
  Eigen::VectorXd f_nodes;    // f at domain nodes
  Eigen::VectorXd f_moments;  // int f w_j dx per basis function
  double f_lppr = 0.0;        // ||f||_{L^{p'}}
};

inline ProblemContext make_problem_context(const ProblemSpec& spec) {
  spec.validate();
  ProblemContext pc;
  pc.spec = spec;
  pc.gauge = make_gauge_context(spec.m, spec.p, spec.quad_order,
                                spec.sphere_points);
  const auto& quad = *pc.gauge.basis->quad;
  const Eigen::Index Q = quad.weights.size();
  pc.f_nodes.resize(Q);
  for (Eigen::Index q = 0; q < Q; ++q)
    pc.f_nodes[q] = spec.source.eval(quad.nodes(0, q), quad.nodes(1, q));
  pc.f_moments =
      pc.gauge.basis->values.transpose() * quad.weights.cwiseProduct(pc.f_nodes);
  const double ppr = spec.p_conj();
  double s = 0.0;
  for (Eigen::Index q = 0; q < Q; ++q)
    s += quad.weights[q] * std::pow(std::abs(pc.f_nodes[q]), ppr);
  pc.f_lppr = std::pow(s, 1.0 / ppr);
  return pc;
}

inline double phi_m(const CoefVec& zeta, const ProblemContext& pc) {
  const GradField field = expand(zeta, *pc.gauge.basis);
  const double E =
      affine_energy(field, *pc.gauge.rule, pc.gauge.params).energy;
  const double p = pc.spec.p, alpha = pc.spec.alpha;
  const auto& w = field.quad->weights;
  double la = 0.0, fu = 0.0;
  for (Eigen::Index q = 0; q < w.size(); ++q) {
    la += w[q] * std::pow(std::abs(field.values[q]), alpha);
    fu += w[q] * pc.f_nodes[q] * field.values[q];
  }
  return std::pow(E, p) / p - la / alpha - fu;
}

// The Galerkin system: the exact coefficient-space gradient of phi_m.
inline Eigen::VectorXd assemble_F(const CoefVec& zeta,
                                  const ProblemContext& pc) {
  Eigen::VectorXd F =
      energy_grad(zeta, *pc.gauge.basis, *pc.gauge.rule, pc.gauge.params);
  const GradField field = expand(zeta, *pc.gauge.basis);
  const auto& w = field.quad->weights;
  const double alpha = pc.spec.alpha;
  Eigen::VectorXd t(w.size());
  for (Eigen::Index q = 0; q < w.size(); ++q) {
    const double u = field.values[q];
    t[q] = std::abs(u) < 1e-300 ? 0.0 : w[q] * signed_pow(u, alpha - 1.0);
  }
  F.noalias() -= pc.gauge.basis->values.transpose() * t;
  F -= pc.f_moments;
  return F;
}

struct MuEstimate {
  double value = 0.0;
  bool converged = false;
  CoefVec minimizer;
};

// Finite-m upper estimate of the affine Poincare-Sobolev constant:
// min over W_m of E(u) / ||u||_{L^q}, by projected descent with multistarts.
inline MuEstimate estimate_mu(const ProblemContext& pc, double q,
                              int multistarts = 8, int budget = 4000,
                              std::uint64_t seed = 17,
                              std::optional<CoefVec> warm_start = {}) {
  if (q < 1.0) throw std::invalid_argument("estimate_mu requires q >= 1");
  const int m = pc.gauge.m();
  Rng rng(seed);
  auto ratio = [&](const CoefVec& z) {
    const GradField f = expand(z, *pc.gauge.basis);
    const double lq = lq_norm(f, q);
    if (lq < 1e-14) return std::numeric_limits<double>::infinity();
    return affine_energy(f, *pc.gauge.rule, pc.gauge.params).energy / lq;
  };

  int evals = 0;
  MuEstimate best;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<CoefVec> starts;
  starts.push_back(CoefVec::Unit(m, 0));
  if (warm_start && warm_start->size() <= m) {
    CoefVec z = CoefVec::Zero(m);
    z.head(warm_start->size()) = *warm_start;
    starts.push_back(z);
  }
  for (int s = static_cast<int>(starts.size()); s < multistarts; ++s) {
    CoefVec z(m);
    for (int i = 0; i < m; ++i) z[i] = rng.normal();
    starts.push_back(z);
  }

  for (CoefVec z : starts) {
    z.normalize();
    double val = ratio(z);
    ++evals;
    const double h = 1e-6;
    bool stalled = false;
    while (evals < budget && !stalled) {
      CoefVec g(m);
      for (int i = 0; i < m; ++i) {
        CoefVec zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        g[i] = (ratio(zp) - ratio(zm)) / (2.0 * h);
        evals += 2;
      }
      // project out the radial component (ratio is scale-invariant)
      g -= g.dot(z) * z;
      if (g.norm() < 1e-12) break;
      double step = 0.5;
      stalled = true;
      for (int bt = 0; bt < 25 && evals < budget; ++bt) {
        CoefVec zt = (z - step * g).normalized();
        const double vt = ratio(zt);
        ++evals;
        if (vt < val - 1e-15) {
          z = zt;
          val = vt;
          stalled = false;
          break;
        }
        step *= 0.5;
      }
      if (val < best.value) {
        best.value = val;
        best.minimizer = z;
        best.converged = g.norm() < 1e-6 * (1.0 + val);
      }
    }
    if (val < best.value) {
      best.value = val;
      best.minimizer = z;
    }
  }
  if (!best.minimizer.size()) best.minimizer = CoefVec::Unit(m, 0);
  return best;
}

// Existence radius from the coercivity chain; independent of m given the
// true constants, conservative with finite-m estimates.
inline double rho_bound(const ProblemContext& pc, double mu_pp,
                        double mu_palpha) {
  if (mu_pp <= 0.0 || mu_palpha <= 0.0)
    throw std::invalid_argument("mu estimates must be positive");
  const double p = pc.spec.p, alpha = pc.spec.alpha;
  const double a =
      std::pow(2.0 * pc.f_lppr / mu_pp, 1.0 / (p - 1.0));
  const double b =
      std::pow(2.0 * std::pow(mu_palpha, -alpha), 1.0 / (p - alpha));
  return std::max(a, b) + 1.0;
}

struct SolveResult {
  CoefVec zeta_star;
  double energy = 0.0;       // E(u_m)
  double phi_value = 0.0;    // Phi_m(u_m)
  double residual_sup = 0.0;
  double rho_used = 0.0;
  double identity_gap = 0.0;  // |E^p - ||u||_alpha^alpha - int f u|
  double l2_norm_of_u = 0.0;
  int iterations = 0;
  double mu_pp = 0.0;
  double mu_palpha = 0.0;
  bool boundary_pass = false;
  bool trivial = false;
  bool success = false;
  std::string failure_reason;
};

namespace detail {

inline double pairing_rhs(const CoefVec& zeta, const ProblemContext& pc,
                          double& energy_out) {
  // E^p - ||u||_alpha^alpha - int f u, each by quadrature
  const GradField field = expand(zeta, *pc.gauge.basis);
  const double E =
      affine_energy(field, *pc.gauge.rule, pc.gauge.params).energy;
  energy_out = E;
  const auto& w = field.quad->weights;
  double la = 0.0, fu = 0.0;
  for (Eigen::Index q = 0; q < w.size(); ++q) {
    la += w[q] * std::pow(std::abs(field.values[q]), pc.spec.alpha);
    fu += w[q] * pc.f_nodes[q] * field.values[q];
  }
  return std::pow(E, pc.spec.p) - la - fu;
}

}  // namespace detail

inline SolveResult solve_critical_point(const ProblemSpec& spec,
                                        std::uint64_t seed = 1) {
  const ProblemContext pc = make_problem_context(spec);
  SolveResult res;
  const int m = spec.m;

  if (spec.source.is_zero()) {
    res.zeta_star = CoefVec::Zero(m);
    res.trivial = true;
    res.success = true;
    return res;
  }

  VectorField F{[&pc](const CoefVec& z) { return assemble_F(z, pc); },
                "euler-lagrange"};

  // existence radius from finite-m constant estimates
  const MuEstimate mu_pp = estimate_mu(pc, spec.p, 6, 3000, seed);
  const MuEstimate mu_pa = estimate_mu(pc, spec.alpha, 6, 3000, seed + 1);
  res.mu_pp = mu_pp.value;
  res.mu_palpha = mu_pa.value;
  double rho = rho_bound(pc, mu_pp.value, mu_pa.value);

  // the boundary sign condition must hold at rho; inflate if the finite-m
  // estimates were too optimistic
  GaugeBallSpec ball;
  for (int attempt = 0; attempt < 6; ++attempt) {
    ball = make_affine_ball(pc.gauge, CoefVec::Zero(m), rho);
    const BoundaryReport rep = boundary_condition_check(F, ball, 200, seed + 2);
    res.boundary_pass = rep.pass;
    if (rep.pass) break;
    rho *= 2.0;
  }
  res.rho_used = rho;
  if (!res.boundary_pass) {
    res.failure_reason = "boundary sign condition failed after inflation";
    return res;
  }

  // descent phase: Phi_m is coercive (alpha < p), so Armijo descent on the
  // exact gradient reaches the basin of a critical point
  CoefVec z = CoefVec::Zero(m);
  double phi = phi_m(z, pc);
  int iters = 0;
  for (int it = 0; it < 500; ++it) {
    const CoefVec g = assemble_F(z, pc);
    const double gn = g.norm();
    if (gn < 1e-10) break;
    double step = 1.0 / (1.0 + gn);
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      const CoefVec zt = z - step * g;
      const double pt = phi_m(zt, pc);
      if (pt < phi - 1e-4 * step * gn * gn) {
        z = zt;
        phi = pt;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    ++iters;
    if (!moved) break;
  }

  // Newton polish inside the existence ball
  const ZeroResult zr = find_zero(F, ball, spec.residual_tol,
                                  spec.solver_budget, seed + 3, 8, z);
  res.zeta_star = zr.z;
  res.residual_sup = zr.residual_sup;
  res.iterations = iters + zr.iterations;

  double energy = 0.0;
  const double gap = detail::pairing_rhs(zr.z, pc, energy);
  res.energy = energy;
  res.phi_value = phi_m(zr.z, pc);
  res.identity_gap = std::abs(gap);
  res.l2_norm_of_u = lq_norm(expand(zr.z, *pc.gauge.basis), 2.0);

  const double ep = std::pow(energy, spec.p);
  res.success = true;
  if (zr.residual_sup > spec.residual_tol) {
    res.success = false;
    res.failure_reason = "residual above tolerance";
  } else if (energy > rho * (1.0 + 1e-9)) {
    res.success = false;
    res.failure_reason = "solution escaped the existence ball";
  } else if (res.identity_gap > spec.identity_rel_tol * (1.0 + ep)) {
    res.success = false;
    res.failure_reason = "energy identity violated";
  } else if (res.l2_norm_of_u <= 0.0) {
    res.success = false;
    res.failure_reason = "trivial solution for nonzero source";
  }
  return res;
}

struct ConvergenceRow {
  int m_lo = 0;
  int m_hi = 0;
  double ls_difference = 0.0;
};

// Cauchy-difference diagnostic ||u_{m_{i+1}} - u_{m_i}||_{L^s} across a
// nested sweep; reported, not asserted.
inline std::vector<ConvergenceRow> convergence_study(
    const ProblemSpec& base, const std::vector<int>& m_list, double s,
    std::uint64_t seed = 1) {
  if (s < 1.0) throw std::invalid_argument("convergence_study requires s >= 1");
  for (size_t i = 1; i < m_list.size(); ++i)
    if (m_list[i] <= m_list[i - 1])
      throw std::invalid_argument("m_list must be strictly increasing");
  std::vector<CoefVec> solutions;
  for (int m : m_list) {
    ProblemSpec spec = base;
    spec.m = m;
    solutions.push_back(solve_critical_point(spec, seed).zeta_star);
  }
  std::vector<ConvergenceRow> rows;
  if (m_list.size() < 2) return rows;
  ProblemSpec top = base;
  top.m = m_list.back();
  const ProblemContext pc = make_problem_context(top);
  for (size_t i = 0; i + 1 < m_list.size(); ++i) {
    CoefVec lo = CoefVec::Zero(top.m), hi = CoefVec::Zero(top.m);
    lo.head(solutions[i].size()) = solutions[i];
    hi.head(solutions[i + 1].size()) = solutions[i + 1];
    const GradField diff = expand(hi - lo, *pc.gauge.basis);
    rows.push_back({m_list[i], m_list[i + 1], lq_norm(diff, s)});
  }
  return rows;
}

struct ConstantsEstimate {
  std::map<double, double> mu_pq;  // q -> estimate
  double c_m = 0.0;   // max ||zeta||_{1,p,m} / |zeta|_2
  double C = 0.0;     // min E / ||grad u||_p  (empirical lower constant)
  double D1 = 0.0;    // min over xi of ||grad_xi u||_p / ||u||_p
  double D2 = 0.0;    // min over xi of ||grad_xi u||_p / ||grad u||_p
  double D3 = 0.0;    // max over xi of E / ||grad_xi u||_p
  int m = 0;
  int samples = 0;
};

inline ConstantsEstimate estimate_constants(const ProblemContext& pc,
                                            int samples, std::uint64_t seed,
                                            const std::vector<double>& q_list) {
  ConstantsEstimate est;
  est.m = pc.gauge.m();
  est.samples = samples;
  Rng rng(seed);
  est.C = std::numeric_limits<double>::infinity();
  est.D1 = std::numeric_limits<double>::infinity();
  est.D2 = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    CoefVec z(est.m);
    for (int i = 0; i < est.m; ++i) z[i] = rng.normal();
    const GradField field = expand(z, *pc.gauge.basis);
    const EnergyBreakdown br =
        affine_energy(field, *pc.gauge.rule, pc.gauge.params);
    const double lp = lq_norm(field, pc.spec.p);
    const double dmin = br.dir_norms.minCoeff();
    est.c_m = std::max(est.c_m, br.grad_norm / z.norm());
    est.C = std::min(est.C, br.energy / br.grad_norm);
    est.D1 = std::min(est.D1, dmin / lp);
    est.D2 = std::min(est.D2, dmin / br.grad_norm);
    est.D3 = std::max(est.D3, br.energy / dmin);
  }
  for (double q : q_list)
    est.mu_pq[q] = estimate_mu(pc, q, 6, 3000, seed).value;
  return est;
}

}  // namespace affinelp
