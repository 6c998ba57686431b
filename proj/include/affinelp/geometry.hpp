#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "affinelp/domain.hpp"
#include "affinelp/energy.hpp"
#include "affinelp/rng.hpp"
#include "affinelp/sphere.hpp"

namespace affinelp {

struct GaugeContext {
  std::shared_ptr<const BasisSpec> basis;
  std::shared_ptr<const SphereRule> rule;
  EnergyParams params;

  int m() const { return basis->m; }
  double p() const { return params.p; }
};

inline GaugeContext make_gauge_context(int m, double p, int quad_order = 48,
                                       int sphere_points = 256) {
  GaugeContext ctx;
  DomainSpec domain(quad_order);
  ctx.basis = std::make_shared<BasisSpec>(build_basis(m, domain));
  ctx.rule = std::make_shared<SphereRule>(build_circle_rule(sphere_points));
  ctx.params = make_energy_params(p);
  return ctx;
}

// floor(zeta)_m: the affine energy of the Galerkin expansion. Homogeneous and
// positive-definite on W_m, but not a norm.
inline double floor_gauge(const CoefVec& zeta, const GaugeContext& ctx) {
  return affine_energy(expand(zeta, *ctx.basis), *ctx.rule, ctx.params).energy;
}

inline double w1pm_norm(const CoefVec& zeta, const GaugeContext& ctx) {
  return w1pm_norm(zeta, *ctx.basis, ctx.params.p);
}

inline bool in_affine_ball(const CoefVec& zeta, const CoefVec& center,
                           double rho, const GaugeContext& ctx) {
  if (rho <= 0.0) throw std::invalid_argument("affine ball radius must be > 0");
  return floor_gauge(zeta - center, ctx) <= rho;
}

// Homeomorphism from the affine ball of radius rho about `center` onto the
// unit ball of the coefficient-space W^{1,p} norm.
inline CoefVec map_T(const CoefVec& x, const CoefVec& center, double rho,
                     const GaugeContext& ctx) {
  if (rho <= 0.0) throw std::invalid_argument("rho must be > 0");
  const CoefVec d = x - center;
  const double fg = floor_gauge(d, ctx);
  if (fg > rho * (1.0 + 1e-9))
    throw std::invalid_argument("map_T: point lies outside the affine ball");
  if (fg == 0.0) return CoefVec::Zero(x.size());
  const double nn = w1pm_norm(d, ctx);
  return (d / rho) * (fg / nn);
}

inline CoefVec map_G(const CoefVec& x, const CoefVec& center, double rho,
                     const GaugeContext& ctx) {
  if (rho <= 0.0) throw std::invalid_argument("rho must be > 0");
  const double nn = w1pm_norm(x, ctx);
  if (nn > 1.0 + 1e-9)
    throw std::invalid_argument("map_G: point lies outside the unit norm ball");
  if (nn == 0.0) return center;
  const double fg = floor_gauge(x, ctx);
  return rho * x * (nn / fg) + center;
}

enum class WitnessKind { triangle_violation, nonconvexity };

inline std::string to_string(WitnessKind k) {
  return k == WitnessKind::triangle_violation ? "triangle_violation"
                                              : "nonconvexity";
}

struct Witness {
  WitnessKind kind;
  CoefVec u;
  CoefVec v;
  double margin = 0.0;
  std::uint64_t seed = 0;
};

// Budgeted Nelder-Mead on an arbitrary objective; deterministic for a fixed
// starting simplex.
inline double nelder_mead(std::function<double(const Eigen::VectorXd&)> f,
                          Eigen::VectorXd& x, int max_evals,
                          double simplex_scale = 0.5) {
  const int n = static_cast<int>(x.size());
  std::vector<Eigen::VectorXd> pts(n + 1, x);
  std::vector<double> vals(n + 1);
  int evals = 0;
  for (int i = 1; i <= n; ++i) pts[i][i - 1] += simplex_scale;
  for (int i = 0; i <= n; ++i) {
    vals[i] = f(pts[i]);
    ++evals;
  }
  std::vector<int> ord(n + 1);
  while (evals < max_evals) {
    for (int i = 0; i <= n; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(),
              [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = ord[0], worst = ord[n], second = ord[n - 1];
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= n;

    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = f(xr);
    ++evals;
    if (fr < vals[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      const Eigen::VectorXd xc = centroid + 0.5 * (pts[worst] - centroid);
      const double fc = f(xc);
      ++evals;
      if (fc < vals[worst]) {
        pts[worst] = xc;
        vals[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          vals[i] = f(pts[i]);
          ++evals;
          if (evals >= max_evals) break;
        }
      }
    }
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    if (*hi - *lo < 1e-14 * (1.0 + std::abs(*lo)))  // flat simplex
      break;
  }
  int ibest = 0;
  for (int i = 1; i <= n; ++i)
    if (vals[i] < vals[ibest]) ibest = i;
  x = pts[ibest];
  return vals[ibest];
}

namespace detail {

// Anisotropic start pair: u concentrated on x-heavy modes (j > k), v on the
// mirrored modes when present. Violations of the triangle inequality come
// from such pairs.
inline Eigen::VectorXd anisotropic_start(const GaugeContext& ctx, Rng& rng) {
  const int m = ctx.m();
  const auto& idx = ctx.basis->index_pairs;
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    if (idx[i].first <= idx[i].second) continue;
    const double a = rng.normal();
    u0[i] = a;
    for (int l = 0; l < m; ++l)
      if (idx[l].first == idx[i].second && idx[l].second == idx[i].first)
        v0[l] = a;
  }
  Eigen::VectorXd w(2 * m);
  w.head(m) = u0;
  w.tail(m) = v0;
  for (int i = 0; i < 2 * m; ++i) w[i] += 0.05 * rng.normal();
  return w;
}

}  // namespace detail

// Maximizes floor(u+v) / (floor(u) + floor(v)); any ratio above 1 certifies
// failure of the triangle inequality.
inline std::optional<Witness> search_triangle_violation(const GaugeContext& ctx,
                                                        std::uint64_t seed,
                                                        int budget) {
  if (ctx.m() < 2)
    throw std::invalid_argument("witness search requires m >= 2");
  const int m = ctx.m();
  Rng rng(seed);
  const int evals_per_start = 1000;
  const int starts = std::max(1, budget / evals_per_start);

  double best_ratio = 1.0;
  Eigen::VectorXd best_w;
  auto objective = [&](const Eigen::VectorXd& w) {
    const CoefVec u = w.head(m), v = w.tail(m);
    const double fu = floor_gauge(u, ctx);
    const double fv = floor_gauge(v, ctx);
    if (fu + fv < 1e-9) return 0.0;
    return -floor_gauge(u + v, ctx) / (fu + fv);
  };
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd w = detail::anisotropic_start(ctx, rng);
    const double val = nelder_mead(objective, w, evals_per_start);
    if (-val > best_ratio) {
      best_ratio = -val;
      best_w = w;
    }
  }
  if (best_ratio <= 1.0 + 1e-6) return std::nullopt;
  Witness wit;
  wit.kind = WitnessKind::triangle_violation;
  wit.u = best_w.head(m);
  wit.v = best_w.tail(m);
  wit.margin = best_ratio - 1.0;
  wit.seed = seed;
  return wit;
}

// Seeks unit-gauge u, v whose midpoint leaves the unit affine ball
// (rho = 1 without loss of generality, by homogeneity).
inline std::optional<Witness> search_nonconvexity(const GaugeContext& ctx,
                                                  std::uint64_t seed,
                                                  int budget) {
  if (ctx.m() < 2)
    throw std::invalid_argument("witness search requires m >= 2");
  const int m = ctx.m();
  Rng rng(seed);
  const int evals_per_start = 1000;
  const int starts = std::max(1, budget / evals_per_start);

  double best = 1.0;
  Eigen::VectorXd best_w;
  auto objective = [&](const Eigen::VectorXd& w) {
    const CoefVec u = w.head(m), v = w.tail(m);
    const double fu = floor_gauge(u, ctx);
    const double fv = floor_gauge(v, ctx);
    if (fu < 1e-9 || fv < 1e-9) return 0.0;
    return -floor_gauge(0.5 * (u / fu + v / fv), ctx);
  };
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd w = detail::anisotropic_start(ctx, rng);
    const double val = nelder_mead(objective, w, evals_per_start);
    if (-val > best) {
      best = -val;
      best_w = w;
    }
  }
  if (best <= 1.0 + 1e-6) return std::nullopt;
  Witness wit;
  wit.kind = WitnessKind::nonconvexity;
  wit.u = best_w.head(m) / floor_gauge(best_w.head(m), ctx);
  wit.v = best_w.tail(m) / floor_gauge(best_w.tail(m), ctx);
  wit.margin = best - 1.0;
  wit.seed = seed;
  return wit;
}

}  // namespace affinelp
