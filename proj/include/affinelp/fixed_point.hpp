#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "affinelp/domain.hpp"
#include "affinelp/geometry.hpp"
#include "affinelp/rng.hpp"

namespace affinelp {

// Search region for the zero finders: a gauge ball in coefficient space.
// The gauge is any positively homogeneous, positive-definite function of the
// offset from the center (the affine floor gauge or a general norm).
struct GaugeBallSpec {
  std::function<double(const CoefVec&)> gauge;
  std::string gauge_id;
  CoefVec center;
  double rho = 0.0;
  std::optional<CoefVec> excluded;  // puncture point y0, if any
};

inline GaugeBallSpec make_affine_ball(const GaugeContext& ctx,
                                      const CoefVec& center, double rho,
                                      std::optional<CoefVec> excluded = {}) {
  if (rho <= 0.0) throw std::invalid_argument("ball radius must be > 0");
  GaugeBallSpec ball;
  ball.gauge = [ctx](const CoefVec& d) { return floor_gauge(d, ctx); };
  ball.gauge_id = "affine_floor";
  ball.center = center;
  ball.rho = rho;
  ball.excluded = std::move(excluded);
  if (ball.excluded &&
      ball.gauge(ball.center - *ball.excluded) <= ball.rho)
    throw std::invalid_argument(
        "puncture must lie strictly outside the search ball");
  return ball;
}

inline GaugeBallSpec make_norm_ball(std::function<double(const CoefVec&)> norm,
                                    std::string norm_id, const CoefVec& center,
                                    double rho,
                                    std::optional<CoefVec> excluded = {}) {
  if (rho <= 0.0) throw std::invalid_argument("ball radius must be > 0");
  GaugeBallSpec ball;
  ball.gauge = std::move(norm);
  ball.gauge_id = std::move(norm_id);
  ball.center = center;
  ball.rho = rho;
  ball.excluded = std::move(excluded);
  if (ball.excluded &&
      ball.gauge(ball.center - *ball.excluded) <= ball.rho)
    throw std::invalid_argument(
        "puncture must lie strictly outside the search ball");
  return ball;
}

struct VectorField {
  std::function<CoefVec(const CoefVec&)> eval;
  std::string label;
};

struct BoundaryReport {
  double min_pairing = 0.0;  // min over samples of <F(z), z - center>
  int samples = 0;
  bool pass = false;
};

// Samples the gauge sphere by ray-scaling random directions (the map_G
// construction) and checks the sign condition of the fixed point theorems.
inline BoundaryReport boundary_condition_check(const VectorField& F,
                                               const GaugeBallSpec& ball,
                                               int samples,
                                               std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const auto m = ball.center.size();
  Rng rng(seed);
  BoundaryReport rep;
  rep.samples = samples;
  rep.min_pairing = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    CoefVec d(m);
    for (Eigen::Index i = 0; i < m; ++i) d[i] = rng.normal();
    const double g = ball.gauge(d);
    if (g <= 0.0) { --s; continue; }
    const CoefVec z = ball.center + d * (ball.rho / g);
    const double pairing = F.eval(z).dot(z - ball.center);
    rep.min_pairing = std::min(rep.min_pairing, pairing);
  }
  rep.pass = rep.min_pairing >= -1e-10;
  return rep;
}

struct ZeroResult {
  CoefVec z;
  double residual_sup = std::numeric_limits<double>::infinity();
  double residual_l2 = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::string strategy_used = "none";
  bool success = false;
  bool in_ball = false;
};

namespace detail {

inline CoefVec guard_puncture(CoefVec z, const GaugeBallSpec& ball) {
  if (ball.excluded && (z - *ball.excluded).norm() < 1e-12)
    z.array() += 1e-9 * (1.0 + z.cwiseAbs().maxCoeff());
  return z;
}

inline CoefVec pull_into_ball(const CoefVec& z, const GaugeBallSpec& ball) {
  const CoefVec d = z - ball.center;
  const double g = ball.gauge(d);
  if (g <= ball.rho) return z;
  return ball.center + d * (ball.rho / g);
}

inline Eigen::MatrixXd fd_jacobian(const VectorField& F, const CoefVec& z,
                                   const GaugeBallSpec& ball, int& evals) {
  const auto m = z.size();
  const double h = 1e-6 * (1.0 + z.cwiseAbs().maxCoeff());
  Eigen::MatrixXd J(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    CoefVec zp = z, zm = z;
    zp[j] += h;
    zm[j] -= h;
    J.col(j) =
        (F.eval(guard_puncture(zp, ball)) - F.eval(guard_puncture(zm, ball))) /
        (2.0 * h);
    evals += 2;
  }
  return J;
}

}  // namespace detail

// Practical zero search inside a gauge ball: damped Newton with a
// finite-difference Jacobian from multiple starts, then a residual-descent
// fallback. The theorems guarantee a zero exists when the boundary condition
// holds; failure here reports solver limits, not nonexistence.
inline ZeroResult find_zero(const VectorField& F, const GaugeBallSpec& ball,
                            double tol, int budget, std::uint64_t seed = 0,
                            int multistarts = 16,
                            std::optional<CoefVec> warm_start = {}) {
  const auto m = ball.center.size();
  Rng rng(seed);
  ZeroResult best;
  best.z = ball.center;
  int evals = 0;
  int total_iters = 0;

  // start list: warm start (if any), center, then ray-scaled directions
  std::vector<CoefVec> starts;
  if (warm_start) starts.push_back(*warm_start);
  starts.push_back(ball.center);
  const double fracs[3] = {0.25, 0.5, 0.75};
  for (int s = 1; s < multistarts; ++s) {
    CoefVec d(m);
    for (Eigen::Index i = 0; i < m; ++i) d[i] = rng.normal();
    const double g = ball.gauge(d);
    if (g <= 0.0) continue;
    starts.push_back(ball.center + d * (fracs[s % 3] * ball.rho / g));
  }

  for (const CoefVec& z0 : starts) {
    if (best.residual_sup <= tol || evals >= budget) break;
    CoefVec z = detail::pull_into_ball(detail::guard_puncture(z0, ball), ball);
    CoefVec r = F.eval(z);
    ++evals;
    double rs = r.cwiseAbs().maxCoeff();
    for (int it = 0; it < 60 && rs > tol && evals < budget; ++it) {
      ++total_iters;
      const Eigen::MatrixXd J = detail::fd_jacobian(F, z, ball, evals);
      const CoefVec step = J.colPivHouseholderQr().solve(-r);
      if (!step.allFinite()) break;
      double lambda = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < 12 && evals < budget; ++bt) {
        CoefVec zt = detail::pull_into_ball(
            detail::guard_puncture(z + lambda * step, ball), ball);
        const CoefVec rt = F.eval(zt);
        ++evals;
        const double rts = rt.cwiseAbs().maxCoeff();
        if (rts < rs) {
          z = zt;
          r = rt;
          rs = rts;
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!accepted) break;
    }
    if (rs < best.residual_sup) {
      best.z = z;
      best.residual_sup = rs;
      best.residual_l2 = r.norm();
      best.strategy_used = "newton_multistart";
    }
  }

  // fallback: descend |F|_2^2 from the best candidate
  if (best.residual_sup > tol && evals < budget) {
    CoefVec z = best.z;
    CoefVec r = F.eval(detail::guard_puncture(z, ball));
    ++evals;
    double f2 = r.squaredNorm();
    while (evals < budget && std::sqrt(f2) > tol) {
      ++total_iters;
      const Eigen::MatrixXd J = detail::fd_jacobian(F, z, ball, evals);
      const CoefVec g = 2.0 * J.transpose() * r;
      if (g.norm() < 1e-15) break;
      double lambda = 1.0 / (1.0 + g.norm());
      bool accepted = false;
      for (int bt = 0; bt < 20 && evals < budget; ++bt) {
        CoefVec zt = detail::pull_into_ball(
            detail::guard_puncture(z - lambda * g, ball), ball);
        const CoefVec rt = F.eval(zt);
        ++evals;
        if (rt.squaredNorm() < f2) {
          z = zt;
          r = rt;
          f2 = rt.squaredNorm();
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!accepted) break;
      const double rs = r.cwiseAbs().maxCoeff();
      if (rs < best.residual_sup) {
        best.z = z;
        best.residual_sup = rs;
        best.residual_l2 = r.norm();
        best.strategy_used = "residual_descent";
      }
    }
  }

  best.iterations = total_iters;
  best.in_ball = ball.gauge(best.z - ball.center) <= ball.rho * (1.0 + 1e-9);
  best.success = best.residual_sup <= tol && best.in_ball;
  return best;
}

inline ZeroResult find_zero_punctured(const VectorField& F,
                                      const GaugeBallSpec& ball, double tol,
                                      int budget, std::uint64_t seed = 0,
                                      int multistarts = 16) {
  if (!ball.excluded)
    throw std::invalid_argument("punctured solve requires an excluded point");
  if (ball.gauge(ball.center - *ball.excluded) <= ball.rho)
    throw std::invalid_argument(
        "puncture must lie strictly outside the search ball");
  return find_zero(F, ball, tol, budget, seed, multistarts);
}

}  // namespace affinelp
