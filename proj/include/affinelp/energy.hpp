#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "affinelp/domain.hpp"
#include "affinelp/sphere.hpp"

namespace affinelp {

// Volume of the unit Euclidean ball in R^kappa, extended to non-integer
// dimension through the Gamma function.
inline double unit_ball_volume(double kappa) {
  if (kappa <= 0.0) throw std::invalid_argument("unit_ball_volume: kappa > 0");
  return std::pow(M_PI, 0.5 * kappa) / std::tgamma(0.5 * kappa + 1.0);
}

// Normalization constant under which the affine energy is bounded above by
// the gradient L^p norm, with equality for isotropic gradient fields.
inline double gamma_np(int n, double p) {
  if (n < 2) throw std::invalid_argument("gamma_np: n >= 2");
  if (p <= 1.0) throw std::invalid_argument("gamma_np: p > 1");
  const double wn = unit_ball_volume(n);
  const double wp1 = unit_ball_volume(p - 1.0);
  const double wnp2 = unit_ball_volume(n + p - 2.0);
  return std::pow(n * wn, 1.0 / n) *
         std::pow(n * wn * wp1 / (2.0 * wnp2), 1.0 / p);
}

struct EnergyParams {
  int n = 2;
  double p = 2.0;
  double gamma = 0.0;
  double eps_zero = 1e-12;
};

inline EnergyParams make_energy_params(double p, double eps_zero = 1e-12) {
  if (p <= 1.0) throw std::invalid_argument("energy requires p > 1");
  if (!(eps_zero > 0.0 && eps_zero <= 1e-8))
    throw std::invalid_argument("eps_zero must lie in (0, 1e-8]");
  EnergyParams params;
  params.n = 2;
  params.p = p;
  params.gamma = gamma_np(2, p);
  params.eps_zero = eps_zero;
  return params;
}

struct EnergyBreakdown {
  Eigen::VectorXd dir_norms;  // ||grad_xi u||_{L^p} per sphere node
  double energy = 0.0;        // E_{p,Omega}(u)
  double grad_norm = 0.0;     // ||grad u||_{L^p}
};

inline double signed_pow(double x, double p) {
  if (x > 0.0) return std::pow(x, p);
  if (x < 0.0) return -std::pow(-x, p);
  return 0.0;
}

// p-th powers of the directional L^p norms, one per sphere node.
inline Eigen::VectorXd directional_lp_pows(const GradField& field,
                                           const SphereRule& rule, double p) {
  if (p <= 1.0) throw std::invalid_argument("directional norms require p > 1");
  const Eigen::Index M = rule.size();
  const Eigen::Index Q = field.node_count();
  const auto& w = field.quad->weights;
  Eigen::VectorXd out(M);
  if (p == 2.0) {
    // second moments of the weighted gradient; exact rewrite of the sum
    double A = 0.0, B = 0.0, C = 0.0;
    for (Eigen::Index q = 0; q < Q; ++q) {
      const double gx = field.grads(0, q), gy = field.grads(1, q);
      A += w[q] * gx * gx;
      B += w[q] * gx * gy;
      C += w[q] * gy * gy;
    }
    for (Eigen::Index k = 0; k < M; ++k) {
      const double c = rule.xis(0, k), s = rule.xis(1, k);
      out[k] = A * c * c + 2.0 * B * c * s + C * s * s;
    }
  } else {
    for (Eigen::Index k = 0; k < M; ++k) {
      const double c = rule.xis(0, k), s = rule.xis(1, k);
      double acc = 0.0;
      for (Eigen::Index q = 0; q < Q; ++q) {
        const double d = field.grads(0, q) * c + field.grads(1, q) * s;
        acc += w[q] * std::pow(std::abs(d), p);
      }
      out[k] = acc;
    }
  }
  return out;
}

inline Eigen::VectorXd directional_lp_norms(const GradField& field,
                                            const SphereRule& rule, double p) {
  Eigen::VectorXd pows = directional_lp_pows(field, rule, p);
  for (Eigen::Index k = 0; k < pows.size(); ++k)
    pows[k] = std::pow(pows[k], 1.0 / p);
  return pows;
}

inline EnergyBreakdown affine_energy(const GradField& field,
                                     const SphereRule& rule,
                                     const EnergyParams& params) {
  EnergyBreakdown out;
  out.grad_norm = grad_lp_norm(field, params.p);
  if (out.grad_norm < params.eps_zero) {
    out.dir_norms = Eigen::VectorXd::Zero(rule.size());
    out.energy = 0.0;
    return out;
  }
  out.dir_norms = directional_lp_norms(field, rule, params.p);
  double integral = 0.0;
  for (Eigen::Index k = 0; k < rule.size(); ++k) {
    if (out.dir_norms[k] < params.eps_zero)
      throw std::runtime_error(
          "degenerate direction: a directional norm vanished on a nonzero "
          "field (quadrature failure)");
    integral += rule.weights[k] * std::pow(out.dir_norms[k], -params.n);
  }
  out.energy = params.gamma * std::pow(integral, -1.0 / params.n);
  return out;
}

// Gradient in coefficient space of zeta -> E^p(expand(zeta)) / p.
inline Eigen::VectorXd energy_grad(const CoefVec& zeta, const BasisSpec& basis,
                                   const SphereRule& rule,
                                   const EnergyParams& params) {
  const GradField field = expand(zeta, basis);
  const double gn = grad_lp_norm(field, params.p);
  if (gn < params.eps_zero) return Eigen::VectorXd::Zero(basis.m);

  const EnergyBreakdown br = affine_energy(field, rule, params);
  const double n = params.n, p = params.p;
  const double front = std::pow(params.gamma, -n) * std::pow(br.energy, n + p);

  const Eigen::Index M = rule.size();
  const Eigen::Index Q = field.node_count();
  const auto& w = field.quad->weights;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(basis.m);

  if (p == 2.0) {
    // I_jk = xi^T N_j xi with N_j the weighted cross moments of grad w_j
    // against grad u; same quadrature sum, assembled once.
    Eigen::VectorXd wgx(Q), wgy(Q);
    for (Eigen::Index q = 0; q < Q; ++q) {
      wgx[q] = w[q] * field.grads(0, q);
      wgy[q] = w[q] * field.grads(1, q);
    }
    const Eigen::VectorXd nxx = basis.dx.transpose() * wgx;
    const Eigen::VectorXd nxy = basis.dx.transpose() * wgy;
    const Eigen::VectorXd nyx = basis.dy.transpose() * wgx;
    const Eigen::VectorXd nyy = basis.dy.transpose() * wgy;
    for (Eigen::Index k = 0; k < M; ++k) {
      const double c = rule.xis(0, k), s = rule.xis(1, k);
      const double outer =
          rule.weights[k] * std::pow(br.dir_norms[k], -(n + p));
      for (int j = 0; j < basis.m; ++j) {
        const double inner =
            c * c * nxx[j] + c * s * (nxy[j] + nyx[j]) + s * s * nyy[j];
        grad[j] += outer * inner;
      }
    }
  } else {
    Eigen::VectorXd t(Q);
    for (Eigen::Index k = 0; k < M; ++k) {
      const double c = rule.xis(0, k), s = rule.xis(1, k);
      for (Eigen::Index q = 0; q < Q; ++q) {
        const double d = field.grads(0, q) * c + field.grads(1, q) * s;
        t[q] = w[q] * signed_pow(d, p - 1.0);
      }
      const Eigen::VectorXd ax = basis.dx.transpose() * t;
      const Eigen::VectorXd ay = basis.dy.transpose() * t;
      const double outer =
          rule.weights[k] * std::pow(br.dir_norms[k], -(n + p));
      grad.noalias() += outer * (c * ax + s * ay);
    }
  }
  return front * grad;
}

// H_u(varsigma): the gauge on R^n whose p-th power integrates the energy,
// int_Omega H_u^p(grad u) dx = E^p(u).
inline double h_function(const EnergyBreakdown& br, const SphereRule& rule,
                         const EnergyParams& params,
                         const Eigen::Vector2d& varsigma) {
  if (br.energy <= 0.0)
    throw std::invalid_argument("h_function requires a nonzero field");
  const double n = params.n, p = params.p;
  double integral = 0.0;
  for (Eigen::Index k = 0; k < rule.size(); ++k) {
    const double dot = rule.xis.col(k).dot(varsigma);
    integral += rule.weights[k] * std::pow(br.dir_norms[k], -(n + p)) *
                std::pow(std::abs(dot), p);
  }
  const double hp =
      std::pow(params.gamma, -n) * std::pow(br.energy, n + p) * integral;
  return std::pow(hp, 1.0 / p);
}

inline double h_function(const GradField& field, const SphereRule& rule,
                         const EnergyParams& params,
                         const Eigen::Vector2d& varsigma) {
  if (grad_lp_norm(field, params.p) < params.eps_zero)
    throw std::invalid_argument("h_function requires a nonzero field");
  return h_function(affine_energy(field, rule, params), rule, params,
                    varsigma);
}

}  // namespace affinelp
