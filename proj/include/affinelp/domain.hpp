#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace affinelp {

using CoefVec = Eigen::VectorXd;

// Gauss-Legendre nodes/weights on (0,1), by Newton iteration on P_n.
inline void gauss_legendre_unit(int order, Eigen::VectorXd& nodes,
                                Eigen::VectorXd& weights) {
  if (order < 2) throw std::invalid_argument("quad_order must be >= 2");
  nodes.resize(order);
  weights.resize(order);
  const int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1,1] -> (0,1); keep symmetric pairing exact
    nodes[i] = 0.5 * (1.0 - x);
    nodes[n - 1 - i] = 0.5 * (1.0 + x);
    weights[i] = 0.5 * w;
    weights[n - 1 - i] = 0.5 * w;
  }
}

// Tensor-product quadrature over the unit square.
struct DomainQuadrature {
  Eigen::Matrix2Xd nodes;   // columns are (x,y) points strictly inside (0,1)^2
  Eigen::VectorXd weights;  // positive, sum to 1
  Eigen::VectorXd axis_nodes;
  Eigen::VectorXd axis_weights;
  int order = 0;
};

struct DomainSpec {
  int quad_order = 48;
  std::shared_ptr<const DomainQuadrature> quad;

  explicit DomainSpec(int order = 48) : quad_order(order) {
    if (order < 2) throw std::invalid_argument("quad_order must be >= 2");
    auto q = std::make_shared<DomainQuadrature>();
    gauss_legendre_unit(order, q->axis_nodes, q->axis_weights);
    q->order = order;
    const int n = order;
    q->nodes.resize(2, n * n);
    q->weights.resize(n * n);
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const int c = iy * n + ix;
        q->nodes(0, c) = q->axis_nodes[ix];
        q->nodes(1, c) = q->axis_nodes[iy];
        q->weights[c] = q->axis_weights[ix] * q->axis_weights[iy];
      }
    quad = std::move(q);
  }

  Eigen::Index node_count() const { return quad->weights.size(); }
};

// Gradient (and value) samples of one function at the domain nodes.
struct GradField {
  Eigen::VectorXd values;   // u(x_q)
  Eigen::Matrix2Xd grads;   // columns grad u(x_q)
  std::shared_ptr<const DomainQuadrature> quad;

  Eigen::Index node_count() const { return values.size(); }
};

// Tensor sine basis w_{(j,k)}(x,y) = sin(j pi x) sin(k pi y), ordered along
// diagonals j+k with smaller j first. Tables are per-function so the basis
// for m is a strict prefix of the basis for m+1.
struct BasisSpec {
  int m = 0;
  std::vector<std::pair<int, int>> index_pairs;
  Eigen::MatrixXd values;  // (Q x m): w_i at node q
  Eigen::MatrixXd dx;      // (Q x m): d/dx w_i at node q
  Eigen::MatrixXd dy;      // (Q x m)
  std::shared_ptr<const DomainQuadrature> quad;
  int max_frequency = 0;
};

inline std::vector<std::pair<int, int>> sine_index_pairs(int m) {
  std::vector<std::pair<int, int>> idx;
  idx.reserve(m);
  for (int s = 2; static_cast<int>(idx.size()) < m; ++s)
    for (int j = 1; j < s && static_cast<int>(idx.size()) < m; ++j)
      idx.emplace_back(j, s - j);
  return idx;
}

inline BasisSpec build_basis(int m, const DomainSpec& domain) {
  if (m < 1) throw std::invalid_argument("basis dimension m must be >= 1");
  BasisSpec b;
  b.m = m;
  b.index_pairs = sine_index_pairs(m);
  b.quad = domain.quad;
  for (const auto& [j, k] : b.index_pairs)
    b.max_frequency = std::max({b.max_frequency, j, k});
  if (2 * b.max_frequency > domain.quad_order)
    throw std::invalid_argument(
        "quadrature too coarse for basis: max frequency " +
        std::to_string(b.max_frequency) + " exceeds quad_order/2 = " +
        std::to_string(domain.quad_order / 2));
  const Eigen::Index q = domain.node_count();
  b.values.resize(q, m);
  b.dx.resize(q, m);
  b.dy.resize(q, m);
  const auto& nodes = domain.quad->nodes;
  for (int i = 0; i < m; ++i) {
    const double jf = M_PI * b.index_pairs[i].first;
    const double kf = M_PI * b.index_pairs[i].second;
    for (Eigen::Index c = 0; c < q; ++c) {
      const double sx = std::sin(jf * nodes(0, c));
      const double cx = std::cos(jf * nodes(0, c));
      const double sy = std::sin(kf * nodes(1, c));
      const double cy = std::cos(kf * nodes(1, c));
      b.values(c, i) = sx * sy;
      b.dx(c, i) = jf * cx * sy;
      b.dy(c, i) = kf * sx * cy;
    }
  }
  return b;
}

inline GradField expand(const CoefVec& zeta, const BasisSpec& basis) {
  if (zeta.size() != basis.m)
    throw std::invalid_argument("coefficient length does not match basis");
  GradField f;
  f.quad = basis.quad;
  f.values = basis.values * zeta;
  const Eigen::Index q = f.values.size();
  f.grads.resize(2, q);
  f.grads.row(0) = (basis.dx * zeta).transpose();
  f.grads.row(1) = (basis.dy * zeta).transpose();
  return f;
}

inline double lq_norm(const GradField& field, double q) {
  if (q < 1.0) throw std::invalid_argument("lq_norm requires q >= 1");
  const auto& w = field.quad->weights;
  double s = 0.0;
  if (q == 2.0) {
    for (Eigen::Index i = 0; i < w.size(); ++i)
      s += w[i] * field.values[i] * field.values[i];
  } else {
    for (Eigen::Index i = 0; i < w.size(); ++i)
      s += w[i] * std::pow(std::abs(field.values[i]), q);
  }
  return std::pow(s, 1.0 / q);
}

inline double grad_lp_norm(const GradField& field, double p) {
  if (p <= 1.0) throw std::invalid_argument("grad_lp_norm requires p > 1");
  const auto& w = field.quad->weights;
  double s = 0.0;
  if (p == 2.0) {
    for (Eigen::Index i = 0; i < w.size(); ++i)
      s += w[i] * field.grads.col(i).squaredNorm();
  } else {
    for (Eigen::Index i = 0; i < w.size(); ++i)
      s += w[i] * std::pow(field.grads.col(i).norm(), p);
  }
  return std::pow(s, 1.0 / p);
}

// The adopted W^{1,p}_0 norm on coefficient space: the L^p norm of the
// gradient of the expansion.
inline double w1pm_norm(const CoefVec& zeta, const BasisSpec& basis, double p) {
  return grad_lp_norm(expand(zeta, basis), p);
}

}  // namespace affinelp
