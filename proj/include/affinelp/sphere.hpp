#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace affinelp {

// Quadrature on the unit circle for the d sigma(xi) integrals.
struct SphereRule {
  Eigen::Matrix2Xd xis;     // unit direction per column
  Eigen::VectorXd weights;  // positive, sum to 2 pi

  Eigen::Index size() const { return weights.size(); }
};

// Equispaced trapezoid rule; spectrally accurate for smooth periodic
// integrands, which the energy integrand is on W_m \ {0}.
inline SphereRule build_circle_rule(int M) {
  if (M < 4) throw std::invalid_argument("sphere rule requires M >= 4");
  SphereRule r;
  r.xis.resize(2, M);
  r.weights = Eigen::VectorXd::Constant(M, 2.0 * M_PI / M);
  for (int k = 0; k < M; ++k) {
    const double theta = 2.0 * M_PI * k / M;
    r.xis(0, k) = std::cos(theta);
    r.xis(1, k) = std::sin(theta);
  }
  return r;
}

inline double integrate_sphere(const SphereRule& rule,
                               const Eigen::VectorXd& f) {
  if (f.size() != rule.size())
    throw std::invalid_argument("integrand length does not match sphere rule");
  return rule.weights.dot(f);
}

}  // namespace affinelp
