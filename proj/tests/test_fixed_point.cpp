#include <doctest.h>

#include <cmath>

#include "affinelp/fixed_point.hpp"
#include "affinelp/rng.hpp"

using namespace affinelp;

namespace {

GaugeBallSpec l2_ball(int m, double rho,
                      std::optional<CoefVec> excluded = {}) {
  return make_norm_ball([](const CoefVec& d) { return d.norm(); }, "l2",
                        CoefVec::Zero(m), rho, std::move(excluded));
}

}  // namespace

TEST_CASE("boundary_condition_check: sign detection") {
  const int m = 4;
  const VectorField id{[](const CoefVec& z) { return z; }, "identity"};
  const VectorField neg{[](const CoefVec& z) -> CoefVec { return -z; },
                        "negation"};
  const GaugeBallSpec ball = l2_ball(m, 1.5);
  const BoundaryReport rid = boundary_condition_check(id, ball, 64, 3);
  CHECK(rid.pass);
  CHECK(rid.min_pairing == doctest::Approx(1.5 * 1.5).epsilon(1e-10));
  const BoundaryReport rneg = boundary_condition_check(neg, ball, 64, 3);
  CHECK_FALSE(rneg.pass);
}

TEST_CASE("find_zero: identity and affine fields") {
  const int m = 5;
  const VectorField id{[](const CoefVec& z) { return z; }, "identity"};
  const GaugeBallSpec ball = l2_ball(m, 2.0);
  const ZeroResult r = find_zero(id, ball, 1e-12, 10000, 1);
  CHECK(r.success);
  CHECK(r.z.cwiseAbs().maxCoeff() < 1e-12);

  CoefVec b(m);
  b << 0.3, -0.2, 0.5, 0.1, -0.4;
  const VectorField affine{[b](const CoefVec& z) -> CoefVec { return z - b; },
                           "affine"};
  const ZeroResult ra = find_zero(affine, ball, 1e-12, 10000, 1);
  CHECK(ra.success);
  CHECK((ra.z - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("find_zero matches the direct solve on random SPD linear fields") {
  const int m = 6;
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd M(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) M(i, j) = rng.normal();
    const Eigen::MatrixXd A =
        M.transpose() * M + Eigen::MatrixXd::Identity(m, m);
    CoefVec b(m);
    for (int i = 0; i < m; ++i) b[i] = 0.2 * rng.normal();
    const CoefVec direct = A.lu().solve(b);

    const VectorField F{[A, b](const CoefVec& z) -> CoefVec {
                          return A * z - b;
                        },
                        "linear"};
    const GaugeBallSpec ball = l2_ball(m, 2.0 * direct.norm() + 1.0);
    const ZeroResult r = find_zero(F, ball, 1e-10, 20000, trial);
    CHECK(r.success);
    CHECK((r.z - direct).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("find_zero is deterministic for fixed inputs") {
  const int m = 4;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m) * 2.0;
  A(0, 1) = 0.3;
  CoefVec b = CoefVec::Constant(m, 0.7);
  const VectorField F{[A, b](const CoefVec& z) -> CoefVec { return A * z - b; },
                      "linear"};
  const GaugeBallSpec ball = l2_ball(m, 3.0);
  const ZeroResult r1 = find_zero(F, ball, 1e-11, 5000, 42);
  const ZeroResult r2 = find_zero(F, ball, 1e-11, 5000, 42);
  CHECK(r1.z == r2.z);
  CHECK(r1.residual_sup == r2.residual_sup);
  CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("punctured variants") {
  const int m = 3;
  CoefVec b(m);
  b << 0.2, -0.1, 0.3;
  CoefVec far = CoefVec::Constant(m, 50.0);

  SUBCASE("puncture far outside: identical to the plain solve") {
    const VectorField F{[b](const CoefVec& z) -> CoefVec { return z - b; },
                        "affine"};
    const ZeroResult plain = find_zero(F, l2_ball(m, 2.0), 1e-12, 5000, 9);
    const ZeroResult punct =
        find_zero_punctured(F, l2_ball(m, 2.0, far), 1e-12, 5000, 9);
    CHECK(punct.success);
    CHECK(punct.z == plain.z);
  }

  SUBCASE("field singular at the puncture") {
    CoefVec y0 = CoefVec::Constant(m, 4.0);
    const VectorField F{[b, y0](const CoefVec& z) -> CoefVec {
                          const CoefVec d = z - y0;
                          return z - b + 0.001 * d / d.squaredNorm();
                        },
                        "singular-outside"};
    const ZeroResult r =
        find_zero_punctured(F, l2_ball(m, 2.0, y0), 1e-10, 20000, 9);
    CHECK(r.success);
    CHECK((r.z - b).norm() < 0.01);
  }

  SUBCASE("max-coordinate norm gauge (general-norm theorem variant)") {
    const VectorField F{[b](const CoefVec& z) -> CoefVec { return z - b; },
                        "affine"};
    GaugeBallSpec ball = make_norm_ball(
        [](const CoefVec& d) { return d.cwiseAbs().maxCoeff(); }, "linf",
        CoefVec::Zero(m), 1.0, CoefVec::Constant(m, 4.0));
    const ZeroResult r = find_zero_punctured(F, ball, 1e-12, 5000, 9);
    CHECK(r.success);
    CHECK((r.z - b).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((r.z).cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
  }

  SUBCASE("puncture inside the ball is rejected") {
    const VectorField F{[](const CoefVec& z) { return z; }, "identity"};
    CHECK_THROWS_AS(l2_ball(m, 2.0, CoefVec::Constant(m, 0.1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        find_zero_punctured(F, l2_ball(m, 2.0), 1e-10, 100, 1),
        std::invalid_argument);
  }
}

TEST_CASE("theorem harness: boundary-compliant random fields") {
  // gradient fields of coercive random polynomials plus skew perturbations
  Rng rng(123);
  int successes = 0;
  const int total = 30;
  for (int trial = 0; trial < total; ++trial) {
    const int m = 3 + static_cast<int>(rng.uniform() * 7.0);  // 3..9
    Eigen::MatrixXd M(m, m), S(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        M(i, j) = rng.normal();
        S(i, j) = rng.normal();
      }
    const Eigen::MatrixXd A =
        M.transpose() * M + Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd K = 0.3 * (S - S.transpose());  // skew
    CoefVec b(m);
    for (int i = 0; i < m; ++i) b[i] = 0.3 * rng.normal();
    const double quartic = 0.5 * rng.uniform();
    const VectorField F{[A, K, b, quartic](const CoefVec& z) -> CoefVec {
                          return A * z + K * z +
                                 quartic * z.squaredNorm() * z - b;
                        },
                        "random-coercive"};
    const GaugeBallSpec ball = l2_ball(m, 3.0);
    CHECK(boundary_condition_check(F, ball, 50, trial).pass);
    const ZeroResult r = find_zero(F, ball, 1e-8, 30000, trial);
    if (r.success) ++successes;
  }
  CHECK(successes >= static_cast<int>(0.95 * total));
}
