#include <cmath>

#include <doctest.h>

#include "koopgen/dynamics.hpp"
#include "koopgen/errors.hpp"

using namespace koopgen;

namespace {

const double kAlpha2 = std::sqrt(30.0);

// Angle difference on the circle, in [0, pi].
double circle_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

// Independent RK4 on the skew field, in unwrapped angles.
Eigen::Vector2d skew_rk4(Eigen::Vector2d th, double t, double a1, double a2, double beta,
                         int steps) {
  auto f = [&](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(a1, a2 * (1.0 + beta * std::sin(x(0))));
  };
  const double h = t / steps;
  for (int k = 0; k < steps; ++k) {
    const Eigen::Vector2d k1 = f(th);
    const Eigen::Vector2d k2 = f(th + 0.5 * h * k1);
    const Eigen::Vector2d k3 = f(th + 0.5 * h * k2);
    const Eigen::Vector2d k4 = f(th + h * k3);
    th += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return th;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("linear rotation closed form") {
  const Eigen::Vector2d zero(0, 0);
  CHECK(flow_torus_linear(zero, 0.0, 1.0, kAlpha2).norm() == 0.0);

  const auto p = flow_torus_linear(zero, kTwoPi, 1.0, kAlpha2);
  CHECK(circle_distance(p(0), 0.0) < 1e-12);
  CHECK(circle_distance(p(1), std::fmod(kTwoPi * kAlpha2, kTwoPi)) < 1e-12);

  const auto r = flow_torus_linear(Eigen::Vector2d(1, 2), 0.5, 1.0, kAlpha2);
  CHECK(r(0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(circle_distance(r(1), 2.0 + 0.5 * kAlpha2) < 1e-12);
  // constant field: RK4 with beta = 0 is exact up to rounding
  const auto rk = skew_rk4(Eigen::Vector2d(1, 2), 0.5, 1.0, kAlpha2, 0.0, 50);
  CHECK(circle_distance(r(1), rk(1)) < 1e-12);
}

TEST_CASE("group law") {
  const Eigen::Vector2d x(0.3, 4.0);
  const auto a = flow_torus_linear(flow_torus_linear(x, 1.7, 1.0, kAlpha2), 2.9, 1.0, kAlpha2);
  const auto b = flow_torus_linear(x, 4.6, 1.0, kAlpha2);
  CHECK(circle_distance(a(0), b(0)) < 1e-12);
  CHECK(circle_distance(a(1), b(1)) < 1e-12);

  const auto c = flow_torus_skew(flow_torus_skew(x, 1.7, 1.0, kAlpha2, 0.5), 2.9, 1.0, kAlpha2, 0.5);
  const auto d = flow_torus_skew(x, 4.6, 1.0, kAlpha2, 0.5);
  CHECK(circle_distance(c(0), d(0)) < 1e-12);
  CHECK(circle_distance(c(1), d(1)) < 1e-12);
}

TEST_CASE("skew rotation") {
  const Eigen::Vector2d zero(0, 0);
  CHECK(flow_torus_skew(zero, 0.0, 1.0, kAlpha2, 0.5).norm() == 0.0);

  for (double t : {0.3, 2.0, 11.0}) {
    const auto s = flow_torus_skew(zero, t, 1.0, kAlpha2, 0.0);
    const auto l = flow_torus_linear(zero, t, 1.0, kAlpha2);
    CHECK(circle_distance(s(0), l(0)) < 1e-13);
    CHECK(circle_distance(s(1), l(1)) < 1e-13);
  }

  const auto p = flow_torus_skew(zero, kTwoPi, 1.0, kAlpha2, 0.5);
  CHECK(circle_distance(p(1), kTwoPi * kAlpha2) < 1e-12);
  const auto rk = skew_rk4(zero, kTwoPi, 1.0, kAlpha2, 0.5, 20000);
  CHECK(circle_distance(p(0), rk(0)) < 1e-10);
  CHECK(circle_distance(p(1), rk(1)) < 1e-10);

  const Eigen::Vector2d x(1.1, 0.4);
  const auto q = flow_torus_skew(x, 3.3, 0.7, kAlpha2, 0.5);
  const auto rq = skew_rk4(x, 3.3, 0.7, kAlpha2, 0.5, 20000);
  CHECK(circle_distance(q(0), rq(0)) < 1e-10);
  CHECK(circle_distance(q(1), rq(1)) < 1e-10);

  CHECK_THROWS_AS(flow_torus_skew(zero, 1.0, 0.0, kAlpha2, 0.5), Error);
}

TEST_CASE("lorenz 63 integration") {
  const Lorenz63Params p;
  CHECK(integrate_l63(Eigen::Vector3d::Zero(), 5.0, p, 0.01).norm() == 0.0);
  CHECK(lorenz63_divergence(p) == doctest::Approx(-41.0 / 3.0).epsilon(1e-15));

  // One sampling step at the default dt_internal = dt / 10 against the
  // step-halving Richardson estimate.
  const Eigen::Vector3d x(1, 1, 1);
  const auto coarse = integrate_l63(x, 0.01, p, 0.001);
  const auto fine = integrate_l63(x, 0.01, p, 0.0005);
  const Eigen::Vector3d extrapolated = fine + (fine - coarse) / 15.0;
  CHECK((coarse - extrapolated).cwiseAbs().maxCoeff() < 1e-9);

  // rk4_step against the textbook stages written out here
  auto field = [&](const Eigen::Vector3d& s) {
    return Eigen::Vector3d(10.0 * (s(1) - s(0)), s(0) * (28.0 - s(2)) - s(1),
                           s(0) * s(1) - 8.0 / 3.0 * s(2));
  };
  const Eigen::Vector3d k1 = field(x), k2 = field(x + 0.005 * k1), k3 = field(x + 0.005 * k2),
                        k4 = field(x + 0.01 * k3);
  const Eigen::Vector3d manual = x + 0.01 / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  CHECK((rk4_step(x, 0.01, p) - manual).cwiseAbs().maxCoeff() < 1e-14);

  // Fourth order: dt and dt/2 errors against a dt/16 reference.
  const Eigen::Vector3d on = integrate_l63(x, 10.0, p, 0.001);
  const auto ref = integrate_l63(on, 1.0, p, 0.01 / 16);
  const double e1 = (integrate_l63(on, 1.0, p, 0.01) - ref).norm();
  const double e2 = (integrate_l63(on, 1.0, p, 0.005) - ref).norm();
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.25));

  CHECK_THROWS_AS(integrate_l63(Eigen::Vector3d(NAN, 0, 0), 1.0, p, 0.01), Error);
}

TEST_CASE("observation maps") {
  ObservationMap flat;
  const auto y = observe(Eigen::Vector2d(0, 0), flat);
  CHECK((y - Eigen::Vector4d(1, 0, 1, 0)).norm() == 0.0);

  ObservationMap emb{ObservationKind::embedded_r3, 0.5};
  const auto w = observe(Eigen::Vector2d(0, 0), emb);
  CHECK((w - Eigen::Vector3d(1.5, 0, 0)).norm() < 1e-15);

  const auto v = observe(Eigen::Vector2d(2.2, -0.7), flat);
  CHECK(v(0) * v(0) + v(1) * v(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(v(2) * v(2) + v(3) * v(3) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(observe(Eigen::Vector3d(0, 0, 0), flat), Error);
}

TEST_CASE("trajectory generation") {
  const auto spec = SystemSpec::torus_linear(1.0, kAlpha2);
  const auto data = generate_trajectory(spec, 0.0491, 4098);
  CHECK(data.n_samples() == 4097);
  CHECK(data.reduced_to_odd());
  CHECK((data.samples.row(0).transpose() - observe(spec.initial_state, spec.observation)).norm() ==
        0.0);
  const auto r = data.samples.leftCols(2).rowwise().squaredNorm().array() - 1.0;
  const auto s = data.samples.rightCols(2).rowwise().squaredNorm().array() - 1.0;
  CHECK(r.abs().maxCoeff() < 1e-12);
  CHECK(s.abs().maxCoeff() < 1e-12);

  // row n is exactly F(flow(x0, n dt))
  for (Index n : {Index(1), Index(100), Index(4096)}) {
    const auto x = flow_torus_linear(spec.initial_state, n * 0.0491, 1.0, kAlpha2);
    CHECK((data.samples.row(n).transpose() - observe(x, spec.observation)).norm() < 1e-12);
  }

  const auto periodic = generate_trajectory(spec, kTwoPi, 9);
  for (Index n = 0; n < 9; ++n) {
    CHECK(std::abs(periodic.samples(n, 0) - 1.0) < 1e-12);
    CHECK(std::abs(periodic.samples(n, 1)) < 1e-12);
  }

  const auto l63 = SystemSpec::lorenz63();
  const auto a = generate_trajectory(l63, 0.01, 200);
  const auto b = generate_trajectory(l63, 0.01, 200);
  CHECK(a.n_samples() == 199);
  CHECK((a.samples.array() == b.samples.array()).all());

  CHECK_THROWS_AS(generate_trajectory(spec, 0.05, 2), Error);
}

}
