#include <cmath>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "koopgen/analysis.hpp"
#include "koopgen/errors.hpp"

using namespace koopgen;

namespace {

const Complex I(0.0, 1.0);
constexpr double kDt = 0.0491;

ComplexVector rotation(Index n, double omega, double dt) {
  ComplexVector f(n);
  for (Index j = 0; j < n; ++j) f[j] = std::exp(I * (omega * j * dt));
  return f;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("empirical autocorrelation") {
  const Index n = 4097;
  const auto e = empirical_autocorrelation(rotation(n, 1.0, kDt), 407);
  CHECK(e[0] == Complex(1.0));
  // centering shifts a pure phase slightly: exact against the definition,
  // close to e^{it}
  ComplexVector f = rotation(n, 1.0, kDt);
  const ComplexVector fc = f.array() - f.mean();
  const double var = fc.squaredNorm() / n;
  double worst = 0.0, worst_exact = 0.0;
  for (Index j = 0; j <= 407; ++j) {
    Complex s = 0.0;
    for (Index m = 0; m + j < n; ++m) s += std::conj(fc[m]) * fc[m + j];
    worst = std::max(worst, std::abs(e[j] - s / (double(n - j) * var)));
    worst_exact = std::max(worst_exact, std::abs(e[j] - std::exp(I * (j * kDt))));
  }
  CHECK(worst < 1e-12);
  CHECK(worst_exact < 1e-3);

  ComplexVector c(n);
  for (Index j = 0; j < n; ++j) c[j] = std::cos(j * kDt);
  const auto ec = empirical_autocorrelation(c, 407);
  double err = 0.0;
  for (Index j = 0; j <= 407; ++j) err = std::max(err, std::abs(ec[j] - std::cos(j * kDt)));
  CHECK(err < 0.02);

  std::mt19937_64 rng(20261015);
  std::normal_distribution<double> g;
  ComplexVector noise(n);
  for (Index j = 0; j < n; ++j) noise[j] = g(rng);
  const auto en = empirical_autocorrelation(noise, 50);
  for (Index j = 1; j <= 50; ++j) CHECK(std::abs(en[j]) < 5.0 / std::sqrt(double(n)));

  // reversing the samples conjugates the correlation of a real-time series
  const ComplexVector rev = noise.reverse().eval();
  const auto er = empirical_autocorrelation(rev, 20);
  CHECK((er - en.head(21).conjugate()).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(empirical_autocorrelation(ComplexVector::Constant(11, 2.0), 3), Error);
  CHECK_THROWS_AS(empirical_autocorrelation(noise, n), Error);
}

TEST_CASE("pseudospectral bound") {
  const Index n = 4097;
  CHECK(pseudospectral_bound(0.0, ComplexVector::Ones(n), 49.1, kDt) == 0.0);

  const ComplexVector psi = rotation(n, 1.0, kDt);
  CHECK(pseudospectral_bound(1.0, psi, 49.1, kDt) < 0.02);
  CHECK(pseudospectral_bound(2.0, psi, 49.1, kDt) >= 0.5);

  // a perturbed phase so the deflection is not trivially zero
  ComplexVector wobble(n);
  for (Index j = 0; j < n; ++j)
    wobble[j] = std::exp(I * (j * kDt + 0.2 * std::sin(0.37 * j * kDt))) * (1.0 + 0.1 * std::cos(j * kDt * 2.3));
  const double eps = pseudospectral_bound(1.0, wobble, 19.64, kDt);
  const auto defl = shift_deflection(1.0, wobble, static_cast<Index>(std::floor(19.64 / kDt + 1e-9)), kDt);
  CHECK(defl.maxCoeff() <= 2.0 * eps + 1e-8);
  CHECK(defl.maxCoeff() == doctest::Approx(2.0 * eps).epsilon(1e-12));

  double last = 0.0;
  for (double tc : {0.5, 2.0, 8.0, 19.64, 49.1}) {
    const double v = pseudospectral_bound(1.0, wobble, tc, kDt);
    CHECK(v >= last);
    last = v;
  }
  // symmetry: (omega, psi) and (-omega, conj psi) score alike
  CHECK(std::abs(pseudospectral_bound(1.0, wobble, 19.64, kDt) -
                 pseudospectral_bound(-1.0, wobble.conjugate(), 19.64, kDt)) < 1e-12);
}

TEST_CASE("ordering on the torus run") {
  const auto& run = fixtures::torus_run();
  const auto scores = order_eigenpairs(run.result, 49.1, kDt);
  REQUIRE(scores.size() == 67);
  CHECK(scores[0].index == 0);
  CHECK(scores[0].epsilon_Tc == 0.0);
  for (std::size_t r = 1; r < scores.size(); ++r) {
    CHECK(scores[r].rank == static_cast<Index>(r));
    CHECK(scores[r].epsilon_Tc >= scores[r - 1].epsilon_Tc);
    CHECK(scores[r].epsilon_Tc >= 0.0);
  }
  for (std::size_t r = 1; r < scores.size(); r += 2) {
    CHECK(scores[r].index == -scores[r + 1].index);
    CHECK(scores[r].index > 0);
    CHECK(scores[r].epsilon_Tc == scores[r + 1].epsilon_Tc);
  }
  // conjugate pairs score alike up to rounding
  const auto& res = run.result;
  for (Index k = 1; k <= res.M(); ++k) {
    const Index pos = res.M() + k - 1, neg = res.M() - k;
    const double a = pseudospectral_bound(res.omega[pos], res.psi.col(pos), 49.1, kDt);
    const double b = pseudospectral_bound(res.omega[neg], res.psi.col(neg), 49.1, kDt);
    CHECK(std::abs(a - b) < 1e-10);
  }

  for (double target : {1.0, std::sqrt(30.0), 1.0 + std::sqrt(30.0)}) {
    bool found = false;
    for (const auto& s : scores)
      found = found || (s.omega > 0 && std::abs(s.omega - target) / target < 0.005 &&
                        s.epsilon_Tc <= 0.2);
    CHECK(found);
  }
}

TEST_CASE("autocorrelation reconstruction and evolution") {
  const auto& run = fixtures::torus_run();
  const auto& res = run.result;
  const Index n = run.data.n_samples();
  const Index k = res.pair_count() - 1;

  const auto own = reconstruct_autocorrelation(res.psi.col(k), res, 100, kDt);
  CHECK(own.captured_mass == doctest::Approx(1.0).epsilon(1e-8));
  for (Index j = 0; j <= 100; ++j)
    CHECK(std::abs(own.reconstructed[j] - std::exp(I * (res.omega[k] * j * kDt))) < 1e-8);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  ComplexVector r(n);
  for (Index j = 0; j < n; ++j) r[j] = Complex(g(rng), g(rng));
  r.array() -= r.mean();
  const ComplexVector perp = r - res.psi * (res.psi.adjoint() * r / double(n));
  const auto none = reconstruct_autocorrelation(perp, res, 50, kDt);
  CHECK(none.reconstructed.cwiseAbs().maxCoeff() < 1e-10);

  const ComplexVector f = run.data.samples.col(0).cast<Complex>();
  const auto rep = reconstruct_autocorrelation(f, res, 407, kDt, "y1");
  CHECK(rep.observable_id == "y1");
  CHECK(std::abs(rep.empirical[0] - 1.0) < 1e-12);
  CHECK(rep.captured_mass <= 1.0 + 1e-10);
  CHECK(rep.reconstructed.cwiseAbs().maxCoeff() <= rep.captured_mass + 1e-12);
  double err = 0.0;
  for (Index j = 0; j <= 407; ++j)
    err = std::max(err, std::abs(rep.reconstructed[j] - std::cos(j * kDt)));
  CHECK(err < 0.05);

  const ComplexVector p0 = evolve_observable(f, res, 0.0);
  CHECK((evolve_observable(p0, res, 0.0) - p0).cwiseAbs().maxCoeff() < 1e-10);
  const ComplexVector moved = evolve_observable(res.psi.col(k), res, 3.0);
  CHECK((moved - std::exp(I * (3.0 * res.omega[k])) * res.psi.col(k)).cwiseAbs().maxCoeff() < 1e-8);
  const double n0 = p0.norm();
  for (double t : {1.0, 7.0}) CHECK(std::abs(evolve_observable(f, res, t).norm() - n0) < 1e-12 * std::sqrt(double(n)) * n0);
  CHECK(n0 <= f.norm() + 1e-9);
}

}
