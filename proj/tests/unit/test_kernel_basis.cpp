#include <cmath>
#include <random>

#include <doctest.h>

#include "koopgen/dynamics.hpp"
#include "koopgen/errors.hpp"
#include "koopgen/kernel_basis.hpp"

using namespace koopgen;

namespace {

RealMatrix random_points(Index n, Index d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  RealMatrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) x(i, k) = g(rng);
  return x;
}

RealMatrix torus_samples(Index n, double dt) {
  return generate_trajectory(SystemSpec::torus_linear(1.0, std::sqrt(30.0)), dt, n).samples;
}

// Bistochastic kernel p_N(x_i, x_j) / N by explicit sums.
RealMatrix bistochastic_by_sums(const RealMatrix& k) {
  const Index n = k.rows();
  RealVector d(n), q(n);
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Index j = 0; j < n; ++j) s += k(i, j);
    d[i] = s / n;
  }
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Index j = 0; j < n; ++j) s += k(i, j) / d[j];
    q[i] = s / n;
  }
  RealMatrix g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Index m = 0; m < n; ++m) s += k(i, m) * k(m, j) / (d[i] * q[m] * d[j]);
      g(i, j) = s / (static_cast<double>(n) * n);
    }
  return g;
}

}  // namespace

TEST_SUITE("kernel_basis") {

TEST_CASE("bandwidth function") {
  RealMatrix line(3, 1);
  line << 0, 1, 2;
  KernelConfig fixed;
  fixed.bandwidth_mode = BandwidthMode::fixed;
  CHECK((bandwidth_function(line, fixed).array() == 1.0).all());

  KernelConfig knn1;
  knn1.knn = 1;
  const auto s = bandwidth_function(line, knn1);
  CHECK((s.array() - 1.0).abs().maxCoeff() < 1e-15);

  const auto x = random_points(40, 3, 7);
  KernelConfig vb;
  vb.knn = 4;
  const auto s1 = bandwidth_function(x, vb);
  CHECK(std::abs(s1.array().log().mean()) < 1e-12);
  // scaling the data scales the raw bandwidths by the same factor, which the
  // unit geometric mean removes
  CHECK((bandwidth_function(3.5 * x, vb) - s1).cwiseAbs().maxCoeff() < 1e-12);

  RealMatrix dup(4, 1);
  dup << 0, 0, 1, 2;
  CHECK_THROWS_AS(bandwidth_function(dup, knn1), Error);
}

TEST_CASE("epsilon tuning") {
  RealMatrix two(2, 1);
  two << 0, 1;
  const RealVector ones = RealVector::Ones(2);
  EpsilonGrid grid;
  grid.min_exponent = -6;
  grid.max_exponent = 6;
  grid.step = 0.125;

  // brute force on S(eps) = 2 + 2 exp(-1/eps^2)
  const auto eps = grid.values();
  double best = -1.0, best_eps = 0.0;
  for (std::size_t k = 1; k + 1 < eps.size(); ++k) {
    auto S = [](double e) { return 2.0 + 2.0 * std::exp(-1.0 / (e * e)); };
    const double slope =
        (std::log(S(eps[k + 1])) - std::log(S(eps[k - 1]))) / (std::log(eps[k + 1]) - std::log(eps[k - 1]));
    if (slope >= best) {
      best = slope;
      best_eps = eps[k];
    }
  }
  CHECK(tune_epsilon(two, ones, grid) == best_eps);

  const auto x = random_points(30, 2, 3);
  RealMatrix twice(60, 2);
  twice << x, x;
  const RealVector s30 = RealVector::Ones(30), s60 = RealVector::Ones(60);
  // every pair appears four times, so S scales by 4 and the slopes agree
  const auto p1 = epsilon_tuning_profile(x, s30, grid);
  const auto p2 = epsilon_tuning_profile(twice, s60, grid);
  for (std::size_t k = 0; k < p1.kernel_sums.size(); ++k)
    CHECK(p2.kernel_sums[k] == doctest::Approx(4.0 * p1.kernel_sums[k]).epsilon(1e-12));
  CHECK(tune_epsilon(x, s30, grid) == tune_epsilon(twice, s60, grid));

  RealMatrix single(1, 2);
  single << 0.5, 0.5;
  CHECK_THROWS_AS(tune_epsilon(single, RealVector::Ones(1), grid), Error);
}

TEST_CASE("kernel matrix") {
  const auto x = random_points(12, 2, 11);
  const RealVector sigma = RealVector::LinSpaced(12, 0.5, 1.5);
  const auto k = kernel_matrix(x, 0.8, sigma);
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((k.diagonal().array() == 1.0).all());
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j)
      CHECK(k(i, j) == doctest::Approx(std::exp(-(x.row(i) - x.row(j)).squaredNorm() /
                                                 (0.64 * sigma[i] * sigma[j])))
                           .epsilon(1e-14));

  RealMatrix same = RealMatrix::Constant(3, 2, 0.25);
  CHECK((kernel_matrix(same, 1.0, RealVector::Ones(3)).array() == 1.0).all());
  RealMatrix pair(2, 1);
  pair << 0, 0.3;
  CHECK(kernel_matrix(pair, 0.3, RealVector::Ones(2))(0, 1) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("markov normalization") {
  const auto uniform = markov_normalize(RealMatrix::Ones(2, 2));
  CHECK((uniform.degree.array() == 1.0).all());
  CHECK((uniform.q.array() == 1.0).all());
  CHECK((uniform.factor.array() - 0.5).abs().maxCoeff() < 1e-15);
  const RealMatrix g0 = uniform.factor * uniform.factor.transpose();
  CHECK((g0.array() - 0.5).abs().maxCoeff() < 1e-15);

  const auto x = random_points(6, 2, 5);
  const auto k = kernel_matrix(x, 1.1, RealVector::Ones(6));
  const auto mn = markov_normalize(k);
  const RealMatrix g = mn.factor * mn.factor.transpose();
  CHECK((g - bistochastic_by_sums(k)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((g.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);

  const auto scaled = markov_normalize(7.0 * k);
  const RealMatrix g7 = scaled.factor * scaled.factor.transpose();
  CHECK((g7 - g).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("eigenbasis and semigroup") {
  const auto x = torus_samples(401, 0.0491);
  KernelConfig cfg;
  const auto basis = compute_basis(x, cfg, 12);
  const Index n = x.rows();

  CHECK(basis.lambdas[0] == 1.0);
  CHECK((basis.phi.col(0).array() == 1.0).all());
  CHECK(basis.etas[0] == 0.0);
  CHECK(basis.etas[1] == 1.0);
  for (Index j = 1; j <= 12; ++j) {
    CHECK(basis.lambdas[j] > 0.0);
    CHECK(basis.lambdas[j] <= basis.lambdas[j - 1] + 1e-12);
    CHECK(basis.etas[j] >= basis.etas[j - 1]);
  }
  CHECK(basis.lambdas[1] < 1.0 - 1e-12);
  const RealMatrix gram = basis.phi.transpose() * basis.phi / static_cast<double>(n);
  CHECK((gram - RealMatrix::Identity(13, 13)).cwiseAbs().maxCoeff() < 1e-10);

  // Streaming chain vs the dense one.
  const auto sigma = bandwidth_function(x, cfg);
  const auto k = kernel_matrix(x, basis.epsilon_used, sigma);
  const auto mn = markov_normalize(k);
  const auto dense = basis_eigendecomposition(mn, 12);
  CHECK((dense.lambdas - basis.lambdas).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((mn.factor - basis.factor).cwiseAbs().maxCoeff() < 1e-14);

  const RealMatrix g = mn.factor * mn.factor.transpose();
  CHECK((g.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  for (Index j = 1; j <= 12; ++j) {
    const RealVector r = g * basis.phi.col(j) - basis.lambdas[j] * basis.phi.col(j);
    CHECK(r.norm() / std::sqrt(double(n)) < 1e-8);
    Index at;
    basis.phi.col(j).cwiseAbs().maxCoeff(&at);
    CHECK(basis.phi(at, j) > 0.0);
  }

  // translation invariance on the flat torus: Fourier pairs
  CHECK(std::abs(basis.lambdas[1] - basis.lambdas[2]) / basis.lambdas[1] < 0.05);

  const auto l0 = semigroup_eigenvalues(basis.etas, 0.0);
  CHECK((l0.array() == 1.0).all());
  const auto a = semigroup_eigenvalues(basis.etas, 0.3);
  const auto b = semigroup_eigenvalues(basis.etas, 0.5);
  const auto c = semigroup_eigenvalues(basis.etas, 0.8);
  CHECK((a.cwiseProduct(b) - c).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(semigroup_eigenvalues(basis.etas, 1e-4)[1] == doctest::Approx(std::exp(-1e-4)).epsilon(1e-15));

  // Nystrom reproduces in-sample values, the constant, and interpolates.
  for (Index m : {Index(0), Index(17), Index(300)}) {
    for (Index j : {Index(1), Index(5)})
      CHECK(std::abs(nystrom_extend(basis, x, x.row(m).transpose(), j) - basis.phi(m, j)) < 1e-8);
    CHECK(nystrom_extend(basis, x, x.row(m).transpose(), 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Half-step state from a refined trajectory, at a sample where phi_1 is
  // monotone over the four surrounding samples.
  const auto spec = SystemSpec::torus_linear(1.0, std::sqrt(30.0));
  Index at = -1;
  for (Index m = 1; m + 2 < n && at < 0; ++m) {
    const double a = basis.phi(m - 1, 1), b = basis.phi(m, 1), c = basis.phi(m + 1, 1),
                 d = basis.phi(m + 2, 1);
    if ((a < b && b < c && c < d) || (a > b && b > c && c > d)) at = m;
  }
  REQUIRE(at >= 0);
  const auto half = generate_trajectory(spec, 0.0491 / 2, 2 * at + 3);
  CHECK((half.samples.row(2 * at) - x.row(at)).norm() < 1e-12);
  const RealVector mid = half.samples.row(2 * at + 1).transpose();
  CHECK(nystrom_extend(basis, x, mid, 0) == doctest::Approx(1.0).epsilon(1e-12));
  // Strict betweenness only holds asymptotically; at this N the extension
  // stays within a few percent of the range of phi_1 from the chord.
  const double chord = 0.5 * (basis.phi(at, 1) + basis.phi(at + 1, 1));
  const double range = basis.phi.col(1).maxCoeff() - basis.phi.col(1).minCoeff();
  CHECK(std::abs(nystrom_extend(basis, x, mid, 1) - chord) < 0.05 * range);
}

TEST_CASE("basis beyond the numerical rank") {
  // a very wide fixed kernel leaves most eigenvalues at round-off level
  const auto x = torus_samples(101, 0.0491);
  KernelConfig cfg;
  cfg.bandwidth_mode = BandwidthMode::fixed;
  cfg.epsilon = 4.0;
  const auto basis = compute_basis(x, cfg, 100);
  CHECK(basis.lambdas.minCoeff() >= 0.0);
  CHECK(basis.lambdas[100] < 1e-14);
  const auto lt = semigroup_eigenvalues(basis.etas, 1e-4);
  CHECK(lt.allFinite());
  for (Index j = 1; j <= 100; ++j) {
    CHECK(basis.etas[j] >= basis.etas[j - 1]);
    if (basis.lambdas[j] < 1e-14) CHECK(lt[j] < 1e-300);
  }
}

TEST_CASE("basis size checks") {
  const auto x = random_points(10, 2, 2);
  KernelConfig cfg;
  cfg.knn = 3;
  CHECK_THROWS_AS(compute_basis(x, cfg, 10), Error);
  CHECK_THROWS_AS(compute_basis(x, cfg, 0), Error);
}

}
