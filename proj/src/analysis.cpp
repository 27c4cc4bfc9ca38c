#include "koopgen/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "koopgen/errors.hpp"

namespace koopgen {

namespace {

const Complex kI(0.0, 1.0);

/// sum_{n<N-j} conj(f_n) f_{n+j} for j = 0..J.
ComplexVector lag_sums(const ComplexVector& f, Index J) {
  const Index n = f.size();
  ComplexVector out(J + 1);
  for (Index j = 0; j <= J; ++j)
    out[j] = f.head(n - j).dot(f.tail(n - j));  // dot conjugates the first argument
  return out;
}

Index lag_count(double T_c, double delta_t) {
  require(delta_t > 0.0 && T_c >= 0.0, ErrorKind::parameter, "T_c >= 0 and delta_t > 0 required");
  return static_cast<Index>(std::floor(T_c / delta_t + 1e-9));
}

}  // namespace

ComplexVector empirical_autocorrelation(const ComplexVector& f, Index J) {
  const Index n = f.size();
  require(J >= 0 && J < n, ErrorKind::input, "max lag must satisfy 0 <= J < N");
  const ComplexVector centered = f.array() - f.mean();
  const double variance = centered.squaredNorm() / static_cast<double>(n);
  require(variance > 0.0, ErrorKind::degenerate_data, "observable has zero variance");
  ComplexVector c = lag_sums(centered, J);
  for (Index j = 0; j <= J; ++j) c[j] /= static_cast<double>(n - j) * variance;
  c[0] = 1.0;
  return c;
}

ComplexVector lag_correlation(const ComplexVector& psi, Index J) {
  const Index n = psi.size();
  require(J >= 0 && J < n, ErrorKind::input, "max lag must satisfy 0 <= J < N");
  ComplexVector c = lag_sums(psi, J);
  RealVector energy = psi.cwiseAbs2();
  // Prefix sums give the head and tail window energies in O(1) per lag.
  RealVector prefix(n + 1);
  prefix[0] = 0.0;
  for (Index i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + energy[i];
  for (Index j = 0; j <= J; ++j) {
    const double head = prefix[n - j];
    const double tail = prefix[n] - prefix[j];
    const double mean_energy = 0.5 * (head + tail);
    require(mean_energy > 0.0, ErrorKind::degenerate_data, "eigenfunction vanishes on window");
    c[j] /= mean_energy;
  }
  return c;
}

double pseudospectral_bound(double omega, const ComplexVector& psi, double T_c, double delta_t) {
  const Index J = lag_count(T_c, delta_t);
  require(J < psi.size(), ErrorKind::input, "T_c exceeds the data span");
  const ComplexVector c = lag_correlation(psi, J);
  double eps = 0.0;
  for (Index j = 0; j <= J; ++j) {
    const double t = static_cast<double>(j) * delta_t;
    eps = std::max(eps, std::real(1.0 - std::exp(-kI * omega * t) * c[j]));
  }
  return eps;
}

RealVector shift_deflection(double omega, const ComplexVector& psi, Index J, double delta_t) {
  const Index n = psi.size();
  require(J >= 0 && J < n, ErrorKind::input, "max lag must satisfy 0 <= J < N");
  RealVector out(J + 1);
  for (Index j = 0; j <= J; ++j) {
    const Complex phase = std::exp(kI * omega * static_cast<double>(j) * delta_t);
    const auto head = psi.head(n - j);
    const auto tail = psi.tail(n - j);
    const double mean_energy = 0.5 * (head.squaredNorm() + tail.squaredNorm());
    out[j] = (tail - phase * head).squaredNorm() / mean_energy;
  }
  return out;
}

std::vector<EigenpairScore> order_eigenpairs(const SpectralResult& result, double T_c,
                                             double delta_t) {
  const Index m = result.M();
  std::vector<EigenpairScore> scores;
  scores.reserve(static_cast<std::size_t>(2 * m + 1));
  scores.push_back({0, 0.0, 0.0, 0});
  for (Index k = 1; k <= m; ++k) {
    const Index pos = m + k - 1;
    const Index neg = m - k;
    const double eps_pos =
        pseudospectral_bound(result.omega[pos], result.psi.col(pos), T_c, delta_t);
    const double eps_neg =
        pseudospectral_bound(result.omega[neg], result.psi.col(neg), T_c, delta_t);
    require(std::abs(eps_pos - eps_neg) <= 1e-10, ErrorKind::numerical,
            "conjugate eigenpairs scored differently (" + std::to_string(eps_pos) + " vs " +
                std::to_string(eps_neg) + ")");
    scores.push_back({k, result.omega[pos], eps_pos, 0});
    scores.push_back({-k, result.omega[neg], eps_pos, 0});
  }
  std::stable_sort(scores.begin() + 1, scores.end(),
                   [](const EigenpairScore& a, const EigenpairScore& b) {
                     if (a.epsilon_Tc != b.epsilon_Tc) return a.epsilon_Tc < b.epsilon_Tc;
                     const Index pa = std::abs(a.index), pb = std::abs(b.index);
                     if (pa != pb) return pa < pb;
                     return a.index > b.index;
                   });
  for (std::size_t r = 0; r < scores.size(); ++r) scores[r].rank = static_cast<Index>(r);
  return scores;
}

AutocorrelationReport reconstruct_autocorrelation(const ComplexVector& f,
                                                  const SpectralResult& result, Index J,
                                                  double delta_t,
                                                  const std::string& observable_id) {
  const Index n = f.size();
  require(n == result.psi.rows(), ErrorKind::input, "observable length does not match data");
  AutocorrelationReport report;
  report.observable_id = observable_id;
  report.empirical = empirical_autocorrelation(f, J);

  ComplexVector centered = f.array() - f.mean();
  centered /= std::sqrt(centered.squaredNorm() / static_cast<double>(n));
  report.coefficients = result.psi.adjoint() * centered / static_cast<double>(n);
  const RealVector mass = report.coefficients.cwiseAbs2();
  report.captured_mass = mass.sum();

  report.lags.resize(J + 1);
  report.reconstructed.resize(J + 1);
  for (Index j = 0; j <= J; ++j) {
    const double t = static_cast<double>(j) * delta_t;
    report.lags[j] = t;
    Complex acc = 0.0;
    for (Index l = 0; l < mass.size(); ++l) acc += std::exp(kI * result.omega[l] * t) * mass[l];
    report.reconstructed[j] = acc;
  }
  return report;
}

ComplexVector evolve_observable(const ComplexVector& f, const SpectralResult& result, double t) {
  const Index n = f.size();
  require(n == result.psi.rows(), ErrorKind::input, "observable length does not match data");
  const double inv_n = 1.0 / static_cast<double>(n);
  ComplexVector coeffs = result.psi.adjoint() * f * inv_n;
  for (Index l = 0; l < coeffs.size(); ++l) coeffs[l] *= std::exp(kI * result.omega[l] * t);
  ComplexVector out = result.psi * coeffs;
  out.array() += f.mean();
  return out;
}

}  // namespace koopgen
