#pragma once

#include <string>
#include <vector>

#include "koopgen/spectral.hpp"
#include "koopgen/types.hpp"

namespace koopgen {

/// Centered anomaly correlation: truncated lag sums over (N - j), divided by
/// the sample variance, so the value at lag 0 is 1.
ComplexVector empirical_autocorrelation(const ComplexVector& f, Index J);

/// Uncentered lag correlation sum_{n<N-j} conj(psi_n) psi_{n+j}, normalized by
/// the mean energy of the two overlapping windows.
ComplexVector lag_correlation(const ComplexVector& psi, Index J);

/// max_{0 <= j <= floor(T_c/dt)} Re(1 - exp(-i omega t_j) C(t_j)) with C from lag_correlation.
double pseudospectral_bound(double omega, const ComplexVector& psi, double T_c, double delta_t);

/// Relative deflection |psi(. + t_j) - exp(i omega t_j) psi|^2 over the
/// overlapping window, per lag j = 0..J. Equals 2 Re(1 - exp(-i omega t_j) C).
RealVector shift_deflection(double omega, const ComplexVector& psi, Index J, double delta_t);

struct EigenpairScore {
  Index index = 0;  // signed pair label, 0 for the constant pair
  double omega = 0.0;
  double epsilon_Tc = 0.0;
  Index rank = 0;
};

/// Constant pair first, then ascending epsilon; conjugate pairs share a score
/// and stay adjacent (positive frequency first).
std::vector<EigenpairScore> order_eigenpairs(const SpectralResult& result, double T_c,
                                             double delta_t);

struct AutocorrelationReport {
  std::string observable_id;
  RealVector lags;
  ComplexVector empirical;
  ComplexVector reconstructed;
  ComplexVector coefficients;  // c_l = <psi_l, f'>, one per eigenpair column
  double captured_mass = 0.0;  // sum |c_l|^2
};

AutocorrelationReport reconstruct_autocorrelation(const ComplexVector& f,
                                                  const SpectralResult& result, Index J,
                                                  double delta_t,
                                                  const std::string& observable_id = "");

/// sum_l exp(i omega_l t) <psi_l, f> psi_l + <1, f> 1.
ComplexVector evolve_observable(const ComplexVector& f, const SpectralResult& result, double t);

}  // namespace koopgen
