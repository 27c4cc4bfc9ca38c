#pragma once

#include <string>
#include <vector>

#include "koopgen/kernel_basis.hpp"
#include "koopgen/types.hpp"

namespace koopgen {

enum class ResolventMode { iterated, multi_step };

std::string to_string(ResolventMode mode);
ResolventMode parse_resolvent_mode(const std::string& name);

struct SpectralConfig {
  double z = 1.0;
  double tau = 1e-4;
  Index L = 101;
  Index M = 33;
  Index Q = 1018;  // quadrature steps, even
  double T_ell = 50.0;
  double T_c = 49.1;
  ResolventMode mode = ResolventMode::iterated;
  bool clip_shift_singular_values = false;

  void validate() const;
  /// Also checks T_ell against Q * delta_t.
  void validate(double delta_t) const;
};

/// Positive-frequency parts of phi_1..phi_L (the constant phi_0 is dropped).
struct FilteredBasis {
  ComplexMatrix phi_plus;  // N x L
};

/// Forward DFT, zero every frequency k <= 0, inverse DFT. N must be odd.
ComplexVector positive_frequency_filter(const ComplexVector& series);
FilteredBasis filter_basis(const RealMatrix& phi, Index L);

/// U_ij = (1/N) sum_n conj(phi_i(x_n)) phi_j(x_{(n+q) mod N}).
ComplexMatrix shift_matrix(const FilteredBasis& fb, Index q);

/// Composite Simpson weights (dt/3) [1, 4, 2, 4, ..., 2, 4, 1] on nodes q dt.
RealVector simpson_weights(Index Q, double delta_t);

ComplexMatrix resolvent_matrix(const FilteredBasis& fb, double z, Index Q, double delta_t,
                               ResolventMode mode = ResolventMode::iterated,
                               bool clip_shift_singular_values = false);

/// S_half diag(lambdas_tau) S_half, with eigenvalues kept below 1/z.
ComplexMatrix compactify(const ComplexMatrix& s_half, const RealVector& lambdas_tau,
                         double z = 1.0);

struct RankReduction {
  ComplexMatrix s_m;        // S_plus_m - S_minus_m
  ComplexMatrix s_plus_m;   // C diag(E) C^*
  ComplexMatrix s_minus_m;  // conj(S_plus_m)
  ComplexMatrix vectors;    // C, L x M
  RealVector values;        // E, descending
};

RankReduction rank_reduce(const ComplexMatrix& s_plus, Index M);

/// theta = |e| exp(i sgn(e) arccos(|e| z)), a point of the circle through 0 and 1/z.
Complex resolvent_eigenvalue(double e, double z);
/// omega = sqrt(1 - e^2 z^2) / e.
double eigenfrequency(double e, double z);
/// beta_z(theta) = z - 1/theta, the inverse of theta = 1/(z - lambda).
Complex resolvent_inverse(Complex theta, double z);

/// Columns ordered e_{-M} <= ... <= e_{-1} < 0 < e_1 <= ... <= e_M, with
/// q_{-j} = conj(q_j).
struct FrequencyData {
  RealVector e;
  ComplexVector theta;
  RealVector omega;
  ComplexMatrix q;  // L x 2M
};

FrequencyData eig_frequencies(const ComplexMatrix& s_m, double z, Index M);

struct GeneratorMatrices {
  ComplexMatrix V;  // i Q diag(omega) Q^*
  ComplexMatrix R;  // Q diag(theta) Q^* + (I - Q Q^*) / z
};

GeneratorMatrices assemble_generator(const ComplexMatrix& q, const RealVector& omega,
                                     const ComplexVector& theta, double z);

struct InvariantReport {
  double generator_skew_defect = 0.0;   // max |V + V^*|
  double eigenvalue_pairing = 0.0;      // max |e_j + e_{-j}|
  double eigenvector_pairing = 0.0;     // max |q_{-j} - conj(q_j)|
  double circle_defect = 0.0;           // max ||theta - 1/(2z)| - 1/(2z)|
  double orthonormality_defect = 0.0;   // max |Q^* Q - I|
  double resolvent_identity = 0.0;      // max |(zI - V) R Q - Q|
  double polar_reconstruction = 0.0;    // |R - W S| / |R|
  double sqrt_reconstruction = 0.0;     // |S_half^2 - S| / |S|

  bool passes(double tol = 1e-10) const;
};

/// Eigenpairs indexed j = -M..-1, 1..M (column c <-> j as in FrequencyData);
/// the constant pair j = 0 (omega = 0, psi = 1, theta = 1/z) is kept apart.
struct SpectralResult {
  SpectralConfig config;
  RealVector e;
  ComplexVector theta;
  RealVector omega;
  ComplexMatrix q_coeffs;  // L x 2M
  ComplexMatrix psi;       // N x 2M
  ComplexMatrix V;
  ComplexMatrix R;
  RealVector lambdas_tau;  // j = 1..L
  InvariantReport invariants;

  Index pair_count() const { return omega.size(); }  // 2M
  Index M() const { return omega.size() / 2; }
  /// Signed label of column c.
  Index label(Index c) const { return c < M() ? c - M() : c - M() + 1; }
};

SpectralResult run_pipeline(const RealMatrix& phi, const RealVector& etas, double delta_t,
                            const SpectralConfig& config);
SpectralResult run_pipeline(const KernelBasis& basis, double delta_t,
                            const SpectralConfig& config);

}  // namespace koopgen
