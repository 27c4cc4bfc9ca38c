#pragma once

#include <optional>
#include <string>
#include <vector>

#include "koopgen/types.hpp"

namespace koopgen {

enum class BandwidthMode { fixed, variable };

std::string to_string(BandwidthMode mode);
BandwidthMode parse_bandwidth_mode(const std::string& name);

/// Geometric grid base^e for e = min_exponent, min_exponent + step, ..., max_exponent.
struct EpsilonGrid {
  double base = 2.0;
  double min_exponent = -20.0;
  double max_exponent = 20.0;
  double step = 0.25;

  std::vector<double> values() const;
};

struct KernelConfig {
  BandwidthMode bandwidth_mode = BandwidthMode::variable;
  Index knn = 8;
  std::optional<double> epsilon;  // tuned automatically when absent
  EpsilonGrid epsilon_grid;
  /// Upper bound on kernel-sum pairs used by the tuner; larger datasets use a
  /// deterministic strided subset of rows.
  Index tuning_max_pairs = 20'000'000;
  /// The normalized factor is kept in KernelBasis only up to this many samples.
  Index retain_factor_max_n = 8192;

  void validate(Index n_samples) const;
};

/// Output of the bistochastic normalization: G = factor * factor^T.
struct MarkovNormalization {
  RealMatrix factor;  // N x N, K_ij / (N d_i sqrt(q_j))
  RealVector degree;  // d_i = (1/N) sum_j K_ij
  RealVector q;       // q_i = (1/N) sum_j K_ij / d_j
};

struct KernelBasis {
  RealVector lambdas;  // L+1 eigenvalues of G, lambdas[0] = 1
  RealVector etas;     // L+1 semigroup generator eigenvalues, etas[0] = 0, etas[1] = 1
  RealMatrix phi;      // N x (L+1) eigenfunction samples, phi.col(0) = 1
  double epsilon_used = 0.0;
  RealVector sigma;    // N bandwidths (normalized to unit geometric mean)

  BandwidthMode bandwidth_mode = BandwidthMode::fixed;
  Index knn = 0;
  double sigma_scale = 1.0;    // geometric mean of the raw kNN bandwidths
  RealVector degree;           // normalization data for out-of-sample extension
  RealVector q;
  RealMatrix right_vectors;    // factor^T * phi, N x (L+1)
  RealMatrix factor;           // empty when N > retain_factor_max_n

  Index size() const { return lambdas.size() - 1; }  // L
  Index n_samples() const { return phi.rows(); }
};

RealMatrix pairwise_squared_distances(const RealMatrix& samples);

/// Fixed mode: all ones. Variable mode: mean distance to the knn nearest
/// neighbors (self excluded), rescaled to unit geometric mean.
RealVector bandwidth_function(const RealMatrix& samples, const KernelConfig& config);

/// Grid value maximizing the centered slope d log S / d log eps of the kernel
/// sum S(eps) = sum_ij exp(-|y_i - y_j|^2 / (eps^2 sigma_i sigma_j)).
double tune_epsilon(const RealMatrix& samples, const RealVector& sigma, const EpsilonGrid& grid,
                    Index max_pairs = 20'000'000);

/// Log-log slope profile used by tune_epsilon, one entry per grid point
/// (NaN at the two ends).
struct TuningProfile {
  std::vector<double> epsilons;
  std::vector<double> kernel_sums;
  std::vector<double> slopes;
};
TuningProfile epsilon_tuning_profile(const RealMatrix& samples, const RealVector& sigma,
                                     const EpsilonGrid& grid, Index max_pairs = 20'000'000);

RealMatrix kernel_matrix(const RealMatrix& samples, double epsilon, const RealVector& sigma);

MarkovNormalization markov_normalize(const RealMatrix& kernel);

/// Leading L+1 eigenpairs of G = factor * factor^T (i.e. squared singular values
/// and left singular vectors of the factor), scaled to unit norm in L2(mu_N).
KernelBasis basis_eigendecomposition(const MarkovNormalization& normalized, Index L);

/// exp(-tau * eta_j).
RealVector semigroup_eigenvalues(const RealVector& etas, double tau);

/// Out-of-sample value of phi_j at y_new via the kernel integral representation.
double nystrom_extend(const KernelBasis& basis, const RealMatrix& samples,
                      const RealVector& y_new, Index j);

/// Full chain from samples: bandwidths, epsilon, kernel, normalization, basis.
/// The kernel is streamed in column blocks; only the Gram matrix is held at
/// full N x N size.
KernelBasis compute_basis(const RealMatrix& samples, const KernelConfig& config, Index L);

}  // namespace koopgen
