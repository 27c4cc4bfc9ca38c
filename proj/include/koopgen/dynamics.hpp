#pragma once

#include <map>
#include <string>

#include <Eigen/Core>

#include "koopgen/types.hpp"

namespace koopgen {

enum class SystemKind { torus_linear, torus_skew, lorenz63 };
enum class ObservationKind { flat_r4, embedded_r3, identity };

std::string to_string(SystemKind kind);
std::string to_string(ObservationKind kind);
SystemKind parse_system_kind(const std::string& name);
ObservationKind parse_observation_kind(const std::string& name);

struct ObservationMap {
  ObservationKind kind = ObservationKind::flat_r4;
  double radius = 0.5;  // embedded_r3 only

  Index input_dim() const;
  Index output_dim() const;
};

/// A benchmark flow with its observation map. `params` keys: alpha1, alpha2
/// (tori), beta (skew coupling), sigma, rho, beta (Lorenz 63).
struct SystemSpec {
  SystemKind kind = SystemKind::torus_linear;
  std::map<std::string, double> params;
  ObservationMap observation;
  RealVector initial_state;
  double spinup_time = 0.0;

  double param(const std::string& key) const;
  Index state_dim() const { return kind == SystemKind::lorenz63 ? 3 : 2; }

  /// Throws ErrorKind::parameter when an invariant is violated.
  void validate() const;

  static SystemSpec torus_linear(double alpha1, double alpha2, ObservationMap obs = {});
  static SystemSpec torus_skew(double alpha1, double alpha2, double beta, ObservationMap obs = {});
  /// Standard parameters (10, 28, 8/3), initial state (1, 1, 1.05), 10 time units spinup.
  static SystemSpec lorenz63();
};

struct TrajectoryDataset {
  RealMatrix samples;  // N x d, row n = F(x_n)
  RealMatrix states;   // N x state_dim, row n = x_n
  double delta_t = 0.0;
  SystemSpec spec;
  Index requested_samples = 0;  // before the odd-length reduction

  Index n_samples() const { return samples.rows(); }
  Index dim() const { return samples.cols(); }
  bool reduced_to_odd() const { return requested_samples != n_samples(); }
};

struct Lorenz63Params {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
};

/// Wraps an angle into [0, 2pi).
double wrap_angle(double angle);

Eigen::Vector2d flow_torus_linear(const Eigen::Vector2d& theta, double t, double alpha1,
                                  double alpha2);

/// Closed-form solution of d(theta1)/dt = alpha1, d(theta2)/dt = alpha2 (1 + beta sin theta1).
Eigen::Vector2d flow_torus_skew(const Eigen::Vector2d& theta, double t, double alpha1,
                                double alpha2, double beta);

Eigen::Vector3d lorenz63_field(const Eigen::Vector3d& state, const Lorenz63Params& params);

/// Trace of the Jacobian of the Lorenz 63 field (constant in space).
double lorenz63_divergence(const Lorenz63Params& params);

Eigen::Vector3d rk4_step(const Eigen::Vector3d& state, double dt, const Lorenz63Params& params);

/// Classical RK4 with fixed step `dt_internal`; `t` must be a multiple of it.
Eigen::Vector3d integrate_l63(const Eigen::Vector3d& state, double t,
                              const Lorenz63Params& params, double dt_internal);

RealVector observe(const Eigen::Ref<const RealVector>& state, const ObservationMap& map);

/// Samples F(Phi^{n dt}(x_0)), n = 0..N-1, after discarding the spinup. An even
/// N is reduced to N - 1 so the downstream DFT filter sees an odd length.
TrajectoryDataset generate_trajectory(const SystemSpec& spec, double delta_t, Index n_samples,
                                      int l63_substeps = 10);

}  // namespace koopgen
