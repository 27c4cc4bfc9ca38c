#include "koopgen/dynamics.hpp"

#include <cmath>

#include "koopgen/errors.hpp"

namespace koopgen {

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::torus_linear: return "torus_linear";
    case SystemKind::torus_skew: return "torus_skew";
    case SystemKind::lorenz63: return "lorenz63";
  }
  return "unknown";
}

std::string to_string(ObservationKind kind) {
  switch (kind) {
    case ObservationKind::flat_r4: return "flat_r4";
    case ObservationKind::embedded_r3: return "embedded_r3";
    case ObservationKind::identity: return "identity";
  }
  return "unknown";
}

SystemKind parse_system_kind(const std::string& name) {
  if (name == "torus_linear") return SystemKind::torus_linear;
  if (name == "torus_skew") return SystemKind::torus_skew;
  if (name == "lorenz63" || name == "l63") return SystemKind::lorenz63;
  fail(ErrorKind::input, "unknown system '" + name + "'");
}

ObservationKind parse_observation_kind(const std::string& name) {
  if (name == "flat_r4") return ObservationKind::flat_r4;
  if (name == "embedded_r3") return ObservationKind::embedded_r3;
  if (name == "identity") return ObservationKind::identity;
  fail(ErrorKind::input, "unknown observation map '" + name + "'");
}

Index ObservationMap::input_dim() const { return kind == ObservationKind::identity ? -1 : 2; }

Index ObservationMap::output_dim() const {
  switch (kind) {
    case ObservationKind::flat_r4: return 4;
    case ObservationKind::embedded_r3: return 3;
    case ObservationKind::identity: return -1;
  }
  return -1;
}

double SystemSpec::param(const std::string& key) const {
  auto it = params.find(key);
  require(it != params.end(), ErrorKind::parameter,
          "system " + to_string(kind) + " is missing parameter '" + key + "'");
  return it->second;
}

void SystemSpec::validate() const {
  for (const auto& [key, value] : params)
    require(std::isfinite(value), ErrorKind::parameter, "parameter '" + key + "' is not finite");
  require(std::isfinite(spinup_time) && spinup_time >= 0.0, ErrorKind::parameter,
          "spinup_time must be >= 0");
  require(initial_state.size() == state_dim(), ErrorKind::parameter,
          "initial_state must have dimension " + std::to_string(state_dim()));
  require(initial_state.allFinite(), ErrorKind::parameter, "initial_state is not finite");

  switch (kind) {
    case SystemKind::torus_linear:
    case SystemKind::torus_skew:
      require(param("alpha1") != 0.0 && param("alpha2") != 0.0, ErrorKind::parameter,
              "torus frequencies alpha1, alpha2 must be nonzero");
      if (kind == SystemKind::torus_skew) {
        const double beta = param("beta");
        require(beta >= 0.0 && beta < 1.0, ErrorKind::parameter, "skew beta must lie in [0, 1)");
      }
      require(observation.kind != ObservationKind::identity, ErrorKind::parameter,
              "torus systems need a flat_r4 or embedded_r3 observation map");
      if (observation.kind == ObservationKind::embedded_r3)
        require(observation.radius > 0.0 && observation.radius < 1.0, ErrorKind::parameter,
                "embedded_r3 radius must lie in (0, 1)");
      break;
    case SystemKind::lorenz63:
      param("sigma");
      param("rho");
      param("beta");
      require(observation.kind == ObservationKind::identity, ErrorKind::parameter,
              "lorenz63 uses the identity observation map");
      break;
  }
}

SystemSpec SystemSpec::torus_linear(double alpha1, double alpha2, ObservationMap obs) {
  SystemSpec spec;
  spec.kind = SystemKind::torus_linear;
  spec.params = {{"alpha1", alpha1}, {"alpha2", alpha2}};
  spec.observation = obs;
  spec.initial_state = RealVector::Zero(2);
  return spec;
}

SystemSpec SystemSpec::torus_skew(double alpha1, double alpha2, double beta, ObservationMap obs) {
  SystemSpec spec;
  spec.kind = SystemKind::torus_skew;
  spec.params = {{"alpha1", alpha1}, {"alpha2", alpha2}, {"beta", beta}};
  spec.observation = obs;
  spec.initial_state = RealVector::Zero(2);
  return spec;
}

SystemSpec SystemSpec::lorenz63() {
  SystemSpec spec;
  spec.kind = SystemKind::lorenz63;
  spec.params = {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}};
  spec.observation.kind = ObservationKind::identity;
  spec.initial_state = Eigen::Vector3d(1.0, 1.0, 1.05);
  spec.spinup_time = 10.0;
  return spec;
}

double wrap_angle(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

Eigen::Vector2d flow_torus_linear(const Eigen::Vector2d& theta, double t, double alpha1,
                                  double alpha2) {
  return {wrap_angle(theta[0] + alpha1 * t), wrap_angle(theta[1] + alpha2 * t)};
}

Eigen::Vector2d flow_torus_skew(const Eigen::Vector2d& theta, double t, double alpha1,
                                double alpha2, double beta) {
  require(alpha1 != 0.0, ErrorKind::parameter, "skew flow closed form requires alpha1 != 0");
  const double advanced = theta[0] + alpha1 * t;
  const double drift =
      (alpha2 * beta / alpha1) * (std::cos(theta[0]) - std::cos(advanced));
  return {wrap_angle(advanced), wrap_angle(theta[1] + alpha2 * t + drift)};
}

Eigen::Vector3d lorenz63_field(const Eigen::Vector3d& s, const Lorenz63Params& p) {
  return {p.sigma * (s[1] - s[0]), s[0] * (p.rho - s[2]) - s[1], s[0] * s[1] - p.beta * s[2]};
}

double lorenz63_divergence(const Lorenz63Params& p) { return -(p.sigma + 1.0 + p.beta); }

Eigen::Vector3d rk4_step(const Eigen::Vector3d& s, double dt, const Lorenz63Params& p) {
  const Eigen::Vector3d k1 = lorenz63_field(s, p);
  const Eigen::Vector3d k2 = lorenz63_field(s + 0.5 * dt * k1, p);
  const Eigen::Vector3d k3 = lorenz63_field(s + 0.5 * dt * k2, p);
  const Eigen::Vector3d k4 = lorenz63_field(s + dt * k3, p);
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

long step_count(double t, double dt) {
  require(std::isfinite(t) && std::isfinite(dt) && dt > 0.0 && t >= 0.0, ErrorKind::parameter,
          "integration time must be >= 0 and dt_internal > 0");
  const double ratio = t / dt;
  const long steps = std::lround(ratio);
  require(std::abs(ratio - static_cast<double>(steps)) <= 1e-9 * std::max(1.0, ratio),
          ErrorKind::parameter, "integration time must be an integer multiple of dt_internal");
  return steps;
}

}  // namespace

Eigen::Vector3d integrate_l63(const Eigen::Vector3d& state, double t, const Lorenz63Params& p,
                              double dt_internal) {
  require(state.allFinite(), ErrorKind::input, "Lorenz 63 state is not finite");
  require(std::isfinite(p.sigma) && std::isfinite(p.rho) && std::isfinite(p.beta),
          ErrorKind::input, "Lorenz 63 parameters are not finite");
  const long steps = step_count(t, dt_internal);
  Eigen::Vector3d s = state;
  for (long i = 0; i < steps; ++i) s = rk4_step(s, dt_internal, p);
  require(s.allFinite(), ErrorKind::integration, "Lorenz 63 integration diverged");
  return s;
}

RealVector observe(const Eigen::Ref<const RealVector>& state, const ObservationMap& map) {
  switch (map.kind) {
    case ObservationKind::identity:
      return state;
    case ObservationKind::flat_r4: {
      require(state.size() == 2, ErrorKind::input, "flat_r4 observation expects an angle pair");
      RealVector y(4);
      y << std::cos(state[0]), std::sin(state[0]), std::cos(state[1]), std::sin(state[1]);
      return y;
    }
    case ObservationKind::embedded_r3: {
      require(state.size() == 2, ErrorKind::input,
              "embedded_r3 observation expects an angle pair");
      const double ring = 1.0 + map.radius * std::cos(state[0]);
      RealVector y(3);
      y << ring * std::cos(state[1]), ring * std::sin(state[1]), map.radius * std::sin(state[0]);
      return y;
    }
  }
  fail(ErrorKind::input, "unknown observation map");
}

TrajectoryDataset generate_trajectory(const SystemSpec& spec, double delta_t, Index n_samples,
                                      int l63_substeps) {
  spec.validate();
  require(std::isfinite(delta_t) && delta_t > 0.0, ErrorKind::parameter, "delta_t must be > 0");
  require(n_samples >= 3, ErrorKind::parameter, "n_samples must be >= 3");
  require(l63_substeps >= 1, ErrorKind::parameter, "l63_substeps must be >= 1");

  const Index n = (n_samples % 2 == 0) ? n_samples - 1 : n_samples;

  TrajectoryDataset data;
  data.spec = spec;
  data.delta_t = delta_t;
  data.requested_samples = n_samples;
  data.states.resize(n, spec.state_dim());

  switch (spec.kind) {
    case SystemKind::torus_linear:
    case SystemKind::torus_skew: {
      const double a1 = spec.param("alpha1");
      const double a2 = spec.param("alpha2");
      const double beta = spec.kind == SystemKind::torus_skew ? spec.param("beta") : 0.0;
      auto flow = [&](const Eigen::Vector2d& th, double t) {
        return spec.kind == SystemKind::torus_skew ? flow_torus_skew(th, t, a1, a2, beta)
                                                   : flow_torus_linear(th, t, a1, a2);
      };
      const Eigen::Vector2d start = flow(spec.initial_state.head<2>(), spec.spinup_time);
      for (Index i = 0; i < n; ++i)
        data.states.row(i) = flow(start, static_cast<double>(i) * delta_t).transpose();
      break;
    }
    case SystemKind::lorenz63: {
      const Lorenz63Params p{spec.param("sigma"), spec.param("rho"), spec.param("beta")};
      const double dt_internal = delta_t / l63_substeps;
      const long spin_steps = std::lround(spec.spinup_time / dt_internal);
      Eigen::Vector3d s = spec.initial_state.head<3>();
      for (long k = 0; k < spin_steps; ++k) s = rk4_step(s, dt_internal, p);
      require(s.allFinite(), ErrorKind::integration, "Lorenz 63 spinup diverged");
      for (Index i = 0; i < n; ++i) {
        if (i > 0)
          for (int k = 0; k < l63_substeps; ++k) s = rk4_step(s, dt_internal, p);
        require(s.allFinite(), ErrorKind::integration,
                "Lorenz 63 integration diverged at sample " + std::to_string(i));
        data.states.row(i) = s.transpose();
      }
      break;
    }
  }

  const Index d = spec.observation.kind == ObservationKind::identity
                      ? spec.state_dim()
                      : spec.observation.output_dim();
  data.samples.resize(n, d);
  for (Index i = 0; i < n; ++i)
    data.samples.row(i) = observe(data.states.row(i).transpose(), spec.observation).transpose();
  return data;
}

}  // namespace koopgen
