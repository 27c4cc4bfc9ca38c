#include "json_codec.hpp"

#include <cmath>

namespace koopgen::detail {

namespace {

std::vector<std::string> param_names(SystemKind kind) {
  switch (kind) {
    case SystemKind::torus_linear: return {"alpha1", "alpha2"};
    case SystemKind::torus_skew: return {"alpha1", "alpha2", "beta"};
    case SystemKind::lorenz63: return {"sigma", "rho", "beta"};
  }
  return {};
}

SystemSpec default_spec(SystemKind kind) {
  switch (kind) {
    case SystemKind::torus_linear: return SystemSpec::torus_linear(1.0, std::sqrt(30.0));
    case SystemKind::torus_skew: return SystemSpec::torus_skew(1.0, std::sqrt(30.0), 0.5);
    case SystemKind::lorenz63: return SystemSpec::lorenz63();
  }
  return {};
}

}  // namespace

json encode(const SystemSpec& spec) {
  json params = json::object();
  for (const auto& name : param_names(spec.kind)) params[name] = spec.param(name);
  json state = json::array();
  for (Index i = 0; i < spec.initial_state.size(); ++i) state.push_back(spec.initial_state[i]);
  return json{{"kind", to_string(spec.kind)},
              {"params", params},
              {"observation",
               {{"kind", to_string(spec.observation.kind)}, {"radius", spec.observation.radius}}},
              {"initial_state", state},
              {"spinup_time", spec.spinup_time}};
}

SystemSpec decode_system(ObjectReader reader) {
  const std::string kind_name = reader.string("kind", "torus_linear");
  const SystemKind kind =
      as_validation(reader.key_path("kind"), [&] { return parse_system_kind(kind_name); });
  SystemSpec spec = default_spec(kind);

  if (reader.has("params")) {
    ObjectReader params = reader.object("params");
    for (const auto& name : param_names(kind))
      if (params.has(name)) spec.params[name] = params.number(name);
    params.finish();
  }
  if (reader.has("observation")) {
    ObjectReader obs = reader.object("observation");
    const std::string obs_name = obs.string("kind", to_string(spec.observation.kind));
    spec.observation.kind = as_validation(obs.key_path("kind"),
                                          [&] { return parse_observation_kind(obs_name); });
    spec.observation.radius = obs.number("radius", spec.observation.radius);
    obs.finish();
  }
  if (reader.has("initial_state")) {
    const auto values = reader.numbers("initial_state", {});
    spec.initial_state = Eigen::Map<const RealVector>(values.data(),
                                                      static_cast<Index>(values.size()));
  }
  spec.spinup_time = reader.number("spinup_time", spec.spinup_time);
  reader.finish();
  as_validation("system", [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

json encode(const KernelConfig& config) {
  return json{{"bandwidth_mode", to_string(config.bandwidth_mode)},
              {"knn", config.knn},
              {"epsilon", config.epsilon ? json(*config.epsilon) : json(nullptr)},
              {"epsilon_grid",
               {{"base", config.epsilon_grid.base},
                {"min_exponent", config.epsilon_grid.min_exponent},
                {"max_exponent", config.epsilon_grid.max_exponent},
                {"step", config.epsilon_grid.step}}},
              {"tuning_max_pairs", config.tuning_max_pairs},
              {"retain_factor_max_n", config.retain_factor_max_n}};
}

KernelConfig decode_kernel(ObjectReader& reader) {
  KernelConfig config;
  const std::string mode = reader.string("bandwidth_mode", to_string(config.bandwidth_mode));
  config.bandwidth_mode = as_validation(reader.key_path("bandwidth_mode"),
                                        [&] { return parse_bandwidth_mode(mode); });
  config.knn = reader.integer("knn", config.knn);
  config.epsilon = reader.optional_number("epsilon", config.epsilon);
  if (reader.has("epsilon_grid")) {
    ObjectReader grid = reader.object("epsilon_grid");
    config.epsilon_grid.base = grid.number("base", config.epsilon_grid.base);
    config.epsilon_grid.min_exponent = grid.number("min_exponent", config.epsilon_grid.min_exponent);
    config.epsilon_grid.max_exponent = grid.number("max_exponent", config.epsilon_grid.max_exponent);
    config.epsilon_grid.step = grid.number("step", config.epsilon_grid.step);
    grid.finish();
  }
  config.tuning_max_pairs = reader.integer("tuning_max_pairs", config.tuning_max_pairs);
  config.retain_factor_max_n = reader.integer("retain_factor_max_n", config.retain_factor_max_n);
  return config;
}

json encode(const SpectralConfig& config) {
  return json{{"z", config.z},
              {"tau", config.tau},
              {"L", config.L},
              {"M", config.M},
              {"Q", config.Q},
              {"T_ell", config.T_ell},
              {"mode", to_string(config.mode)},
              {"clip_shift_singular_values", config.clip_shift_singular_values}};
}

SpectralConfig decode_spectral(ObjectReader& reader, double T_c) {
  SpectralConfig config;
  config.z = reader.number("z", config.z);
  config.tau = reader.number("tau", config.tau);
  config.L = reader.integer("L", config.L);
  config.M = reader.integer("M", config.M);
  config.Q = reader.integer("Q", config.Q);
  config.T_ell = reader.number("T_ell", config.T_ell);
  const std::string mode = reader.string("mode", to_string(config.mode));
  config.mode =
      as_validation(reader.key_path("mode"), [&] { return parse_resolvent_mode(mode); });
  config.clip_shift_singular_values =
      reader.boolean("clip_shift_singular_values", config.clip_shift_singular_values);
  config.T_c = T_c;
  return config;
}

json encode(const InvariantReport& r) {
  return json{{"generator_skew_defect", r.generator_skew_defect},
              {"eigenvalue_pairing", r.eigenvalue_pairing},
              {"eigenvector_pairing", r.eigenvector_pairing},
              {"circle_defect", r.circle_defect},
              {"orthonormality_defect", r.orthonormality_defect},
              {"resolvent_identity", r.resolvent_identity},
              {"polar_reconstruction", r.polar_reconstruction},
              {"sqrt_reconstruction", r.sqrt_reconstruction},
              {"passes_1e-10", r.passes()}};
}

InvariantReport decode_invariants(ObjectReader reader) {
  InvariantReport r;
  r.generator_skew_defect = reader.number("generator_skew_defect", 0.0);
  r.eigenvalue_pairing = reader.number("eigenvalue_pairing", 0.0);
  r.eigenvector_pairing = reader.number("eigenvector_pairing", 0.0);
  r.circle_defect = reader.number("circle_defect", 0.0);
  r.orthonormality_defect = reader.number("orthonormality_defect", 0.0);
  r.resolvent_identity = reader.number("resolvent_identity", 0.0);
  r.polar_reconstruction = reader.number("polar_reconstruction", 0.0);
  r.sqrt_reconstruction = reader.number("sqrt_reconstruction", 0.0);
  return r;
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::validation, origin + ": " + e.what());
  }
}

}  // namespace koopgen::detail
