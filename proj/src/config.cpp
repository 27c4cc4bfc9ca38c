#include "koopgen/config.hpp"

#include <cmath>

#include "json_codec.hpp"
#include "koopgen/errors.hpp"

namespace koopgen {

using detail::json;
using detail::ObjectReader;

namespace {

void check(bool ok, const std::string& key, const std::string& message) {
  require(ok, ErrorKind::validation, key + ": " + message);
}

}  // namespace

bool RunConfig::operator==(const RunConfig& other) const {
  return serialize_config(*this) == serialize_config(other);
}

void validate_config(const RunConfig& c) {
  detail::as_validation("system", [&] {
    c.system.validate();
    return 0;
  });
  check(c.data.delta_t > 0.0 && std::isfinite(c.data.delta_t), "data.delta_t", "must be > 0");
  check(c.data.n_samples >= 3, "data.n_samples", "must be >= 3");
  check(c.data.l63_substeps >= 1, "data.l63_substeps", "must be >= 1");

  const Index n_odd = c.data.n_samples % 2 == 0 ? c.data.n_samples - 1 : c.data.n_samples;
  check(c.kernel.knn >= 1, "kernel.knn", "must be >= 1");
  check(c.kernel.bandwidth_mode == BandwidthMode::fixed || c.kernel.knn < n_odd, "kernel.knn",
        "must be < N");
  check(!c.kernel.epsilon || *c.kernel.epsilon > 0.0, "kernel.epsilon", "must be > 0 or null");
  check(c.kernel.epsilon_grid.base > 1.0, "kernel.epsilon_grid.base", "must be > 1");
  check(c.kernel.epsilon_grid.step > 0.0, "kernel.epsilon_grid.step", "must be > 0");
  check(c.kernel.epsilon_grid.max_exponent > c.kernel.epsilon_grid.min_exponent,
        "kernel.epsilon_grid.max_exponent", "must exceed min_exponent");
  check(c.kernel.tuning_max_pairs >= 1, "kernel.tuning_max_pairs", "must be >= 1");
  check(c.basis_L >= 1 && c.basis_L < n_odd, "kernel.L", "constraint 1 ≤ L < N violated");

  const SpectralConfig& s = c.spectral;
  check(s.z > 0.0, "spectral.z", "must be > 0");
  check(s.tau > 0.0, "spectral.tau", "τ > 0 required");
  check(s.L >= 1, "spectral.L", "must be >= 1");
  check(s.L <= c.basis_L, "spectral.L", "constraint spectral.L ≤ kernel.L violated (" +
                                            std::to_string(s.L) + " > " +
                                            std::to_string(c.basis_L) + ")");
  check(s.M >= 1, "spectral.M", "must be >= 1");
  check(s.M <= s.L, "spectral.M", "constraint M ≤ L violated (M = " + std::to_string(s.M) +
                                      ", L = " + std::to_string(s.L) + ")");
  check(2 * s.M <= s.L, "spectral.M", "constraint 2M ≤ L violated (M = " + std::to_string(s.M) +
                                          ", L = " + std::to_string(s.L) + ")");
  check(s.Q >= 2 && s.Q % 2 == 0, "spectral.Q", "must be even and >= 2");
  check(s.T_ell > 0.0, "spectral.T_ell", "must be > 0");
  check(s.T_c > 0.0, "analysis.T_c", "must be > 0");
  check(s.T_c <= static_cast<double>(n_odd - 1) * c.data.delta_t / 2.0, "analysis.T_c",
        "must not exceed half the data span");
  check(c.analysis.max_lag >= 0 && c.analysis.max_lag < n_odd, "analysis.max_lag",
        "must satisfy 0 <= max_lag < N");
}

RunConfig validate_config(const std::string& document) {
  const json doc = detail::parse_json(document, "config");
  ObjectReader root(doc, "");
  RunConfig c;

  if (root.has("system")) c.system = detail::decode_system(root.object("system"));
  if (root.has("data")) {
    ObjectReader data = root.object("data");
    c.data.delta_t = data.number("delta_t", c.data.delta_t);
    c.data.n_samples = data.integer("n_samples", c.data.n_samples);
    c.data.l63_substeps = static_cast<int>(data.integer("l63_substeps", c.data.l63_substeps));
    data.finish();
  }
  if (root.has("kernel")) {
    ObjectReader kernel = root.object("kernel");
    c.basis_L = kernel.integer("L", c.basis_L);
    c.kernel = detail::decode_kernel(kernel);
    kernel.finish();
  }
  double T_c = c.spectral.T_c;
  if (root.has("analysis")) {
    ObjectReader analysis = root.object("analysis");
    T_c = analysis.number("T_c", T_c);
    c.analysis.observables = analysis.strings("observables", c.analysis.observables);
    c.analysis.max_lag = analysis.integer("max_lag", c.analysis.max_lag);
    analysis.finish();
  }
  if (root.has("spectral")) {
    ObjectReader spectral = root.object("spectral");
    c.spectral = detail::decode_spectral(spectral, T_c);
    spectral.finish();
  } else {
    c.spectral.T_c = T_c;
  }
  if (root.has("paths")) {
    ObjectReader paths = root.object("paths");
    c.paths.data = paths.string("data", c.paths.data);
    c.paths.basis = paths.string("basis", c.paths.basis);
    c.paths.spectrum = paths.string("spectrum", c.paths.spectrum);
    c.paths.analysis = paths.string("analysis", c.paths.analysis);
    paths.finish();
  }
  if (root.has("seed")) {
    const json& seed = root.raw("seed");
    check(seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<long long>() >= 0),
          "seed", "expected a non-negative integer");
    c.seed = seed.get<std::uint64_t>();
  }
  root.finish();
  validate_config(c);
  return c;
}

std::string serialize_config(const RunConfig& c) {
  json kernel{{"L", c.basis_L}};
  kernel.update(detail::encode(c.kernel));
  json doc{{"system", detail::encode(c.system)},
           {"data",
            {{"delta_t", c.data.delta_t},
             {"n_samples", c.data.n_samples},
             {"l63_substeps", c.data.l63_substeps}}},
           {"kernel", kernel},
           {"spectral", detail::encode(c.spectral)},
           {"analysis",
            {{"T_c", c.spectral.T_c},
             {"observables", c.analysis.observables},
             {"max_lag", c.analysis.max_lag}}},
           {"paths",
            {{"data", c.paths.data},
             {"basis", c.paths.basis},
             {"spectrum", c.paths.spectrum},
             {"analysis", c.paths.analysis}}},
           {"seed", c.seed}};
  return doc.dump(2) + "\n";
}

}  // namespace koopgen
