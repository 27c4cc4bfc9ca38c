#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "koopgen/dynamics.hpp"
#include "koopgen/kernel_basis.hpp"
#include "koopgen/spectral.hpp"

namespace koopgen {

struct DataConfig {
  double delta_t = 0.0491;
  Index n_samples = 4098;
  int l63_substeps = 10;
};

struct AnalysisConfig {
  std::vector<std::string> observables{"y1"};
  Index max_lag = 407;
};

struct PathConfig {
  std::string data = "run/data";
  std::string basis = "run/basis";
  std::string spectrum = "run/spectrum";
  std::string analysis = "run/analysis";
};

/// Every parameter of a gen-data -> compute-basis -> compute-spectrum -> analyze
/// chain. The analysis horizon T_c is stored in spectral.T_c.
struct RunConfig {
  SystemSpec system = SystemSpec::torus_linear(1.0, std::sqrt(30.0));
  DataConfig data;
  KernelConfig kernel;
  Index basis_L = 101;  // number of nonconstant basis functions computed
  SpectralConfig spectral;
  AnalysisConfig analysis;
  PathConfig paths;
  std::uint64_t seed = 0;

  bool operator==(const RunConfig& other) const;
};

/// Parses a JSON document, fills defaults and checks every constraint. Errors
/// are ErrorKind::validation and name the offending key.
RunConfig validate_config(const std::string& document);
/// Constraint checks on an already-built configuration.
void validate_config(const RunConfig& config);

/// Canonical form: every field present, including defaults.
std::string serialize_config(const RunConfig& config);

}  // namespace koopgen
