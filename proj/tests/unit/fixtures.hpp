#pragma once

#include <cmath>

#include "koopgen/dynamics.hpp"
#include "koopgen/kernel_basis.hpp"
#include "koopgen/spectral.hpp"

namespace fixtures {

// Flat-torus run at the desk configuration, built once per process.
struct TorusRun {
  koopgen::TrajectoryDataset data;
  koopgen::KernelBasis basis;
  koopgen::SpectralResult result;
};

inline const TorusRun& torus_run() {
  static const TorusRun run = [] {
    using namespace koopgen;
    TorusRun r;
    r.data = generate_trajectory(SystemSpec::torus_linear(1.0, std::sqrt(30.0)), 0.0491, 4098);
    r.basis = compute_basis(r.data.samples, KernelConfig{}, 101);
    SpectralConfig cfg;
    cfg.T_ell = cfg.Q * 0.0491;
    r.result = run_pipeline(r.basis, 0.0491, cfg);
    return r;
  }();
  return run;
}

}  // namespace fixtures
