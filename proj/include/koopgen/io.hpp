#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "koopgen/analysis.hpp"
#include "koopgen/dynamics.hpp"
#include "koopgen/kernel_basis.hpp"
#include "koopgen/spectral.hpp"

namespace koopgen {

namespace fs = std::filesystem;

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  RealMatrix values;

  Index column(const std::string& name) const;  // input error when absent
};

CsvTable read_csv(const fs::path& path);
void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const RealMatrix& values);

/// 64-bit FNV-1a of the file contents, as 16 hex digits.
std::string file_checksum(const fs::path& path);

// Trajectories: `trajectory.csv` (t,y1..yd), `state.csv` (t,x1..xs) and
// `trajectory.meta.json` in `dir`.
void write_trajectory(const fs::path& dir, const TrajectoryDataset& data);
/// Accepts either the directory or the csv file itself; the sidecar meta file is
/// read when present.
TrajectoryDataset read_trajectory(const fs::path& path);
fs::path trajectory_csv_path(const fs::path& path);

// Basis: `eigenvalues.csv` (j,lambda,eta), `basis.csv` (phi0..phiL),
// `bandwidths.csv` (sigma) and `kernel.meta.json`.
void write_basis(const fs::path& dir, const KernelBasis& basis, const fs::path& data_path = {});
/// Restores lambdas, etas, phi, sigma and the scalar kernel parameters.
KernelBasis read_basis(const fs::path& dir);

// Spectrum: `spectrum.csv`, `eigenfunctions.csv`, `coefficients.csv`,
// `generator.csv` and `spectrum.meta.json`. Row/column j = 0 is the constant pair.
void write_spectrum(const fs::path& dir, const SpectralResult& result, double delta_t);
/// Restores config, e, theta, omega, q_coeffs, psi, V and the invariant report.
SpectralResult read_spectrum(const fs::path& dir);

void write_scores(const fs::path& path, const std::vector<EigenpairScore>& scores);
void write_autocorrelation(const fs::path& path, const AutocorrelationReport& report);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace koopgen
