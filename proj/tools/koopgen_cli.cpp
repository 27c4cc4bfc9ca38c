// koopgen: command-line driver for data generation, kernel basis, spectrum,
// analysis and the end-to-end reproduction runs.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "koopgen/analysis.hpp"
#include "koopgen/config.hpp"
#include "koopgen/dynamics.hpp"
#include "koopgen/errors.hpp"
#include "koopgen/io.hpp"
#include "koopgen/kernel_basis.hpp"
#include "koopgen/linalg.hpp"
#include "koopgen/reproduce.hpp"
#include "koopgen/spectral.hpp"

namespace {

using namespace koopgen;

constexpr int kAcceptanceFailure = 4;

bool g_verbose = false;

void info(const std::string& message) {
  if (g_verbose) std::cerr << "[koopgen] " << message << "\n";
}

Index even_steps(double T_ell, double dt) {
  return 2 * static_cast<Index>(std::lround(T_ell / (2.0 * dt)));
}

struct GenOptions {
  std::optional<std::string> system, obs, out;
  std::optional<double> alpha1, alpha2, beta, radius, dt, spinup;
  std::optional<Index> n;
};

struct BasisOptions {
  std::optional<std::string> data, bandwidth, out;
  std::optional<Index> L, knn;
  std::optional<double> epsilon;
};

struct SpectrumOptions {
  std::optional<std::string> data, basis, mode, out;
  std::optional<double> z, tau, T_ell;
  std::optional<Index> L, M, q_steps;
  bool clip = false;
};

struct AnalyzeOptions {
  std::optional<std::string> data, spectrum, out;
  std::optional<double> T_c;
  std::vector<std::string> observables;
  std::optional<Index> max_lag;
};

struct ReproduceOptions {
  std::string experiment = "torus_r4";
  std::string scale = "desk";
  std::string out = "artifacts";
};

struct ExportOptions {
  std::optional<std::string> data, spectrum, analysis, out;
  Index top = 6;
};

int gen_data(RunConfig& cfg, const GenOptions& o) {
  if (o.system) {
    const SystemKind kind = parse_system_kind(*o.system);
    if (kind != cfg.system.kind) {
      cfg.system = kind == SystemKind::lorenz63   ? SystemSpec::lorenz63()
                   : kind == SystemKind::torus_skew ? SystemSpec::torus_skew(1.0, std::sqrt(30.0), 0.5)
                                                    : SystemSpec::torus_linear(1.0, std::sqrt(30.0));
      if (kind == SystemKind::lorenz63) cfg.data.delta_t = 0.01;
    }
  }
  if (o.alpha1) cfg.system.params["alpha1"] = *o.alpha1;
  if (o.alpha2) cfg.system.params["alpha2"] = *o.alpha2;
  if (o.beta) cfg.system.params["beta"] = *o.beta;
  if (o.obs) cfg.system.observation.kind = parse_observation_kind(*o.obs);
  if (o.radius) cfg.system.observation.radius = *o.radius;
  if (o.spinup) cfg.system.spinup_time = *o.spinup;
  if (o.dt) cfg.data.delta_t = *o.dt;
  if (o.n) cfg.data.n_samples = *o.n;
  if (o.out) cfg.paths.data = *o.out;
  validate_config(cfg);

  const auto start = std::chrono::steady_clock::now();
  const TrajectoryDataset data =
      generate_trajectory(cfg.system, cfg.data.delta_t, cfg.data.n_samples, cfg.data.l63_substeps);
  if (data.reduced_to_odd())
    warn("N reduced from " + std::to_string(data.requested_samples) + " to " +
         std::to_string(data.n_samples()) + " (odd length required by the DFT filter)");
  write_trajectory(cfg.paths.data, data);
  info("wrote " + std::to_string(data.n_samples()) + " samples to " + cfg.paths.data + " in " +
       format_double(std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                         .count()) +
       " s");
  return 0;
}

int compute_basis_cmd(RunConfig& cfg, const BasisOptions& o) {
  if (o.data) cfg.paths.data = *o.data;
  if (o.out) cfg.paths.basis = *o.out;
  if (o.L) cfg.basis_L = *o.L;
  if (o.bandwidth) cfg.kernel.bandwidth_mode = parse_bandwidth_mode(*o.bandwidth);
  if (o.knn) cfg.kernel.knn = *o.knn;
  if (o.epsilon) cfg.kernel.epsilon = *o.epsilon;

  const TrajectoryDataset data = read_trajectory(cfg.paths.data);
  cfg.data.n_samples = data.n_samples();
  cfg.data.delta_t = data.delta_t;
  if (cfg.spectral.L > cfg.basis_L) cfg.spectral.L = cfg.basis_L;
  if (2 * cfg.spectral.M > cfg.spectral.L) cfg.spectral.M = cfg.spectral.L / 2;
  validate_config(cfg);

  const auto start = std::chrono::steady_clock::now();
  const KernelBasis basis = compute_basis(data.samples, cfg.kernel, cfg.basis_L);
  write_basis(cfg.paths.basis, basis, cfg.paths.data);
  info("basis L = " + std::to_string(basis.size()) + ", epsilon = " +
       format_double(basis.epsilon_used) + ", " +
       format_double(std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                         .count()) +
       " s");
  return 0;
}

int compute_spectrum_cmd(RunConfig& cfg, const SpectrumOptions& o) {
  if (o.data) cfg.paths.data = *o.data;
  if (o.basis) cfg.paths.basis = *o.basis;
  if (o.out) cfg.paths.spectrum = *o.out;
  const TrajectoryDataset data = read_trajectory(cfg.paths.data);
  const KernelBasis basis = read_basis(cfg.paths.basis);
  require(basis.n_samples() == data.n_samples(), ErrorKind::input,
          "basis and trajectory have different sample counts");
  cfg.data.n_samples = data.n_samples();
  cfg.data.delta_t = data.delta_t;
  cfg.basis_L = basis.size();

  SpectralConfig& s = cfg.spectral;
  if (o.z) s.z = *o.z;
  if (o.tau) s.tau = *o.tau;
  if (o.L) s.L = *o.L;
  if (o.M) s.M = *o.M;
  if (o.mode) s.mode = parse_resolvent_mode(*o.mode);
  if (o.clip) s.clip_shift_singular_values = true;
  if (o.q_steps) {
    s.Q = *o.q_steps;
    s.T_ell = o.T_ell ? *o.T_ell : static_cast<double>(s.Q) * data.delta_t;
  } else if (o.T_ell) {
    s.T_ell = *o.T_ell;
    s.Q = even_steps(s.T_ell, data.delta_t);
  }
  validate_config(cfg);

  const auto start = std::chrono::steady_clock::now();
  const SpectralResult result = run_pipeline(basis, data.delta_t, s);
  write_spectrum(cfg.paths.spectrum, result, data.delta_t);
  if (!result.invariants.passes())
    warn("structural invariants exceed 1e-10; see spectrum.meta.json");
  info("spectrum with " + std::to_string(result.pair_count()) + " eigenpairs in " +
       format_double(std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                         .count()) +
       " s");
  return 0;
}

int analyze_cmd(RunConfig& cfg, const AnalyzeOptions& o) {
  if (o.data) cfg.paths.data = *o.data;
  if (o.spectrum) cfg.paths.spectrum = *o.spectrum;
  if (o.out) cfg.paths.analysis = *o.out;
  const TrajectoryDataset data = read_trajectory(cfg.paths.data);
  const SpectralResult result = read_spectrum(cfg.paths.spectrum);
  require(result.psi.rows() == data.n_samples(), ErrorKind::input,
          "spectrum and trajectory have different sample counts");
  cfg.data.n_samples = data.n_samples();
  cfg.data.delta_t = data.delta_t;
  cfg.basis_L = std::max(cfg.basis_L, result.config.L);
  cfg.spectral = result.config;
  if (o.T_c) cfg.spectral.T_c = *o.T_c;
  if (!o.observables.empty()) cfg.analysis.observables = o.observables;
  if (o.max_lag) cfg.analysis.max_lag = *o.max_lag;
  validate_config(cfg);

  const auto scores = order_eigenpairs(result, cfg.spectral.T_c, data.delta_t);
  const auto reports =
      autocorrelations(data, result, cfg.analysis.observables, cfg.analysis.max_lag);
  write_analysis(cfg.paths.analysis, scores, reports, cfg.spectral.T_c, data.delta_t);
  if (g_verbose)
    for (std::size_t i = 0; i < scores.size() && i < 7; ++i)
      info("rank " + std::to_string(scores[i].rank) + ": j = " + std::to_string(scores[i].index) +
           ", omega = " + format_double(scores[i].omega) +
           ", eps_Tc = " + format_double(scores[i].epsilon_Tc));
  return 0;
}

int reproduce_cmd(const ReproduceOptions& o) {
  const ExperimentPlan plan = plan_experiment(parse_experiment(o.experiment), parse_scale(o.scale));
  const std::filesystem::path dir = std::filesystem::path(o.out) / (o.experiment + "_" + o.scale);
  info("running " + o.experiment + " (" + o.scale + ") into " + dir.string());
  const ExperimentOutcome outcome = run_experiment(plan, dir);

  std::cout << o.experiment << " (" << o.scale << "): " << (outcome.passed ? "PASS" : "FAIL")
            << "\n";
  for (const auto& m : outcome.matches)
    std::cout << "  target " << format_double(m.reference) << ": omega "
              << format_double(m.omega) << ", rel err " << format_double(m.relative_error)
              << ", eps_Tc " << format_double(m.epsilon_Tc) << "\n";
  if (outcome.matches.empty() && outcome.scores.size() > 1)
    std::cout << "  leading omega " << format_double(outcome.scores[1].omega) << ", eps_Tc "
              << format_double(outcome.scores[1].epsilon_Tc) << ", tau "
              << format_double(outcome.result.config.tau) << "\n";
  for (const auto& f : outcome.failures) std::cout << "  failure: " << f << "\n";
  std::cout << "  report: " << (dir / "report.json").string() << "\n";
  return outcome.passed ? 0 : kAcceptanceFailure;
}

int export_cmd(RunConfig& cfg, const ExportOptions& o) {
  if (o.data) cfg.paths.data = *o.data;
  if (o.spectrum) cfg.paths.spectrum = *o.spectrum;
  const std::string out = o.out ? *o.out : "figures";
  const TrajectoryDataset data = read_trajectory(cfg.paths.data);
  const SpectralResult result = read_spectrum(cfg.paths.spectrum);
  std::vector<EigenpairScore> scores;
  const std::string analysis_dir = o.analysis ? *o.analysis : cfg.paths.analysis;
  if (std::filesystem::exists(std::filesystem::path(analysis_dir) / "scores.csv")) {
    const CsvTable table = read_csv(std::filesystem::path(analysis_dir) / "scores.csv");
    for (Index r = 0; r < table.values.rows(); ++r)
      scores.push_back({static_cast<Index>(table.values(r, table.column("j"))),
                        table.values(r, table.column("omega")),
                        table.values(r, table.column("eps_Tc")),
                        static_cast<Index>(table.values(r, table.column("rank")))});
  } else {
    scores = order_eigenpairs(result, result.config.T_c, data.delta_t);
  }
  export_figure_data(out, data, result, scores, o.top);
  info("figure data written to " + out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Koopman generator spectra from trajectory data via resolvent compactification"};
  app.set_help_all_flag("--help-all", "Expand all help");
  std::string config_path;
  int threads = 0;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "Run configuration (JSON)");
  app.add_option("--threads", threads, "BLAS threads (default: backend choice)");
  app.add_option("--seed", seed, "Seed for surrogate data (no effect on the pipeline)");
  app.add_flag("--verbose,-v", g_verbose, "Progress messages on stderr");
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a sampled trajectory");
  gen_cmd->add_option("--system", gen.system, "torus_linear | torus_skew | lorenz63");
  gen_cmd->add_option("--alpha1", gen.alpha1);
  gen_cmd->add_option("--alpha2", gen.alpha2);
  gen_cmd->add_option("--beta", gen.beta, "Skew coupling, or the Lorenz 63 beta");
  gen_cmd->add_option("--radius", gen.radius, "Tube radius of the R^3 embedding");
  gen_cmd->add_option("--obs", gen.obs, "flat_r4 | embedded_r3 | identity");
  gen_cmd->add_option("--dt", gen.dt, "Sampling interval");
  gen_cmd->add_option("--n", gen.n, "Number of samples (even values lose one)");
  gen_cmd->add_option("--spinup", gen.spinup, "Discarded time before the first sample");
  gen_cmd->add_option("--out", gen.out, "Output directory");

  BasisOptions basis;
  auto* basis_cmd = app.add_subcommand("compute-basis", "Kernel eigenbasis of a trajectory");
  basis_cmd->add_option("--data", basis.data, "Trajectory directory or csv");
  basis_cmd->add_option("--L", basis.L, "Number of nonconstant basis functions");
  basis_cmd->add_option("--bandwidth", basis.bandwidth, "fixed | variable");
  basis_cmd->add_option("--knn", basis.knn, "Neighbors for the variable bandwidth");
  basis_cmd->add_option("--epsilon", basis.epsilon, "Kernel scale (tuned when omitted)");
  basis_cmd->add_option("--out", basis.out, "Output directory");

  SpectrumOptions spec;
  auto* spec_cmd = app.add_subcommand("compute-spectrum", "Generator eigenpairs");
  spec_cmd->add_option("--data", spec.data);
  spec_cmd->add_option("--basis", spec.basis);
  spec_cmd->add_option("--z", spec.z, "Resolvent parameter");
  spec_cmd->add_option("--tau", spec.tau, "Regularization parameter");
  spec_cmd->add_option("--L", spec.L);
  spec_cmd->add_option("--M", spec.M);
  spec_cmd->add_option("--T-ell", spec.T_ell, "Resolvent integration time");
  spec_cmd->add_option("--q-steps", spec.q_steps, "Simpson steps (even)");
  spec_cmd->add_option("--mode", spec.mode, "iterated | multi-step");
  spec_cmd->add_flag("--clip-shift", spec.clip, "Clip shift singular values to 1");
  spec_cmd->add_option("--out", spec.out);

  AnalyzeOptions an;
  auto* an_cmd = app.add_subcommand("analyze", "Pseudospectral scores and autocorrelations");
  an_cmd->add_option("--data", an.data);
  an_cmd->add_option("--spectrum", an.spectrum);
  an_cmd->add_option("--T-c", an.T_c, "Pseudospectral horizon");
  an_cmd->add_option("--observables", an.observables, "Trajectory columns (y1 ...)")
      ->delimiter(',');
  an_cmd->add_option("--max-lag", an.max_lag, "Autocorrelation lags");
  an_cmd->add_option("--out", an.out);

  ReproduceOptions rep;
  auto* rep_cmd = app.add_subcommand("reproduce", "Run a benchmark experiment end to end");
  rep_cmd->add_option("--experiment", rep.experiment, "torus_r4 | torus_r3 | skew_r4 | skew_r3 | l63");
  rep_cmd->add_option("--scale", rep.scale, "desk | paper");
  rep_cmd->add_option("--out", rep.out, "Artifact root");

  ExportOptions ex;
  auto* ex_cmd = app.add_subcommand("export-figures-data", "Figure-ready CSV exports");
  ex_cmd->add_option("--data", ex.data);
  ex_cmd->add_option("--spectrum", ex.spectrum);
  ex_cmd->add_option("--analysis", ex.analysis, "Directory with scores.csv");
  ex_cmd->add_option("--top", ex.top, "Number of eigenfunctions");
  ex_cmd->add_option("--out", ex.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorKind::validation);
  }

  try {
    set_blas_threads(threads);
    RunConfig cfg = config_path.empty() ? RunConfig{} : validate_config(read_text(config_path));
    if (app.count("--seed") > 0) cfg.seed = seed;
    if (*gen_cmd) return gen_data(cfg, gen);
    if (*basis_cmd) return compute_basis_cmd(cfg, basis);
    if (*spec_cmd) return compute_spectrum_cmd(cfg, spec);
    if (*an_cmd) return analyze_cmd(cfg, an);
    if (*rep_cmd) return reproduce_cmd(rep);
    if (*ex_cmd) return export_cmd(cfg, ex);
  } catch (const Error& e) {
    std::cerr << "koopgen: " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "koopgen: " << e.what() << "\n";
    return exit_code(ErrorKind::numerical);
  }
  return 0;
}
