#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "koopgen/analysis.hpp"
#include "koopgen/config.hpp"
#include "koopgen/dynamics.hpp"
#include "koopgen/kernel_basis.hpp"
#include "koopgen/spectral.hpp"

namespace koopgen {

enum class Experiment { torus_r4, torus_r3, skew_r4, skew_r3, l63 };
enum class Scale { desk, paper };

std::string to_string(Experiment e);
std::string to_string(Scale s);
Experiment parse_experiment(const std::string& name);
Scale parse_scale(const std::string& name);

/// Pass criteria for one experiment.
struct Thresholds {
  std::vector<double> targets;     // reference frequencies; empty for l63
  double omega_rel_tol = 0.0;      // every target must be matched within this
  double epsilon_max = 0.0;        // eps_Tc bound for matched targets / leading pair
  int epsilon_required = 0;        // how many targets must also satisfy epsilon_max
  double band_low = 0.0;           // l63: leading |omega| band
  double band_high = 0.0;
};

struct ExperimentPlan {
  Experiment experiment = Experiment::torus_r4;
  Scale scale = Scale::desk;
  RunConfig config;
  std::vector<double> tau_candidates;  // a single entry disables tuning
  Thresholds thresholds;
  std::vector<std::string> reductions;  // departures from the full-scale setup
};

ExperimentPlan plan_experiment(Experiment experiment, Scale scale);

struct TargetMatch {
  double reference = 0.0;
  Index index = 0;  // signed pair label, 0 when nothing was found
  double omega = 0.0;
  double relative_error = 0.0;
  double epsilon_Tc = 0.0;
  bool frequency_ok = false;
  bool epsilon_ok = false;
};

struct TauTrial {
  double tau = 0.0;
  double leading_omega = 0.0;
  double leading_epsilon = 0.0;
};

struct ExperimentOutcome {
  ExperimentPlan plan;
  TrajectoryDataset data;
  KernelBasis basis;
  SpectralResult result;  // at the selected tau
  std::vector<EigenpairScore> scores;
  std::vector<TauTrial> tau_trials;
  std::vector<TargetMatch> matches;
  std::vector<AutocorrelationReport> autocorrelations;
  double seconds_data = 0.0, seconds_basis = 0.0, seconds_spectrum = 0.0, seconds_analysis = 0.0;
  bool passed = false;
  std::vector<std::string> failures;
};

/// Best candidate per target: within tolerance and lowest eps_Tc if any, else
/// the closest frequency. Only positive frequencies are considered.
std::vector<TargetMatch> match_targets(const std::vector<EigenpairScore>& scores,
                                       const Thresholds& thresholds);

/// Applies the plan's criteria to a finished run and fills passed/failures.
void evaluate(ExperimentOutcome& outcome);

/// Runs data -> basis -> spectrum (with tau selection) -> analysis. Artifacts
/// and report.json are written under `out_dir` when given.
ExperimentOutcome run_experiment(const ExperimentPlan& plan,
                                 const std::optional<std::filesystem::path>& out_dir = {});

/// JSON text of report.json.
std::string report_json(const ExperimentOutcome& outcome);

/// `scores.csv`, `autocorr_<obs>.csv` and `analysis.meta.json`.
void write_analysis(const std::filesystem::path& dir, const std::vector<EigenpairScore>& scores,
                    const std::vector<AutocorrelationReport>& reports, double T_c,
                    double delta_t);

/// Autocorrelation reports for trajectory columns named y1..yd.
std::vector<AutocorrelationReport> autocorrelations(const TrajectoryDataset& data,
                                                    const SpectralResult& result,
                                                    const std::vector<std::string>& observables,
                                                    Index max_lag);

/// Top-k nonconstant eigenfunction traces and state scatter data for plotting.
void export_figure_data(const std::filesystem::path& out_dir, const TrajectoryDataset& data,
                        const SpectralResult& result, const std::vector<EigenpairScore>& scores,
                        Index top_k = 6);

}  // namespace koopgen
