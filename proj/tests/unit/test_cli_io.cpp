#include <filesystem>
#include <string>

#include <doctest.h>

#include "koopgen/config.hpp"
#include "koopgen/errors.hpp"
#include "koopgen/io.hpp"
#include "koopgen/reproduce.hpp"

using namespace koopgen;
namespace fs = std::filesystem;

namespace {

std::string validation_message(const std::string& doc) {
  try {
    validate_config(doc);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
    return e.what();
  }
  FAIL("document was accepted");
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("koopgen_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli_io") {

TEST_CASE("config validation") {
  const auto m = validation_message(R"({"kernel": {"L": 20}, "spectral": {"L": 20, "M": 40}})");
  CHECK(m.find("M ≤ L") != std::string::npos);
  CHECK(m.find("spectral.M") != std::string::npos);

  CHECK(validation_message(R"({"spectral": {"tau": 0}})").find("spectral.tau") != std::string::npos);
  CHECK(validation_message(R"({"spectral": {"tau": 0}})").find("τ > 0") != std::string::npos);
  CHECK(validation_message(R"({"spectral": {"zz": 1}})").find("spectral.zz") != std::string::npos);
  CHECK(validation_message(R"({"data": {"delta_t": "fast"}})").find("data.delta_t") !=
        std::string::npos);
  CHECK(validation_message(R"({"spectral": {"Q": 7}})").find("spectral.Q") != std::string::npos);
  CHECK(validation_message(R"({"analysis": {"T_c": 1000}})").find("analysis.T_c") !=
        std::string::npos);
  validation_message("{not json");
}

TEST_CASE("canonical form") {
  const RunConfig c = validate_config("{}");
  CHECK(c == RunConfig{});
  const std::string canon = serialize_config(c);
  for (const char* key : {"\"system\"", "\"alpha2\"", "\"data\"", "\"delta_t\"", "\"n_samples\"",
                          "\"kernel\"", "\"knn\"", "\"epsilon\"", "\"epsilon_grid\"", "\"L\"",
                          "\"spectral\"", "\"tau\"", "\"M\"", "\"Q\"", "\"T_ell\"", "\"mode\"",
                          "\"clip_shift_singular_values\"", "\"analysis\"", "\"T_c\"",
                          "\"observables\"", "\"max_lag\"", "\"paths\"", "\"seed\""})
    CHECK_MESSAGE(canon.find(key) != std::string::npos, key);

  CHECK(serialize_config(validate_config(canon)) == canon);

  const RunConfig l63 = plan_experiment(Experiment::l63, Scale::desk).config;
  const auto text = serialize_config(l63);
  CHECK(validate_config(text) == l63);
  CHECK(serialize_config(validate_config(text)) == text);

  RunConfig odd;
  odd.spectral.mode = ResolventMode::multi_step;
  odd.kernel.epsilon = 0.75;
  odd.spectral.T_c = 10.0 / 3.0;
  odd.seed = 42;
  CHECK(validate_config(serialize_config(odd)) == odd);
}

TEST_CASE("format and csv") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
    CHECK(std::stod(format_double(v)) == v);
  const auto dir = scratch("csv");
  RealMatrix m(3, 2);
  m << 1.0 / 3, -0.0491, 7, 1e-17, 2, 3;
  write_csv(dir / "m.csv", {"a", "b"}, m);
  const auto t = read_csv(dir / "m.csv");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  CHECK((t.values.array() == m.array()).all());
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(t.column("c"), Error);
  CHECK(file_checksum(dir / "m.csv").size() == 16);
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), Error);
}

TEST_CASE("artifact round trips") {
  const auto dir = scratch("artifacts");
  const auto data =
      generate_trajectory(SystemSpec::torus_linear(1.0, std::sqrt(30.0)), 0.0491, 601);
  write_trajectory(dir / "data", data);
  const auto back = read_trajectory(dir / "data");
  CHECK((back.samples.array() == data.samples.array()).all());
  CHECK((back.states.array() == data.states.array()).all());
  CHECK(back.delta_t == data.delta_t);
  CHECK(back.spec.kind == data.spec.kind);
  CHECK(read_trajectory(dir / "data" / "trajectory.csv").n_samples() == 601);

  const auto basis = compute_basis(data.samples, KernelConfig{}, 24);
  write_basis(dir / "basis", basis, dir / "data");
  const auto rb = read_basis(dir / "basis");
  CHECK((rb.lambdas.array() == basis.lambdas.array()).all());
  CHECK((rb.etas.array() == basis.etas.array()).all());
  CHECK((rb.phi.array() == basis.phi.array()).all());
  CHECK(rb.epsilon_used == basis.epsilon_used);
  const auto eig = read_csv(dir / "basis" / "eigenvalues.csv");
  CHECK(eig.header == std::vector<std::string>{"j", "lambda", "eta"});
  CHECK(read_csv(dir / "basis" / "basis.csv").header.back() == "phi24");

  SpectralConfig cfg;
  cfg.L = 24;
  cfg.M = 6;
  cfg.Q = 200;
  cfg.T_ell = 200 * 0.0491;
  cfg.T_c = 9.82;
  const auto res = run_pipeline(basis, 0.0491, cfg);
  write_spectrum(dir / "spectrum", res, 0.0491);
  const auto rs = read_spectrum(dir / "spectrum");
  CHECK((rs.e.array() == res.e.array()).all());
  CHECK((rs.omega.array() == res.omega.array()).all());
  CHECK((rs.theta.array() == res.theta.array()).all());
  CHECK((rs.psi.array() == res.psi.array()).all());
  CHECK((rs.V.array() == res.V.array()).all());
  CHECK((rs.q_coeffs.array() == res.q_coeffs.array()).all());
  CHECK(rs.config.M == 6);
  CHECK(rs.config.T_c == cfg.T_c);
  const auto spec = read_csv(dir / "spectrum" / "spectrum.csv");
  CHECK(spec.header ==
        std::vector<std::string>{"j", "e", "theta_re", "theta_im", "omega"});
  CHECK(spec.values.rows() == 13);
  CHECK(spec.values(0, 0) == 0.0);
  CHECK(spec.values(0, 4) == 0.0);
  const auto ef = read_csv(dir / "spectrum" / "eigenfunctions.csv");
  CHECK(ef.values.rows() == 601);
  CHECK(ef.header.size() == 26);
  CHECK(read_csv(dir / "spectrum" / "generator.csv").values.cols() == 48);

  // identical inputs give identical bytes
  write_spectrum(dir / "spectrum2", run_pipeline(basis, 0.0491, cfg), 0.0491);
  CHECK(read_text(dir / "spectrum" / "spectrum.csv") == read_text(dir / "spectrum2" / "spectrum.csv"));
}

TEST_CASE("experiment plans") {
  const auto a1 = plan_experiment(Experiment::torus_r4, Scale::desk);
  CHECK(a1.thresholds.targets.size() == 3);
  CHECK(a1.thresholds.targets[1] == doctest::Approx(5.4772).epsilon(1e-4));
  CHECK(a1.config.spectral.L == 101);
  CHECK(a1.config.spectral.M == 33);
  const auto s4 = plan_experiment(Experiment::skew_r4, Scale::desk);
  CHECK(s4.thresholds.targets == a1.thresholds.targets);
  CHECK(s4.config.spectral.L == 800);
  const auto l63 = plan_experiment(Experiment::l63, Scale::desk);
  CHECK(l63.thresholds.targets.empty());
  CHECK(l63.tau_candidates.size() == 3);
  CHECK(l63.config.data.delta_t == 0.01);
  CHECK(parse_experiment("skew_r3") == Experiment::skew_r3);
  CHECK_THROWS_AS(parse_experiment("pendulum"), Error);

  std::vector<EigenpairScore> scores{{0, 0.0, 0.0, 0}, {3, 1.001, 0.1, 1}, {-3, -1.001, 0.1, 2},
                                     {1, 0.999, 0.05, 3}, {2, 5.6, 0.3, 4}};
  Thresholds th;
  th.targets = {1.0, 5.4772};
  th.omega_rel_tol = 0.005;
  th.epsilon_max = 0.2;
  const auto m = match_targets(scores, th);
  CHECK(m[0].index == 1);
  CHECK(m[0].frequency_ok);
  CHECK(m[0].epsilon_ok);
  CHECK(m[1].index == 2);
  CHECK_FALSE(m[1].frequency_ok);
}

}
