#include "koopgen/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "koopgen/errors.hpp"

namespace koopgen {

using detail::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<Index>(i);
  fail(ErrorKind::input, "column '" + name + "' not found");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::input, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorKind::input, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::input, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view text, const fs::path& path, std::size_t line) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  require(res.ec == std::errc() && res.ptr == text.data() + text.size(), ErrorKind::input,
          path.string() + ":" + std::to_string(line) + ": not a number '" + std::string(text) +
              "'");
  return v;
}

json read_json(const fs::path& path) { return detail::parse_json(read_text(path), path.string()); }

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::vector<std::string> numbered(const std::string& prefix, Index first, Index count) {
  std::vector<std::string> out;
  for (Index i = 0; i < count; ++i) out.push_back(prefix + std::to_string(first + i));
  return out;
}

/// Interleaved re/im columns.
RealMatrix interleave(const ComplexMatrix& m) {
  RealMatrix out(m.rows(), 2 * m.cols());
  for (Index c = 0; c < m.cols(); ++c) {
    out.col(2 * c) = m.col(c).real();
    out.col(2 * c + 1) = m.col(c).imag();
  }
  return out;
}

ComplexMatrix deinterleave(const RealMatrix& m, Index first_col = 0) {
  const Index cols = (m.cols() - first_col) / 2;
  ComplexMatrix out(m.rows(), cols);
  for (Index c = 0; c < cols; ++c) {
    out.col(c).real() = m.col(first_col + 2 * c);
    out.col(c).imag() = m.col(first_col + 2 * c + 1);
  }
  return out;
}

RealVector json_vector(const json& array) {
  RealVector out(static_cast<Index>(array.size()));
  for (std::size_t i = 0; i < array.size(); ++i) out[static_cast<Index>(i)] = array[i].get<double>();
  return out;
}

json vector_json(const RealVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  const std::string text = read_text(path);
  CsvTable table;
  std::vector<double> values;
  std::size_t pos = 0, line_no = 0;
  Index rows = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split(line);
    if (table.header.empty()) {
      for (auto f : fields) table.header.emplace_back(f);
      continue;
    }
    require(fields.size() == table.header.size(), ErrorKind::input,
            path.string() + ":" + std::to_string(line_no) + ": expected " +
                std::to_string(table.header.size()) + " fields, found " +
                std::to_string(fields.size()));
    for (auto f : fields) values.push_back(parse_double(f, path, line_no));
    ++rows;
  }
  require(!table.header.empty(), ErrorKind::input, path.string() + ": empty file");
  const auto cols = static_cast<Index>(table.header.size());
  table.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(values.data(), rows, cols);
  return table;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const RealMatrix& values) {
  require(static_cast<Index>(header.size()) == values.cols(), ErrorKind::input,
          "csv header does not match column count");
  std::string out;
  out.reserve(static_cast<std::size_t>(values.size()) * 24 + 256);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      if (c) out += ',';
      out += format_double(values(r, c));
    }
    out += '\n';
  }
  write_text(path, out);
}

std::string file_checksum(const fs::path& path) {
  const std::string text = read_text(path);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

fs::path trajectory_csv_path(const fs::path& path) {
  return fs::is_directory(path) ? path / "trajectory.csv" : path;
}

void write_trajectory(const fs::path& dir, const TrajectoryDataset& data) {
  fs::create_directories(dir);
  const Index n = data.n_samples();
  RealVector t(n);
  for (Index i = 0; i < n; ++i) t[i] = static_cast<double>(i) * data.delta_t;

  std::vector<std::string> header{"t"};
  for (const auto& name : numbered("y", 1, data.dim())) header.push_back(name);
  RealMatrix table(n, data.dim() + 1);
  table << t, data.samples;
  write_csv(dir / "trajectory.csv", header, table);

  if (data.states.rows() == n) {
    std::vector<std::string> state_header{"t"};
    for (const auto& name : numbered("x", 1, data.states.cols())) state_header.push_back(name);
    RealMatrix states(n, data.states.cols() + 1);
    states << t, data.states;
    write_csv(dir / "state.csv", state_header, states);
  }

  json meta{{"system", detail::encode(data.spec)},
            {"delta_t", data.delta_t},
            {"n_samples", n},
            {"requested_samples", data.requested_samples},
            {"reduced_to_odd", data.reduced_to_odd()},
            {"dim", data.dim()},
            {"columns", header}};
  write_json(dir / "trajectory.meta.json", meta);
}

TrajectoryDataset read_trajectory(const fs::path& path) {
  const fs::path csv = trajectory_csv_path(path);
  const CsvTable table = read_csv(csv);
  require(table.header.size() >= 2 && table.header[0] == "t", ErrorKind::input,
          csv.string() + ": expected header t,y1,...");
  TrajectoryDataset data;
  data.samples = table.values.rightCols(table.values.cols() - 1);
  require(data.n_samples() >= 3, ErrorKind::input, csv.string() + ": need at least 3 samples");
  require(data.samples.allFinite(), ErrorKind::input, csv.string() + ": non-finite samples");
  data.delta_t = table.values(1, 0) - table.values(0, 0);
  data.requested_samples = data.n_samples();

  const fs::path meta_path = csv.parent_path() / "trajectory.meta.json";
  if (fs::exists(meta_path)) {
    const json meta = read_json(meta_path);
    data.delta_t = meta.at("delta_t").get<double>();
    data.requested_samples = meta.value("requested_samples", data.n_samples());
    data.spec = detail::decode_system(detail::ObjectReader(meta.at("system"), "system"));
  }
  const fs::path state_path = csv.parent_path() / "state.csv";
  if (fs::exists(state_path)) {
    const CsvTable states = read_csv(state_path);
    if (states.values.rows() == data.n_samples())
      data.states = states.values.rightCols(states.values.cols() - 1);
  }
  require(data.delta_t > 0.0, ErrorKind::input, csv.string() + ": non-increasing time column");
  return data;
}

void write_basis(const fs::path& dir, const KernelBasis& basis, const fs::path& data_path) {
  fs::create_directories(dir);
  const Index L = basis.size();
  RealMatrix eig(L + 1, 3);
  for (Index j = 0; j <= L; ++j) eig.row(j) << static_cast<double>(j), basis.lambdas[j], basis.etas[j];
  write_csv(dir / "eigenvalues.csv", {"j", "lambda", "eta"}, eig);
  write_csv(dir / "basis.csv", numbered("phi", 0, L + 1), basis.phi);
  write_csv(dir / "bandwidths.csv", {"sigma"}, basis.sigma);

  json checksums{{"basis.csv", file_checksum(dir / "basis.csv")},
                 {"eigenvalues.csv", file_checksum(dir / "eigenvalues.csv")}};
  if (!data_path.empty()) checksums["data"] = file_checksum(trajectory_csv_path(data_path));
  json meta{{"epsilon", basis.epsilon_used},
            {"bandwidth_mode", to_string(basis.bandwidth_mode)},
            {"knn", basis.knn},
            {"sigma_scale", basis.sigma_scale},
            {"L", L},
            {"n_samples", basis.n_samples()},
            {"data", data_path.empty() ? json(nullptr) : json(data_path.string())},
            {"checksums", checksums}};
  write_json(dir / "kernel.meta.json", meta);
}

KernelBasis read_basis(const fs::path& dir) {
  const CsvTable eig = read_csv(dir / "eigenvalues.csv");
  const CsvTable phi = read_csv(dir / "basis.csv");
  KernelBasis basis;
  basis.lambdas = eig.values.col(eig.column("lambda"));
  basis.etas = eig.values.col(eig.column("eta"));
  basis.phi = phi.values;
  require(basis.phi.cols() == basis.lambdas.size(), ErrorKind::input,
          dir.string() + ": basis.csv and eigenvalues.csv disagree on L");
  if (fs::exists(dir / "bandwidths.csv")) basis.sigma = read_csv(dir / "bandwidths.csv").values.col(0);
  const fs::path meta_path = dir / "kernel.meta.json";
  if (fs::exists(meta_path)) {
    const json meta = read_json(meta_path);
    basis.epsilon_used = meta.at("epsilon").get<double>();
    basis.bandwidth_mode = parse_bandwidth_mode(meta.at("bandwidth_mode").get<std::string>());
    basis.knn = meta.at("knn").get<Index>();
    basis.sigma_scale = meta.at("sigma_scale").get<double>();
  }
  return basis;
}

void write_spectrum(const fs::path& dir, const SpectralResult& result, double delta_t) {
  fs::create_directories(dir);
  const Index m2 = result.pair_count();
  const double z = result.config.z;

  RealMatrix spectrum(m2 + 1, 5);
  spectrum.row(0) << 0.0, 1.0 / z, 1.0 / z, 0.0, 0.0;
  std::vector<std::string> psi_header{"psi0_re", "psi0_im"};
  for (Index c = 0; c < m2; ++c) {
    const Index j = result.label(c);
    spectrum.row(c + 1) << static_cast<double>(j), result.e[c], result.theta[c].real(),
        result.theta[c].imag(), result.omega[c];
    psi_header.push_back("psi" + std::to_string(j) + "_re");
    psi_header.push_back("psi" + std::to_string(j) + "_im");
  }
  write_csv(dir / "spectrum.csv", {"j", "e", "theta_re", "theta_im", "omega"}, spectrum);

  RealMatrix psi(result.psi.rows(), 2 * m2 + 2);
  psi.col(0).setOnes();
  psi.col(1).setZero();
  psi.rightCols(2 * m2) = interleave(result.psi);
  write_csv(dir / "eigenfunctions.csv", psi_header, psi);

  std::vector<std::string> coeff_header;
  for (Index c = 0; c < m2; ++c) {
    const std::string j = std::to_string(result.label(c));
    coeff_header.push_back("q" + j + "_re");
    coeff_header.push_back("q" + j + "_im");
  }
  write_csv(dir / "coefficients.csv", coeff_header, interleave(result.q_coeffs));

  std::vector<std::string> gen_header;
  for (Index c = 0; c < result.V.cols(); ++c) {
    gen_header.push_back("re" + std::to_string(c + 1));
    gen_header.push_back("im" + std::to_string(c + 1));
  }
  write_csv(dir / "generator.csv", gen_header, interleave(result.V));

  json config = detail::encode(result.config);
  config["T_c"] = result.config.T_c;
  json meta{{"config", config},
            {"delta_t", delta_t},
            {"n_samples", result.psi.rows()},
            {"lambdas_tau", vector_json(result.lambdas_tau)},
            {"invariants", detail::encode(result.invariants)},
            {"checksums", {{"spectrum.csv", file_checksum(dir / "spectrum.csv")}}}};
  write_json(dir / "spectrum.meta.json", meta);
}

SpectralResult read_spectrum(const fs::path& dir) {
  const json meta = read_json(dir / "spectrum.meta.json");
  detail::ObjectReader config_reader(meta.at("config"), "config");
  const double T_c = config_reader.number("T_c");
  SpectralResult result;
  result.config = detail::decode_spectral(config_reader, T_c);
  result.invariants =
      detail::decode_invariants(detail::ObjectReader(meta.at("invariants"), "invariants"));
  result.lambdas_tau = json_vector(meta.at("lambdas_tau"));

  const CsvTable spectrum = read_csv(dir / "spectrum.csv");
  const Index m2 = spectrum.values.rows() - 1;
  require(m2 >= 0 && m2 % 2 == 0, ErrorKind::input, dir.string() + ": malformed spectrum.csv");
  const auto rows = spectrum.values.bottomRows(m2);
  result.e = rows.col(spectrum.column("e"));
  result.omega = rows.col(spectrum.column("omega"));
  result.theta.resize(m2);
  result.theta.real() = rows.col(spectrum.column("theta_re"));
  result.theta.imag() = rows.col(spectrum.column("theta_im"));

  const CsvTable psi = read_csv(dir / "eigenfunctions.csv");
  result.psi = deinterleave(psi.values, 2);
  result.q_coeffs = deinterleave(read_csv(dir / "coefficients.csv").values);
  result.V = deinterleave(read_csv(dir / "generator.csv").values);
  require(result.psi.cols() == m2 && result.q_coeffs.cols() == m2, ErrorKind::input,
          dir.string() + ": spectrum files disagree on the number of eigenpairs");
  return result;
}

void write_scores(const fs::path& path, const std::vector<EigenpairScore>& scores) {
  RealMatrix table(static_cast<Index>(scores.size()), 4);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    table.row(static_cast<Index>(i)) << static_cast<double>(s.index), s.omega, s.epsilon_Tc,
        static_cast<double>(s.rank);
  }
  write_csv(path, {"j", "omega", "eps_Tc", "rank"}, table);
}

void write_autocorrelation(const fs::path& path, const AutocorrelationReport& report) {
  const Index n = report.lags.size();
  RealMatrix table(n, 5);
  table.col(0) = report.lags;
  table.col(1) = report.empirical.real();
  table.col(2) = report.empirical.imag();
  table.col(3) = report.reconstructed.real();
  table.col(4) = report.reconstructed.imag();
  write_csv(path, {"t", "emp_re", "emp_im", "rec_re", "rec_im"}, table);
}

}  // namespace koopgen
