#include "koopgen/spectral.hpp"

#include <algorithm>
#include <cmath>

#define EIGEN_FFTW_DEFAULT
#include <unsupported/Eigen/FFT>

#include "koopgen/errors.hpp"
#include "koopgen/linalg.hpp"

namespace koopgen {

std::string to_string(ResolventMode mode) {
  return mode == ResolventMode::iterated ? "iterated" : "multi-step";
}

ResolventMode parse_resolvent_mode(const std::string& name) {
  if (name == "iterated") return ResolventMode::iterated;
  if (name == "multi-step" || name == "multi_step") return ResolventMode::multi_step;
  fail(ErrorKind::input, "unknown resolvent mode '" + name + "' (iterated | multi-step)");
}

void SpectralConfig::validate() const {
  require(std::isfinite(z) && z > 0.0, ErrorKind::parameter, "z must be > 0");
  require(std::isfinite(tau) && tau > 0.0, ErrorKind::parameter, "tau must be > 0");
  require(L >= 1, ErrorKind::parameter, "L must be >= 1");
  require(M >= 1 && M <= L, ErrorKind::parameter, "M must satisfy 1 <= M <= L");
  require(Q >= 2 && Q % 2 == 0, ErrorKind::parameter, "Q must be even and >= 2");
  require(std::isfinite(T_ell) && T_ell > 0.0, ErrorKind::parameter, "T_ell must be > 0");
  require(std::isfinite(T_c) && T_c > 0.0, ErrorKind::parameter, "T_c must be > 0");
}

void SpectralConfig::validate(double delta_t) const {
  validate();
  require(std::isfinite(delta_t) && delta_t > 0.0, ErrorKind::parameter, "delta_t must be > 0");
  const double implied = static_cast<double>(Q) * delta_t;
  if (std::abs(implied - T_ell) > 0.5 * delta_t + 1e-9 * T_ell)
    warn("T_ell = " + std::to_string(T_ell) + " differs from Q * delta_t = " +
         std::to_string(implied));
}

ComplexVector positive_frequency_filter(const ComplexVector& series) {
  const Index n = series.size();
  require(n >= 3 && n % 2 == 1, ErrorKind::input,
          "positive-frequency filter needs odd N >= 3 (N = " + std::to_string(n) + ")");
  const Index k_max = (n - 1) / 2;
  Eigen::FFT<double> fft;
  ComplexVector spectrum(n);
  fft.fwd(spectrum, series);
  spectrum[0] = 0.0;
  spectrum.segment(k_max + 1, n - k_max - 1).setZero();
  ComplexVector out(n);
  fft.inv(out, spectrum);
  return out;
}

FilteredBasis filter_basis(const RealMatrix& phi, Index L) {
  require(L >= 1 && L < phi.cols(), ErrorKind::input,
          "filter_basis needs 1 <= L < number of basis columns");
  FilteredBasis fb;
  fb.phi_plus.resize(phi.rows(), L);
  for (Index j = 0; j < L; ++j)
    fb.phi_plus.col(j) = positive_frequency_filter(phi.col(j + 1).cast<Complex>());
  return fb;
}

ComplexMatrix shift_matrix(const FilteredBasis& fb, Index q) {
  const ComplexMatrix& phi = fb.phi_plus;
  const Index n = phi.rows();
  require(q >= 0 && q < n, ErrorKind::input, "shift must satisfy 0 <= q < N");
  ComplexMatrix shifted(n, phi.cols());
  shifted.topRows(n - q) = phi.bottomRows(n - q);
  shifted.bottomRows(q) = phi.topRows(q);
  return phi.adjoint() * shifted / static_cast<double>(n);
}

RealVector simpson_weights(Index Q, double delta_t) {
  require(Q >= 2 && Q % 2 == 0, ErrorKind::input, "Simpson rule needs even Q >= 2");
  require(delta_t > 0.0, ErrorKind::input, "delta_t must be > 0");
  RealVector w(Q + 1);
  for (Index q = 0; q <= Q; ++q) w[q] = (q % 2 == 1) ? 4.0 : 2.0;
  w[0] = 1.0;
  w[Q] = 1.0;
  return w * (delta_t / 3.0);
}

namespace {

struct GeometricSum {
  ComplexMatrix sum;    // sum_{k < n} X^k
  ComplexMatrix power;  // X^n
};

GeometricSum geometric_sum(const ComplexMatrix& x, Index n) {
  const Index l = x.rows();
  if (n == 0) return {ComplexMatrix::Zero(l, l), ComplexMatrix::Identity(l, l)};
  if (n % 2 == 1) {
    GeometricSum g = geometric_sum(x, n - 1);
    ComplexMatrix sum = x * g.sum;
    sum.diagonal().array() += 1.0;
    return {std::move(sum), x * g.power};
  }
  GeometricSum g = geometric_sum(x, n / 2);
  return {g.sum + g.power * g.sum, g.power * g.power};
}

ComplexMatrix clip_singular_values(const ComplexMatrix& a) {
  Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  require(svd.info() == Eigen::Success, ErrorKind::numerical, "SVD failed while clipping");
  const RealVector s = svd.singularValues().cwiseMin(1.0);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();
}

ComplexMatrix resolvent_iterated(const FilteredBasis& fb, double z, Index Q, double delta_t,
                                 bool clip) {
  ComplexMatrix a = shift_matrix(fb, 1);
  if (clip) a = clip_singular_values(a);
  const ComplexMatrix b = std::exp(-z * delta_t) * a;

  // Simpson weights are (dt/3)(2 + 2 [q odd]) apart from the two endpoints.
  GeometricSum all = geometric_sum(b, Q);
  const ComplexMatrix full = all.sum + all.power;
  const ComplexMatrix odd = b * geometric_sum(b * b, Q / 2).sum;
  ComplexMatrix out = 2.0 * full + 2.0 * odd - all.power;
  out.diagonal().array() -= 1.0;
  return out * (delta_t / 3.0);
}

ComplexMatrix resolvent_multi_step(const FilteredBasis& fb, double z, Index Q, double delta_t) {
  const ComplexMatrix& phi = fb.phi_plus;
  const Index n = phi.rows();
  const RealVector w = simpson_weights(Q, delta_t);

  // R = (1/N) Phi^* Y with Y_n = sum_q c_q Phi_{(n+q) mod N}, a circular
  // correlation evaluated per column in the Fourier domain.
  ComplexVector h = ComplexVector::Zero(n);
  for (Index q = 0; q <= Q; ++q)
    h[q % n] += w[q] * std::exp(-z * static_cast<double>(q) * delta_t);
  Eigen::FFT<double> fft;
  ComplexVector h_hat(n);
  fft.fwd(h_hat, h);
  const ComplexVector transfer = h_hat.conjugate();

  ComplexMatrix y(n, phi.cols());
  ComplexVector col_hat(n), col(n);
  for (Index j = 0; j < phi.cols(); ++j) {
    fft.fwd(col_hat, ComplexVector(phi.col(j)));
    col_hat.array() *= transfer.array();
    fft.inv(col, col_hat);
    y.col(j) = col;
  }
  return phi.adjoint() * y / static_cast<double>(n);
}

}  // namespace

ComplexMatrix resolvent_matrix(const FilteredBasis& fb, double z, Index Q, double delta_t,
                               ResolventMode mode, bool clip_shift_singular_values) {
  require(z > 0.0, ErrorKind::parameter, "z must be > 0");
  require(Q >= 2 && Q % 2 == 0, ErrorKind::input, "Q must be even and >= 2");
  require(delta_t > 0.0, ErrorKind::parameter, "delta_t must be > 0");
  if (mode == ResolventMode::multi_step)
    return resolvent_multi_step(fb, z, Q, delta_t);
  return resolvent_iterated(fb, z, Q, delta_t, clip_shift_singular_values);
}

ComplexMatrix compactify(const ComplexMatrix& s_half, const RealVector& lambdas_tau, double z) {
  require(s_half.rows() == s_half.cols() && s_half.rows() == lambdas_tau.size(),
          ErrorKind::input, "compactify: dimension mismatch");
  // Exact zeros are accepted: exp(-tau eta) underflows for large eta.
  require((lambdas_tau.array() >= 0.0).all() && (lambdas_tau.array() <= 1.0).all(),
          ErrorKind::input, "semigroup eigenvalues must lie in [0, 1]");
  ComplexMatrix s = hermitian_part(s_half * lambdas_tau.asDiagonal() * s_half);

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(s);
  require(eig.info() == Eigen::Success, ErrorKind::numerical, "eigensolver failed in compactify");
  const double bound = 1.0 / z - 1e-12;
  if (eig.eigenvalues().size() > 0 && eig.eigenvalues().maxCoeff() > bound) {
    warn("compactified operator has eigenvalue " +
         std::to_string(eig.eigenvalues().maxCoeff()) + " >= 1/z; clipping");
    const RealVector clipped = eig.eigenvalues().cwiseMin(bound);
    s = hermitian_part(eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().adjoint());
  }
  return s;
}

RankReduction rank_reduce(const ComplexMatrix& s_plus, Index M) {
  const Index l = s_plus.rows();
  require(s_plus.cols() == l, ErrorKind::input, "rank_reduce needs a square matrix");
  require(M >= 1 && M <= l, ErrorKind::parameter, "rank must satisfy 1 <= M <= L");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian_part(s_plus));
  require(eig.info() == Eigen::Success, ErrorKind::numerical, "eigensolver failed in rank_reduce");

  RankReduction out;
  out.values = eig.eigenvalues().tail(M).reverse();
  out.vectors = eig.eigenvectors().rightCols(M).rowwise().reverse();
  if (M < l) {
    const double next = eig.eigenvalues()[l - M - 1];
    require(out.values[M - 1] > next + 1e-12, ErrorKind::rank_gap,
            "no spectral gap after eigenvalue " + std::to_string(M) + " (" +
                std::to_string(out.values[M - 1]) + " vs " + std::to_string(next) +
                "); choose a different M");
  }
  out.s_plus_m = out.vectors * out.values.asDiagonal() * out.vectors.adjoint();
  out.s_minus_m = out.s_plus_m.conjugate();
  out.s_m = out.s_plus_m - out.s_minus_m;
  return out;
}

Complex resolvent_eigenvalue(double e, double z) {
  const double a = std::abs(e);
  require(a > 1e-12, ErrorKind::rank_gap, "eigenvalue is numerically zero");
  require(a * z < 1.0, ErrorKind::domain, "|e| must be < 1/z");
  const double angle = std::acos(a * z);
  return std::polar(a, e > 0.0 ? angle : -angle);
}

double eigenfrequency(double e, double z) {
  require(std::abs(e) > 1e-12, ErrorKind::rank_gap, "eigenvalue is numerically zero");
  require(std::abs(e) * z < 1.0, ErrorKind::domain, "|e| must be < 1/z");
  return std::sqrt(1.0 - e * e * z * z) / e;
}

Complex resolvent_inverse(Complex theta, double z) { return z - 1.0 / theta; }

FrequencyData eig_frequencies(const ComplexMatrix& s_m, double z, Index M) {
  const Index l = s_m.rows();
  require(s_m.cols() == l, ErrorKind::input, "eig_frequencies needs a square matrix");
  require(M >= 1 && 2 * M <= l, ErrorKind::parameter,
          "eig_frequencies needs 1 <= M and 2M <= L (M = " + std::to_string(M) + ")");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian_part(s_m));
  require(eig.info() == Eigen::Success, ErrorKind::numerical,
          "eigensolver failed in eig_frequencies");

  FrequencyData out;
  out.e.resize(2 * M);
  out.theta.resize(2 * M);
  out.omega.resize(2 * M);
  out.q.resize(l, 2 * M);
  for (Index k = 1; k <= M; ++k) {
    // Positive eigenvalues ascending: e_1 is the smallest of the top M.
    const Index src = l - M + k - 1;
    const double e = eig.eigenvalues()[src];
    require(e > 1e-12, ErrorKind::rank_gap,
            "reduced operator has fewer than 2M nonzero eigenvalues; lower M");
    require(e * z < 1.0, ErrorKind::domain,
            "eigenvalue " + std::to_string(e) + " outside (-1/z, 1/z)");
    ComplexVector v = eig.eigenvectors().col(src);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    v *= std::conj(v[arg]) / std::abs(v[arg]);
    v[arg] = std::abs(v[arg]);

    const Index pos = M + k - 1;
    const Index neg = M - k;
    out.e[pos] = e;
    out.e[neg] = -e;
    out.theta[pos] = resolvent_eigenvalue(e, z);
    out.theta[neg] = std::conj(out.theta[pos]);
    out.omega[pos] = eigenfrequency(e, z);
    out.omega[neg] = -out.omega[pos];
    out.q.col(pos) = v;
    out.q.col(neg) = v.conjugate();
  }
  return out;
}

GeneratorMatrices assemble_generator(const ComplexMatrix& q, const RealVector& omega,
                                     const ComplexVector& theta, double z) {
  const Index l = q.rows();
  const Index m = q.cols();
  require(omega.size() == m && theta.size() == m, ErrorKind::input,
          "assemble_generator: dimension mismatch");
  if (m > 0) {
    const double defect =
        (q.adjoint() * q - ComplexMatrix::Identity(m, m)).cwiseAbs().maxCoeff();
    require(defect <= 1e-8, ErrorKind::input,
            "eigenvector columns are not orthonormal (defect " + std::to_string(defect) + ")");
  }
  const Complex i(0.0, 1.0);
  GeneratorMatrices g;
  g.V = i * q * omega.cast<Complex>().asDiagonal() * q.adjoint();
  const ComplexMatrix projector = q * q.adjoint();
  g.R = q * theta.asDiagonal() * q.adjoint() +
        (ComplexMatrix::Identity(l, l) - projector) / z;
  return g;
}

bool InvariantReport::passes(double tol) const {
  return generator_skew_defect < tol && eigenvalue_pairing < tol && eigenvector_pairing < tol &&
         circle_defect < tol && orthonormality_defect < tol && resolvent_identity < tol &&
         polar_reconstruction < tol && sqrt_reconstruction < tol;
}

SpectralResult run_pipeline(const RealMatrix& phi, const RealVector& etas, double delta_t,
                            const SpectralConfig& config) {
  config.validate(delta_t);
  const Index L = config.L;
  require(L + 1 <= phi.cols() && L + 1 <= etas.size(), ErrorKind::input,
          "spectral L exceeds the basis size");
  require(2 * config.M <= L, ErrorKind::parameter, "2M must not exceed L");

  const FilteredBasis fb = with_stage("filter", [&] { return filter_basis(phi, L); });
  const ComplexMatrix r = with_stage("resolvent", [&] {
    return resolvent_matrix(fb, config.z, config.Q, delta_t, config.mode,
                            config.clip_shift_singular_values);
  });
  const auto polar = with_stage("polar", [&] { return polar_decompose(r); });
  const ComplexMatrix s_half = with_stage("sqrt", [&] { return matrix_sqrt_psd(polar.modulus); });

  SpectralResult out;
  out.config = config;
  out.lambdas_tau = semigroup_eigenvalues(etas.head(L + 1), config.tau).tail(L);
  const ComplexMatrix s_plus =
      with_stage("compactify", [&] { return compactify(s_half, out.lambdas_tau, config.z); });
  const RankReduction reduced = with_stage("rank", [&] { return rank_reduce(s_plus, config.M); });
  FrequencyData freq =
      with_stage("frequencies", [&] { return eig_frequencies(reduced.s_m, config.z, config.M); });
  GeneratorMatrices gen = with_stage(
      "generator", [&] { return assemble_generator(freq.q, freq.omega, freq.theta, config.z); });

  out.psi = phi.middleCols(1, L).cast<Complex>() * freq.q;

  InvariantReport& inv = out.invariants;
  const double r_norm = r.norm();
  inv.polar_reconstruction = r_norm > 0 ? (r - polar.isometry * polar.modulus).norm() / r_norm : 0;
  const double s_norm = polar.modulus.norm();
  inv.sqrt_reconstruction = s_norm > 0 ? (s_half * s_half - polar.modulus).norm() / s_norm : 0;
  inv.generator_skew_defect = (gen.V + gen.V.adjoint()).cwiseAbs().maxCoeff();
  const Index m2 = freq.omega.size();
  inv.orthonormality_defect =
      (freq.q.adjoint() * freq.q - ComplexMatrix::Identity(m2, m2)).cwiseAbs().maxCoeff();

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> check(hermitian_part(reduced.s_m),
                                                     Eigen::EigenvaluesOnly);
  const Index M = config.M;
  for (Index k = 0; k < M; ++k) {
    // Smallest computed eigenvalues against the negated largest ones.
    inv.eigenvalue_pairing = std::max(
        inv.eigenvalue_pairing,
        std::abs(check.eigenvalues()[k] + check.eigenvalues()[L - 1 - k]));
  }
  for (Index c = 0; c < m2; ++c) {
    const ComplexVector residual = reduced.s_m * freq.q.col(c) - freq.e[c] * freq.q.col(c);
    inv.eigenvector_pairing = std::max(inv.eigenvector_pairing, residual.cwiseAbs().maxCoeff());
    const double radius = 0.5 / config.z;
    inv.circle_defect =
        std::max(inv.circle_defect, std::abs(std::abs(freq.theta[c] - radius) - radius));
  }
  ComplexMatrix zv = -gen.V;
  zv.diagonal().array() += config.z;
  inv.resolvent_identity = (zv * gen.R * freq.q - freq.q).cwiseAbs().maxCoeff();

  out.e = std::move(freq.e);
  out.theta = std::move(freq.theta);
  out.omega = std::move(freq.omega);
  out.q_coeffs = std::move(freq.q);
  out.V = std::move(gen.V);
  out.R = std::move(gen.R);
  return out;
}

SpectralResult run_pipeline(const KernelBasis& basis, double delta_t,
                            const SpectralConfig& config) {
  return run_pipeline(basis.phi, basis.etas, delta_t, config);
}

}  // namespace koopgen
