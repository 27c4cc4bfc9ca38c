#include "koopgen/kernel_basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "koopgen/errors.hpp"
#include "koopgen/linalg.hpp"

namespace koopgen {

std::string to_string(BandwidthMode mode) {
  return mode == BandwidthMode::fixed ? "fixed" : "variable";
}

BandwidthMode parse_bandwidth_mode(const std::string& name) {
  if (name == "fixed") return BandwidthMode::fixed;
  if (name == "variable") return BandwidthMode::variable;
  fail(ErrorKind::input, "unknown bandwidth mode '" + name + "'");
}

std::vector<double> EpsilonGrid::values() const {
  require(base > 1.0 && step > 0.0 && max_exponent >= min_exponent, ErrorKind::parameter,
          "epsilon grid needs base > 1, step > 0 and max_exponent >= min_exponent");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((max_exponent - min_exponent) / step + 1e-9)) + 1;
  out.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k)
    out.push_back(std::pow(base, min_exponent + static_cast<double>(k) * step));
  return out;
}

void KernelConfig::validate(Index n_samples) const {
  if (bandwidth_mode == BandwidthMode::variable)
    require(knn >= 1 && knn < n_samples, ErrorKind::parameter,
            "knn must satisfy 1 <= knn < N (knn = " + std::to_string(knn) +
                ", N = " + std::to_string(n_samples) + ")");
  if (epsilon)
    require(std::isfinite(*epsilon) && *epsilon > 0.0, ErrorKind::parameter,
            "epsilon must be > 0");
  require(tuning_max_pairs >= 1, ErrorKind::parameter, "tuning_max_pairs must be >= 1");
}

namespace {

struct Bandwidths {
  RealVector sigma;
  double scale = 1.0;
};

/// `sq(i, j)` returns the squared distance between samples i and j.
template <typename SqDist>
Bandwidths bandwidths_from(Index n, BandwidthMode mode, Index knn, SqDist&& sq) {
  Bandwidths out;
  if (mode == BandwidthMode::fixed) {
    out.sigma = RealVector::Ones(n);
    return out;
  }
  require(knn >= 1 && knn < n, ErrorKind::parameter, "knn must satisfy 1 <= knn < N");
  RealVector raw(n);
  std::vector<double> row(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (Index j = 0; j < n; ++j)
      if (j != i) row[c++] = sq(i, j);
    std::nth_element(row.begin(), row.begin() + (knn - 1), row.end());
    std::sort(row.begin(), row.begin() + knn);
    double acc = 0.0;
    for (Index k = 0; k < knn; ++k) acc += std::sqrt(row[static_cast<std::size_t>(k)]);
    raw[i] = acc / static_cast<double>(knn);
    require(raw[i] > 0.0, ErrorKind::degenerate_data,
            "sample " + std::to_string(i) + " has " + std::to_string(knn) +
                " duplicate neighbors; bandwidth is zero");
  }
  const double log_mean = raw.array().log().mean();
  out.scale = std::exp(log_mean);
  out.sigma = raw / out.scale;
  return out;
}

template <typename SqDist>
TuningProfile tuning_profile_from(Index n, const RealVector& sigma, const EpsilonGrid& grid,
                                  Index max_pairs, SqDist&& sq) {
  TuningProfile profile;
  profile.epsilons = grid.values();
  require(profile.epsilons.size() >= 3, ErrorKind::parameter, "epsilon grid needs >= 3 points");
  require(sigma.size() == n && (sigma.array() > 0.0).all(), ErrorKind::input,
          "bandwidths must be strictly positive, one per sample");

  // Either all unordered pairs (doubled, plus the unit diagonal) or a strided
  // subset of full rows when N^2 exceeds the pair budget.
  std::vector<double> ratios;
  double constant_terms = 0.0;
  double multiplicity = 1.0;
  const double full_pairs = static_cast<double>(n) * static_cast<double>(n);
  if (full_pairs <= static_cast<double>(max_pairs)) {
    ratios.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) ratios.push_back(sq(i, j) / (sigma[i] * sigma[j]));
    constant_terms = static_cast<double>(n);
    multiplicity = 2.0;
  } else {
    const auto stride = static_cast<Index>(std::ceil(full_pairs / static_cast<double>(max_pairs)));
    for (Index i = 0; i < n; i += stride) {
      for (Index j = 0; j < n; ++j)
        if (j != i) ratios.push_back(sq(i, j) / (sigma[i] * sigma[j]));
      constant_terms += 1.0;
    }
  }
  std::sort(ratios.begin(), ratios.end());
  long double sum_r = 0.0L, sum_r2 = 0.0L;
  for (double r : ratios) {
    sum_r += r;
    sum_r2 += static_cast<long double>(r) * r;
  }
  const double r_max = ratios.empty() ? 0.0 : ratios.back();

  profile.kernel_sums.resize(profile.epsilons.size());
  for (std::size_t k = 0; k < profile.epsilons.size(); ++k) {
    const double inv_e2 = 1.0 / (profile.epsilons[k] * profile.epsilons[k]);
    long double s = 0.0L;
    if (r_max * inv_e2 < 1e-6) {
      // exp(-x) = 1 - x + x^2/2 to well below double precision here.
      s = static_cast<long double>(ratios.size()) - sum_r * inv_e2 +
          0.5L * sum_r2 * inv_e2 * inv_e2;
    } else {
      const double cutoff = 745.0 / inv_e2;
      const auto end = std::upper_bound(ratios.begin(), ratios.end(), cutoff);
      for (auto it = ratios.begin(); it != end; ++it) s += std::exp(-*it * inv_e2);
    }
    profile.kernel_sums[k] = static_cast<double>(constant_terms + multiplicity * s);
  }

  profile.slopes.assign(profile.epsilons.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 1; k + 1 < profile.epsilons.size(); ++k) {
    const double num = std::log(profile.kernel_sums[k + 1]) - std::log(profile.kernel_sums[k - 1]);
    const double den = std::log(profile.epsilons[k + 1]) - std::log(profile.epsilons[k - 1]);
    profile.slopes[k] = num / den;
  }
  return profile;
}

double argmax_slope(const TuningProfile& profile) {
  double best_slope = -std::numeric_limits<double>::infinity();
  double best_eps = 0.0;
  for (std::size_t k = 0; k < profile.slopes.size(); ++k) {
    const double s = profile.slopes[k];
    if (std::isfinite(s) && s >= best_slope) {  // ties go to the larger epsilon
      best_slope = s;
      best_eps = profile.epsilons[k];
    }
  }
  require(std::isfinite(best_slope) && best_slope > 0.0, ErrorKind::tuning,
          "kernel sum has no positive finite log-log slope on the epsilon grid; "
          "supply epsilon manually");
  return best_eps;
}

void kernel_in_place(RealMatrix& sq, double epsilon, const RealVector& sigma) {
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::parameter, "epsilon must be > 0");
  require((sigma.array() > 0.0).all() && sigma.allFinite(), ErrorKind::input,
          "bandwidths must be strictly positive");
  const Index n = sq.rows();
  const double inv_e2 = 1.0 / (epsilon * epsilon);
  for (Index j = 0; j < n; ++j) {
    sq(j, j) = 1.0;
    for (Index i = j + 1; i < n; ++i) {
      const double k = std::exp(-sq(i, j) * inv_e2 / (sigma[i] * sigma[j]));
      sq(i, j) = k;
      sq(j, i) = k;
    }
  }
}

/// Turns K into the factor in place; returns (d, q).
std::pair<RealVector, RealVector> normalize_in_place(RealMatrix& k) {
  const Index n = k.rows();
  require(k.cols() == n, ErrorKind::input, "kernel matrix must be square");
  require(k.allFinite(), ErrorKind::numerical, "kernel matrix is not finite");
  const double inv_n = 1.0 / static_cast<double>(n);
  RealVector d = k.rowwise().sum() * inv_n;
  require((d.array() > 0.0).all(), ErrorKind::numerical, "kernel degree is not positive");
  RealVector q = (k * d.cwiseInverse()) * inv_n;
  require((q.array() > 0.0).all() && q.allFinite(), ErrorKind::numerical,
          "second-stage kernel normalization is not positive");
  const RealVector left = (d * static_cast<double>(n)).cwiseInverse();
  const RealVector right = q.cwiseSqrt().cwiseInverse();
  k = left.asDiagonal() * k * right.asDiagonal();
  return {std::move(d), std::move(q)};
}

/// Eigenvalue checks, sign convention and generator eigenvalues shared by the
/// dense and streaming constructions.
KernelBasis basis_from_eigenpairs(SymmetricEigenpairs eig, Index n, Index L) {
  const double lambda0 = eig.values[0];
  if (std::abs(lambda0 - 1.0) > 1e-8)
    warn("leading Markov eigenvalue is " + std::to_string(lambda0) + ", expected 1");
  if (eig.values[1] >= 1.0 - 1e-12)
    warn("leading Markov eigenvalue is not simple within 1e-12; proceeding");
  Index null_count = 0;
  for (Index j = 1; j <= L; ++j) null_count += eig.values[j] <= 1e-14;
  if (null_count > 0)
    warn(std::to_string(null_count) + " of the requested " + std::to_string(L) +
         " kernel eigenvalues are below 1e-14; their semigroup weights vanish");

  KernelBasis basis;
  basis.lambdas = std::move(eig.values);
  basis.lambdas[0] = 1.0;
  basis.phi = std::move(eig.vectors);
  basis.phi *= std::sqrt(static_cast<double>(n));
  for (Index j = 1; j <= L; ++j) {
    Index arg = 0;
    basis.phi.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis.phi(arg, j) < 0.0) basis.phi.col(j) *= -1.0;
  }
  basis.phi.col(0).setOnes();

  basis.etas.resize(L + 1);
  basis.etas[0] = 0.0;
  const double denom = 1.0 / basis.lambdas[1] - 1.0;
  require(denom > 0.0, ErrorKind::conditioning,
          "lambda_1 = 1 leaves the semigroup generator unnormalizable");
  // Round-off eigenvalues (<= 0) get eta = inf, i.e. zero weight for any tau > 0.
  for (Index j = 1; j <= L; ++j) {
    basis.lambdas[j] = std::max(basis.lambdas[j], 0.0);
    basis.etas[j] = basis.lambdas[j] > 0.0 ? (1.0 / basis.lambdas[j] - 1.0) / denom
                                           : std::numeric_limits<double>::infinity();
  }
  basis.etas[1] = 1.0;
  return basis;
}

void check_basis_size(Index n, Index L) {
  require(L >= 1 && L <= n - 1, ErrorKind::parameter,
          "basis size L must satisfy 1 <= L <= N-1 (L = " + std::to_string(L) + ")");
}

KernelBasis eigenbasis_from_factor(const RealMatrix& factor, Index L) {
  const Index n = factor.rows();
  check_basis_size(n, L);
  RealMatrix gram = outer_gram_lower(factor);
  KernelBasis basis = basis_from_eigenpairs(top_symmetric_eigenpairs(gram, L + 1), n, L);
  basis.right_vectors = factor.transpose() * basis.phi;
  return basis;
}

/// Column blocks of the normalized factor, recomputed from the samples so that
/// only the Gram matrix is held at full N x N size.
class FactorColumns {
 public:
  FactorColumns(const RealMatrix& samples, const RealVector& sigma, double epsilon)
      : points_(samples.transpose()), sigma_(sigma), inv_e2_(1.0 / (epsilon * epsilon)) {}

  Index size() const { return points_.cols(); }

  /// K(:, i0 .. i0+b-1).
  void kernel(Index i0, Index b, RealMatrix& out) const {
    const Index n = size();
    const Index d = points_.rows();
    out.resize(n, b);
    for (Index c = 0; c < b; ++c) {
      const Index i = i0 + c;
      const double* yi = points_.col(i).data();
      const double si = sigma_[i];
      double* col = out.col(c).data();
      for (Index j = 0; j < n; ++j) {
        const double* yj = points_.col(j).data();
        double s = 0.0;
        for (Index k = 0; k < d; ++k) {
          const double diff = yj[k] - yi[k];
          s += diff * diff;
        }
        col[j] = std::exp(-s * inv_e2_ / (si * sigma_[j]));
      }
    }
  }

  void set_normalization(RealVector row_scale, RealVector col_scale) {
    row_scale_ = std::move(row_scale);
    col_scale_ = std::move(col_scale);
  }

  /// Transpose of the factor rows i0 .. i0+b-1, an N x b block.
  void factor_transposed(Index i0, Index b, RealMatrix& out) const {
    kernel(i0, b, out);
    out = col_scale_.asDiagonal() * out * row_scale_.segment(i0, b).asDiagonal();
  }

 private:
  RealMatrix points_;  // d x N
  const RealVector& sigma_;
  double inv_e2_;
  RealVector row_scale_;
  RealVector col_scale_;
};

Index block_width(Index n) {
  constexpr Index kBlockElements = Index(1) << 25;  // 256 MiB of doubles
  return std::clamp<Index>(kBlockElements / std::max<Index>(n, 1), 1, n);
}

}  // namespace

RealMatrix pairwise_squared_distances(const RealMatrix& samples) {
  const Index n = samples.rows();
  require(samples.allFinite(), ErrorKind::input, "samples are not finite");
  RealMatrix sq(n, n);
  for (Index j = 0; j < n; ++j) {
    sq(j, j) = 0.0;
    for (Index i = j + 1; i < n; ++i) {
      const double v = (samples.row(i) - samples.row(j)).squaredNorm();
      sq(i, j) = v;
      sq(j, i) = v;
    }
  }
  return sq;
}

RealVector bandwidth_function(const RealMatrix& samples, const KernelConfig& config) {
  const Index n = samples.rows();
  if (config.bandwidth_mode == BandwidthMode::variable)
    require(n > config.knn, ErrorKind::parameter, "bandwidth function needs N > knn");
  return bandwidths_from(n, config.bandwidth_mode, config.knn, [&](Index i, Index j) {
           return (samples.row(i) - samples.row(j)).squaredNorm();
         }).sigma;
}

TuningProfile epsilon_tuning_profile(const RealMatrix& samples, const RealVector& sigma,
                                     const EpsilonGrid& grid, Index max_pairs) {
  return tuning_profile_from(samples.rows(), sigma, grid, max_pairs, [&](Index i, Index j) {
    return (samples.row(i) - samples.row(j)).squaredNorm();
  });
}

double tune_epsilon(const RealMatrix& samples, const RealVector& sigma, const EpsilonGrid& grid,
                    Index max_pairs) {
  return argmax_slope(epsilon_tuning_profile(samples, sigma, grid, max_pairs));
}

RealMatrix kernel_matrix(const RealMatrix& samples, double epsilon, const RealVector& sigma) {
  require(sigma.size() == samples.rows(), ErrorKind::input, "one bandwidth per sample required");
  RealMatrix k = pairwise_squared_distances(samples);
  kernel_in_place(k, epsilon, sigma);
  return k;
}

MarkovNormalization markov_normalize(const RealMatrix& kernel) {
  MarkovNormalization out;
  out.factor = kernel;
  auto [d, q] = normalize_in_place(out.factor);
  out.degree = std::move(d);
  out.q = std::move(q);
  return out;
}

KernelBasis basis_eigendecomposition(const MarkovNormalization& normalized, Index L) {
  KernelBasis basis = eigenbasis_from_factor(normalized.factor, L);
  basis.degree = normalized.degree;
  basis.q = normalized.q;
  basis.factor = normalized.factor;
  return basis;
}

RealVector semigroup_eigenvalues(const RealVector& etas, double tau) {
  require(std::isfinite(tau) && tau >= 0.0, ErrorKind::parameter, "tau must be >= 0");
  RealVector out = (-tau * etas.array()).exp().matrix();
  if (out.size() > 0) out[0] = 1.0;
  return out;
}

double nystrom_extend(const KernelBasis& basis, const RealMatrix& samples,
                      const RealVector& y_new, Index j) {
  const Index n = samples.rows();
  require(n == basis.n_samples(), ErrorKind::input, "samples do not match the basis");
  require(y_new.size() == samples.cols(), ErrorKind::input, "query point has wrong dimension");
  require(j >= 0 && j <= basis.size(), ErrorKind::input, "eigenfunction index out of range");
  require(basis.lambdas[j] >= 1e-14, ErrorKind::conditioning,
          "eigenvalue too small for out-of-sample extension");

  RealVector sq(n);
  for (Index i = 0; i < n; ++i) sq[i] = (samples.row(i).transpose() - y_new).squaredNorm();

  double sigma_new = 1.0;
  if (basis.bandwidth_mode == BandwidthMode::variable) {
    // Exact matches are treated as the point itself, as in the in-sample bandwidth.
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
      if (sq[i] > 0.0) dist.push_back(std::sqrt(sq[i]));
    require(static_cast<Index>(dist.size()) >= basis.knn, ErrorKind::degenerate_data,
            "not enough distinct neighbors for the query bandwidth");
    std::nth_element(dist.begin(), dist.begin() + (basis.knn - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + basis.knn);
    double acc = 0.0;
    for (Index k = 0; k < basis.knn; ++k) acc += dist[static_cast<std::size_t>(k)];
    sigma_new = acc / static_cast<double>(basis.knn) / basis.sigma_scale;
  }

  const double inv_e2 = 1.0 / (basis.epsilon_used * basis.epsilon_used);
  RealVector row(n);
  for (Index i = 0; i < n; ++i) row[i] = std::exp(-sq[i] * inv_e2 / (sigma_new * basis.sigma[i]));
  const double degree = row.mean();
  require(degree > 0.0, ErrorKind::numerical, "query point has zero kernel degree");
  const RealVector factor_row =
      row.cwiseQuotient(basis.q.cwiseSqrt()) / (static_cast<double>(n) * degree);
  return factor_row.dot(basis.right_vectors.col(j)) / basis.lambdas[j];
}

KernelBasis compute_basis(const RealMatrix& samples, const KernelConfig& config, Index L) {
  const Index n = samples.rows();
  require(n >= 3, ErrorKind::input, "basis construction needs at least 3 samples");
  require(samples.allFinite(), ErrorKind::input, "samples are not finite");
  config.validate(n);
  check_basis_size(n, L);

  auto sq = [&](Index i, Index j) { return (samples.row(i) - samples.row(j)).squaredNorm(); };
  Bandwidths bw = bandwidths_from(n, config.bandwidth_mode, config.knn, sq);
  const double epsilon =
      config.epsilon ? *config.epsilon
                     : argmax_slope(tuning_profile_from(n, bw.sigma, config.epsilon_grid,
                                                        config.tuning_max_pairs, sq));
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::parameter, "epsilon must be > 0");

  FactorColumns columns(samples, bw.sigma, epsilon);
  const Index width = block_width(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  RealMatrix block, other;

  // K is symmetric, so column sums are row sums.
  RealVector d(n);
  for (Index i0 = 0; i0 < n; i0 += width) {
    const Index b = std::min(width, n - i0);
    columns.kernel(i0, b, block);
    d.segment(i0, b) = block.colwise().sum().transpose() * inv_n;
  }
  require((d.array() > 0.0).all() && d.allFinite(), ErrorKind::numerical,
          "kernel degree is not positive");
  const RealVector inv_d = d.cwiseInverse();
  RealVector q(n);
  for (Index i0 = 0; i0 < n; i0 += width) {
    const Index b = std::min(width, n - i0);
    columns.kernel(i0, b, block);
    q.segment(i0, b) = block.transpose() * inv_d * inv_n;
  }
  require((q.array() > 0.0).all() && q.allFinite(), ErrorKind::numerical,
          "second-stage kernel normalization is not positive");
  columns.set_normalization((d * static_cast<double>(n)).cwiseInverse(),
                            q.cwiseSqrt().cwiseInverse());

  // Lower triangle of G = factor * factor^T, block by block.
  RealMatrix gram(n, n);
  for (Index i0 = 0; i0 < n; i0 += width) {
    const Index bi = std::min(width, n - i0);
    columns.factor_transposed(i0, bi, block);
    for (Index j0 = 0; j0 < i0; j0 += width) {
      const Index bj = std::min(width, n - j0);
      columns.factor_transposed(j0, bj, other);
      gram.block(i0, j0, bi, bj).noalias() = block.transpose() * other;
    }
    gram.block(i0, i0, bi, bi).noalias() = block.transpose() * block;
  }
  SymmetricEigenpairs eig = top_symmetric_eigenpairs(gram, L + 1);
  gram.resize(0, 0);
  KernelBasis basis = basis_from_eigenpairs(std::move(eig), n, L);

  const bool retain = n <= config.retain_factor_max_n;
  if (retain) basis.factor.resize(n, n);
  basis.right_vectors = RealMatrix::Zero(n, L + 1);
  for (Index i0 = 0; i0 < n; i0 += width) {
    const Index b = std::min(width, n - i0);
    columns.factor_transposed(i0, b, block);
    basis.right_vectors.noalias() += block * basis.phi.middleRows(i0, b);
    if (retain) basis.factor.middleRows(i0, b) = block.transpose();
  }

  basis.epsilon_used = epsilon;
  basis.sigma = std::move(bw.sigma);
  basis.sigma_scale = bw.scale;
  basis.bandwidth_mode = config.bandwidth_mode;
  basis.knn = config.bandwidth_mode == BandwidthMode::variable ? config.knn : 0;
  basis.degree = std::move(d);
  basis.q = std::move(q);
  return basis;
}

}  // namespace koopgen
