#pragma once

#include <Eigen/Dense>

#include "koopgen/errors.hpp"
#include "koopgen/types.hpp"

namespace koopgen {

/// Leading eigenpairs of a real symmetric matrix, values in descending order.
struct SymmetricEigenpairs {
  RealVector values;
  RealMatrix vectors;
};

/// Computes the `count` largest eigenpairs of the symmetric matrix whose lower
/// triangle is stored in `lower`. The contents of `lower` are destroyed.
SymmetricEigenpairs top_symmetric_eigenpairs(RealMatrix& lower, Index count);

/// Thread count for the BLAS/LAPACK backend; values < 1 are ignored.
void set_blas_threads(int threads);

/// Lower triangle of A * A^T (upper triangle left unspecified).
RealMatrix outer_gram_lower(const RealMatrix& a);

template <typename Derived>
Matrix<typename Derived::Scalar> hermitian_part(const Eigen::MatrixBase<Derived>& a) {
  return (a + a.adjoint()) / typename Derived::RealScalar(2);
}

template <typename Derived>
typename Derived::RealScalar relative_hermitian_defect(const Eigen::MatrixBase<Derived>& a) {
  const auto scale = a.norm();
  if (scale == 0) return 0;
  return (a - a.adjoint()).norm() / scale;
}

template <typename Scalar>
struct PolarDecomposition {
  Matrix<Scalar> isometry;  // W
  Matrix<Scalar> modulus;   // S = (R^* R)^{1/2}
};

/// R = W S via the SVD R = U Sigma V^*: W = U V^*, S = V Sigma V^*.
template <typename Derived>
PolarDecomposition<typename Derived::Scalar> polar_decompose(const Eigen::MatrixBase<Derived>& r) {
  using Scalar = typename Derived::Scalar;
  require(r.rows() == r.cols(), ErrorKind::input, "polar decomposition needs a square matrix");
  require(r.allFinite(), ErrorKind::numerical, "polar decomposition input is not finite");
  Eigen::BDCSVD<Matrix<Scalar>> svd(r.derived(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  require(svd.info() == Eigen::Success, ErrorKind::numerical, "SVD failed in polar decomposition");
  const Matrix<Scalar>& u = svd.matrixU();
  const Matrix<Scalar>& v = svd.matrixV();
  PolarDecomposition<Scalar> out;
  out.isometry = u * v.adjoint();
  out.modulus = hermitian_part(v * svd.singularValues().asDiagonal() * v.adjoint());
  return out;
}

/// Principal square root of a Hermitian positive semidefinite matrix; round-off
/// negative eigenvalues are clipped to zero.
template <typename Derived>
Matrix<typename Derived::Scalar> matrix_sqrt_psd(const Eigen::MatrixBase<Derived>& s,
                                                 double hermitian_tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  require(s.rows() == s.cols(), ErrorKind::input, "matrix square root needs a square matrix");
  require(relative_hermitian_defect(s) <= hermitian_tol, ErrorKind::input,
          "matrix square root input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(hermitian_part(s));
  require(eig.info() == Eigen::Success, ErrorKind::numerical, "eigensolver failed in matrix sqrt");
  const auto root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().eval();
  return hermitian_part(eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().adjoint());
}

}  // namespace koopgen
