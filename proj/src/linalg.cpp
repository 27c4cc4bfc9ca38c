#include "koopgen/linalg.hpp"

#include <vector>

#include <cblas.h>
#include <lapacke.h>

namespace koopgen {

SymmetricEigenpairs top_symmetric_eigenpairs(RealMatrix& lower, Index count) {
  const Index n = lower.rows();
  require(lower.cols() == n, ErrorKind::input, "symmetric eigensolver needs a square matrix");
  require(count >= 1 && count <= n, ErrorKind::input, "eigenpair count out of range");

  RealVector w(n);
  RealMatrix z(n, count);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(count));
  lapack_int found = 0;
  const auto ln = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'L', ln, lower.data(), ln, 0.0, 0.0,
      static_cast<lapack_int>(n - count + 1), ln, 0.0, &found, w.data(), z.data(), ln,
      support.data());
  require(info == 0 && found == count, ErrorKind::numerical,
          "dsyevr failed (info " + std::to_string(info) + ")");

  // LAPACK returns ascending order; flip.
  SymmetricEigenpairs out;
  out.values = w.head(count).reverse();
  out.vectors = z.rowwise().reverse();
  return out;
}

void set_blas_threads(int threads) {
  if (threads >= 1) openblas_set_num_threads(threads);
}

RealMatrix outer_gram_lower(const RealMatrix& a) {
  const auto n = static_cast<int>(a.rows());
  const auto k = static_cast<int>(a.cols());
  RealMatrix g(a.rows(), a.rows());
  cblas_dsyrk(CblasColMajor, CblasLower, CblasNoTrans, n, k, 1.0, a.data(), n, 0.0, g.data(), n);
  return g;
}

}  // namespace koopgen
