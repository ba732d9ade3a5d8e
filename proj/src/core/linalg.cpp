#include "core/linalg.hpp"

#include <cmath>
#include <string>

namespace mldfm {

Matrix orthonormalize(const Matrix& M) {
  const Eigen::Index T = M.rows();
  const Eigen::Index k = M.cols();
  if (k == 0) return M;
  if (T < k) throw Error::argument("orthonormalize: more columns than rows");

  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix R = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  const double rmax = R.diagonal().cwiseAbs().maxCoeff();
  if (rmax <= 0.0 || R.diagonal().cwiseAbs().minCoeff() <= 1e-12 * rmax)
    throw Error::numeric("orthonormalize: input is rank-deficient");

  Matrix Q = qr.householderQ() * Matrix::Identity(T, k);
  Q *= std::sqrt(static_cast<double>(T));

  /* Sign convention: first nonzero entry of each column positive.  "Nonzero"
     is relative to the column's largest magnitude so that exact structural
     zeros perturbed by roundoff are skipped. */
  for (Eigen::Index j = 0; j < k; ++j) {
    const double colmax = Q.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < T; ++i) {
      if (std::abs(Q(i, j)) > 1e-9 * colmax) {
        if (Q(i, j) < 0.0) Q.col(j) = -Q.col(j);
        break;
      }
    }
  }
  return Q;
}

SymEig sym_eig_desc(const Matrix& S) {
  Matrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error::numeric("sym_eig_desc: eigendecomposition failed to converge");
  const Eigen::Index n = S.rows();
  SymEig out;
  out.values = solver.eigenvalues().reverse();
  out.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) out.vectors.col(j) = solver.eigenvectors().col(n - 1 - j);
  return out;
}

Matrix procrustes_rotation(const Matrix& A, const Matrix& target) {
  if (A.rows() != target.rows() || A.cols() != target.cols())
    throw Error::argument("procrustes_rotation: dimension mismatch");
  if (A.cols() == 0) return Matrix::Identity(0, 0);
  Eigen::JacobiSVD<Matrix> svd(A.transpose() * target, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

Matrix chol_lower(const Matrix& S, const std::string& context) {
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success)
    throw Error::numeric(context + ": matrix is not positive definite");
  return llt.matrixL();
}

}  // namespace mldfm
