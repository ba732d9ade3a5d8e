#include "core/pc.hpp"

#include <cmath>

namespace mldfm {

namespace {

void check_rank(const Vector& values, int r) {
  const double top = values(0);
  if (!(top > 0.0) || values(r - 1) <= 1e-12 * top)
    throw Error::numeric("pc_extract: effective rank below r (panel too degenerate)");
}

void attach_tie_warning(FactorEstimate& est, const Vector& values, int r, int n) {
  if (r < n && std::abs(values(r - 1) - values(r)) <= 1e-10 * values(0))
    est.warnings.push_back("eigenvalue tie at position r (factor space not unique)");
}

}  // namespace

FactorEstimate pc_extract(const PanelData& panel, int r) {
  const int T = panel.T();
  const int N = panel.N();
  if (r < 1) throw Error::argument("pc_extract: r must be >= 1");
  if (r >= std::min(T, N)) throw Error::argument("pc_extract: r must be < min(N, T)");

  FactorEstimate est;
  est.estimator = Estimator::PC;
  const Matrix& Y = panel.Y;
  const double sqrtT = std::sqrt(static_cast<double>(T));

  /* Both Gram matrices share their nonzero spectrum; work with the smaller.
     For S = Y'Y the factor columns are sqrt(T) Y v_k / ||Y v_k||. */
  if (T <= N) {
    SymEig eig = sym_eig_desc(Y * Y.transpose());
    check_rank(eig.values, r);
    est.F_hat = sqrtT * eig.vectors.leftCols(r);
    attach_tie_warning(est, eig.values, r, T);
  } else {
    SymEig eig = sym_eig_desc(Y.transpose() * Y);
    check_rank(eig.values, r);
    est.F_hat.resize(T, r);
    for (int k = 0; k < r; ++k)
      est.F_hat.col(k) = sqrtT / std::sqrt(eig.values(k)) * (Y * eig.vectors.col(k));
    attach_tie_warning(est, eig.values, r, N);
  }
  est.Lambda_hat = Y.transpose() * est.F_hat / static_cast<double>(T);

  /* Sign convention: the largest-magnitude loading entry of each column is
     positive (the eigenvector sign is arbitrary; the MC harness re-aligns
     against truth anyway). */
  for (int k = 0; k < r; ++k) {
    Eigen::Index imax;
    est.Lambda_hat.col(k).cwiseAbs().maxCoeff(&imax);
    if (est.Lambda_hat(imax, k) < 0.0) {
      est.Lambda_hat.col(k) = -est.Lambda_hat.col(k);
      est.F_hat.col(k) = -est.F_hat.col(k);
    }
  }

  est.iterations = 1;
  est.converged = true;
  est.rss_trace = {(Y - est.F_hat * est.Lambda_hat.transpose()).squaredNorm()};
  return est;
}

Matrix residuals(const PanelData& panel, const FactorEstimate& est) {
  if (est.F_hat.rows() != panel.Y.rows() || est.Lambda_hat.rows() != panel.Y.cols() ||
      est.F_hat.cols() != est.Lambda_hat.cols())
    throw Error::argument("residuals: dimension mismatch");
  return panel.Y - est.F_hat * est.Lambda_hat.transpose();
}

FactorEstimate procrustes_align(const FactorEstimate& est, const Matrix& target) {
  Matrix R = procrustes_rotation(est.F_hat, target);
  FactorEstimate out = est;
  out.F_hat = est.F_hat * R;
  out.Lambda_hat = est.Lambda_hat * R;
  return out;
}

FactorEstimate sign_align(const FactorEstimate& est, const Matrix& target) {
  if (est.F_hat.rows() != target.rows() || est.F_hat.cols() != target.cols())
    throw Error::argument("sign_align: dimension mismatch");
  FactorEstimate out = est;
  for (Eigen::Index k = 0; k < target.cols(); ++k) {
    if (out.F_hat.col(k).dot(target.col(k)) < 0.0) {
      out.F_hat.col(k) = -out.F_hat.col(k);
      out.Lambda_hat.col(k) = -out.Lambda_hat.col(k);
    }
  }
  return out;
}

}  // namespace mldfm
