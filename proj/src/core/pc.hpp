#pragma once

#include <string>
#include <vector>

#include "core/panel.hpp"

namespace mldfm {

enum class Estimator { PC, SLS };

struct FactorEstimate {
  Matrix F_hat;       // T x r, F'F/T = I_r for PC
  Matrix Lambda_hat;  // N x r
  Estimator estimator = Estimator::PC;
  int iterations = 0;
  std::vector<double> rss_trace;
  bool converged = false;
  std::vector<std::string> warnings;  // e.g. eigenvalue ties at the r-th position
};

/* F = sqrt(T) x top-r eigenvectors of YY' (decreasing eigenvalues), loadings
   Lambda' = F'Y/T.  The eigendecomposition runs on the smaller Gram matrix
   (YY' when T <= N, else Y'Y with eigenvectors mapped through Y). */
FactorEstimate pc_extract(const PanelData& panel, int r);

/* eps_it = y_it - lambda_i' F_t. */
Matrix residuals(const PanelData& panel, const FactorEstimate& est);

/* Rotates (F_hat, Lambda_hat) by the orthogonal Procrustes solution toward
   the target factor matrix; the common component is unchanged. */
FactorEstimate procrustes_align(const FactorEstimate& est, const Matrix& target);

/* Flips factor/loading column pairs whose inner product with the target
   column is negative. */
FactorEstimate sign_align(const FactorEstimate& est, const Matrix& target);

}  // namespace mldfm
