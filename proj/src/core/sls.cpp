#include "core/sls.hpp"

#include <cmath>

namespace mldfm {

Matrix MlFactorEstimate::stacked_factors() const {
  const int T = static_cast<int>(G_hat.rows() > 0 ? G_hat.rows() : L_hat.at(0).rows());
  Matrix F(T, structure.r());
  F.leftCols(structure.r_g) = G_hat;
  for (int s = 0; s < structure.S; ++s)
    if (structure.r_s[s] > 0) F.middleCols(structure.local_col(s), structure.r_s[s]) = L_hat[s];
  return F;
}

Matrix MlFactorEstimate::stacked_loadings() const {
  Matrix Lambda = Matrix::Zero(structure.N(), structure.r());
  Lambda.leftCols(structure.r_g) = Lambda_g_hat;
  for (int s = 0; s < structure.S; ++s)
    if (structure.r_s[s] > 0)
      Lambda.block(structure.group_offset(s), structure.local_col(s), structure.group_sizes[s],
                   structure.r_s[s]) = Lambda_l_hat[s];
  return Lambda;
}

FactorEstimate MlFactorEstimate::as_factor_estimate() const {
  FactorEstimate est;
  est.F_hat = stacked_factors();
  est.Lambda_hat = stacked_loadings();
  est.estimator = Estimator::SLS;
  est.iterations = iterations;
  est.rss_trace = rss_trace;
  est.converged = converged;
  return est;
}

namespace {

/* Extracts k PC factors from a slice of the panel. */
Matrix slice_pc_factors(const Eigen::Ref<const Matrix>& block, int k) {
  PanelData sub;
  sub.Y = block;
  sub.structure = GroupStructure::dfm(static_cast<int>(block.cols()), std::max(1, k));
  return pc_extract(sub, k).F_hat;
}

}  // namespace

CcaInit cca_init(const PanelData& panel) {
  panel.validate();
  const GroupStructure& st = panel.structure;
  const int T = panel.T();
  for (int s = 0; s < st.S; ++s)
    if (st.r_g + st.r_s[s] >= std::min(st.group_sizes[s], T))
      throw Error::argument("cca_init: r_g + r_s must be < min(N_s, T) in every group");

  CcaInit init;
  if (st.r_g > 0) {
    if (st.S == 1) {
      /* A single group leaves no cross-group correlation to maximize; the
         pooled-PC initialization is the natural (and standard) choice. */
      init.G0 = slice_pc_factors(panel.Y, st.r_g);
      init.leading_canonical_correlation = 1.0;
    } else {
      int K = 0;
      std::vector<Matrix> group_factors(st.S);
      for (int s = 0; s < st.S; ++s) {
        group_factors[s] = slice_pc_factors(panel.group(s), st.r_g + st.r_s[s]);
        K += st.r_g + st.r_s[s];
      }
      /* MAXVAR-style generalized CCA: with each block orthonormal, the leading
         eigenvectors of the stacked Gram Z'Z give the combinations of maximal
         cross-set correlation; S = 2 reduces to classical CCA. */
      Matrix Z(T, K);
      int col = 0;
      const double inv_sqrtT = 1.0 / std::sqrt(static_cast<double>(T));
      for (int s = 0; s < st.S; ++s) {
        Z.middleCols(col, group_factors[s].cols()) = inv_sqrtT * group_factors[s];
        col += static_cast<int>(group_factors[s].cols());
      }
      SymEig eig = sym_eig_desc(Z.transpose() * Z);
      init.leading_canonical_correlation = (eig.values(0) - 1.0) / (st.S - 1.0);
      if (init.leading_canonical_correlation < 1e-8) {
        log_warn("cca_init: degenerate canonical correlations; falling back to pooled PC");
        init.fallback = true;
        init.G0 = slice_pc_factors(panel.Y, st.r_g);
      } else {
        init.G0 = orthonormalize(Z * eig.vectors.leftCols(st.r_g));
      }
    }
  } else {
    init.G0.resize(T, 0);
  }

  /* Residualize on G0 (orthonormal, so the projection is G0 G0'Y/T) and pull
     the group-specific starting factors from the residuals. */
  Matrix U = panel.Y;
  if (st.r_g > 0) U -= init.G0 * (init.G0.transpose() * panel.Y) / static_cast<double>(T);
  init.L0.resize(st.S);
  for (int s = 0; s < st.S; ++s) {
    if (st.r_s[s] > 0)
      init.L0[s] = slice_pc_factors(U.middleCols(st.group_offset(s), st.group_sizes[s]), st.r_s[s]);
    else
      init.L0[s].resize(T, 0);
  }
  return init;
}

std::pair<Matrix, std::vector<Matrix>> update_loadings(const PanelData& panel, const Matrix& G,
                                                       const std::vector<Matrix>& L) {
  const GroupStructure& st = panel.structure;
  const int T = panel.T();
  Matrix Lambda_g(panel.N(), st.r_g);
  std::vector<Matrix> Lambda_l(st.S);
  for (int s = 0; s < st.S; ++s) {
    const int k = st.r_g + st.r_s[s];
    Matrix X(T, k);
    X.leftCols(st.r_g) = G;
    if (st.r_s[s] > 0) X.rightCols(st.r_s[s]) = L[s];
    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    if (k > 0 && qr.rank() < k)
      throw Error::numeric("update_loadings: collinear factor regressors in group " +
                           std::to_string(s + 1));
    Matrix coef = qr.solve(panel.group(s));  // k x N_s
    Lambda_g.middleRows(st.group_offset(s), st.group_sizes[s]) = coef.topRows(st.r_g).transpose();
    Lambda_l[s] = coef.bottomRows(st.r_s[s]).transpose();
  }
  return {std::move(Lambda_g), std::move(Lambda_l)};
}

std::pair<Matrix, std::vector<Matrix>> update_factors(const PanelData& panel,
                                                      const Matrix& Lambda_g,
                                                      const std::vector<Matrix>& Lambda_l) {
  const GroupStructure& st = panel.structure;
  const int r = st.r();
  Matrix Lambda = Matrix::Zero(panel.N(), r);
  Lambda.leftCols(st.r_g) = Lambda_g;
  for (int s = 0; s < st.S; ++s)
    if (st.r_s[s] > 0)
      Lambda.block(st.group_offset(s), st.local_col(s), st.group_sizes[s], st.r_s[s]) = Lambda_l[s];

  Eigen::LLT<Matrix> llt(Lambda.transpose() * Lambda);
  if (llt.info() != Eigen::Success)
    throw Error::numeric("update_factors: stacked loading matrix is rank-deficient");
  Matrix F = llt.solve(Lambda.transpose() * panel.Y.transpose()).transpose();  // T x r

  Matrix G = F.leftCols(st.r_g);
  std::vector<Matrix> L(st.S);
  for (int s = 0; s < st.S; ++s) L[s] = F.middleCols(st.local_col(s), st.r_s[s]);
  return {std::move(G), std::move(L)};
}

namespace {

double rss_value(const PanelData& panel, const Matrix& G, const std::vector<Matrix>& L,
                 const Matrix& Lambda_g, const std::vector<Matrix>& Lambda_l) {
  const GroupStructure& st = panel.structure;
  double rss = 0.0;
  for (int s = 0; s < st.S; ++s) {
    Matrix fit = G * Lambda_g.middleRows(st.group_offset(s), st.group_sizes[s]).transpose();
    if (st.r_s[s] > 0) fit += L[s] * Lambda_l[s].transpose();
    rss += (panel.group(s) - fit).squaredNorm();
  }
  return rss;
}

}  // namespace

MlFactorEstimate sls_estimate(const PanelData& panel, double tol, int max_iter) {
  if (!(tol > 0.0)) throw Error::argument("sls_estimate: tol must be > 0");
  if (max_iter < 1) throw Error::argument("sls_estimate: max_iter must be >= 1");
  panel.validate();

  CcaInit init = cca_init(panel);
  MlFactorEstimate est;
  est.structure = panel.structure;
  est.G_hat = init.G0;
  est.L_hat = init.L0;
  est.leading_canonical_correlation = init.leading_canonical_correlation;
  est.cca_fallback = init.fallback;

  double rss_prev = 0.0;
  for (int k = 0; k < max_iter; ++k) {
    auto [Lambda_g, Lambda_l] = update_loadings(panel, est.G_hat, est.L_hat);
    auto [G, L] = update_factors(panel, Lambda_g, Lambda_l);
    est.Lambda_g_hat = std::move(Lambda_g);
    est.Lambda_l_hat = std::move(Lambda_l);
    est.G_hat = std::move(G);
    est.L_hat = std::move(L);
    const double rss = rss_value(panel, est.G_hat, est.L_hat, est.Lambda_g_hat, est.Lambda_l_hat);
    est.rss_trace.push_back(rss);
    est.iterations = k + 1;
    if (k > 0 && std::abs(rss - rss_prev) / std::max(rss_prev, 1e-12) < tol) {
      est.converged = true;
      break;
    }
    rss_prev = rss;
  }

  /* Make the loadings the exact LS fit of the final factors before imposing
     the identification; the last half-step updated factors only. */
  auto [Lambda_g, Lambda_l] = update_loadings(panel, est.G_hat, est.L_hat);
  est.Lambda_g_hat = std::move(Lambda_g);
  est.Lambda_l_hat = std::move(Lambda_l);
  return finalize_identification(est);
}

MlFactorEstimate finalize_identification(const MlFactorEstimate& est) {
  const GroupStructure& st = est.structure;
  st.validate();
  MlFactorEstimate out = est;
  const double T = static_cast<double>(out.G_hat.rows() > 0 ? out.G_hat.rows()
                                                            : out.L_hat.at(0).rows());

  if (st.r_g > 0) {
    /* (i) Orthonormalize G; G = Q R with R = Q'G/T, so the loadings absorb R'. */
    Matrix Q = orthonormalize(out.G_hat);
    Matrix R = Q.transpose() * out.G_hat / T;
    out.G_hat = Q;
    out.Lambda_g_hat = out.Lambda_g_hat * R.transpose();

    /* (ii) Residualize each L_s on G; the projected part G B_s moves into the
       group's global loadings (fit unchanged). */
    for (int s = 0; s < st.S; ++s) {
      if (st.r_s[s] == 0) continue;
      Matrix B = out.G_hat.transpose() * out.L_hat[s] / T;  // r_g x r_s
      out.Lambda_g_hat.middleRows(st.group_offset(s), st.group_sizes[s]) +=
          out.Lambda_l_hat[s] * B.transpose();
      out.L_hat[s] -= out.G_hat * B;
    }
  }

  /* (iii) Orthonormalize each L_s, loadings absorbing the rotation. */
  for (int s = 0; s < st.S; ++s) {
    if (st.r_s[s] == 0) continue;
    Matrix Q = orthonormalize(out.L_hat[s]);
    Matrix R = Q.transpose() * out.L_hat[s] / T;
    out.L_hat[s] = Q;
    out.Lambda_l_hat[s] = out.Lambda_l_hat[s] * R.transpose();
  }

  /* (iv) Rotate within each block so the loading Gram is diagonal with
     decreasing entries; orthogonal rotations keep the factors orthonormal. */
  if (st.r_g > 1) {
    SymEig eig = sym_eig_desc(out.Lambda_g_hat.transpose() * out.Lambda_g_hat);
    out.G_hat = out.G_hat * eig.vectors;
    out.Lambda_g_hat = out.Lambda_g_hat * eig.vectors;
  }
  for (int s = 0; s < st.S; ++s) {
    if (st.r_s[s] <= 1) continue;
    SymEig eig = sym_eig_desc(out.Lambda_l_hat[s].transpose() * out.Lambda_l_hat[s]);
    out.L_hat[s] = out.L_hat[s] * eig.vectors;
    out.Lambda_l_hat[s] = out.Lambda_l_hat[s] * eig.vectors;
  }

  /* (v) Deterministic signs: the largest-magnitude loading entry of every
     column is positive.  This also makes finalization idempotent. */
  for (int k = 0; k < st.r_g; ++k) {
    Eigen::Index imax;
    out.Lambda_g_hat.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.Lambda_g_hat(imax, k) < 0.0) {
      out.Lambda_g_hat.col(k) = -out.Lambda_g_hat.col(k);
      out.G_hat.col(k) = -out.G_hat.col(k);
    }
  }
  for (int s = 0; s < st.S; ++s) {
    for (int k = 0; k < st.r_s[s]; ++k) {
      Eigen::Index imax;
      out.Lambda_l_hat[s].col(k).cwiseAbs().maxCoeff(&imax);
      if (out.Lambda_l_hat[s](imax, k) < 0.0) {
        out.Lambda_l_hat[s].col(k) = -out.Lambda_l_hat[s].col(k);
        out.L_hat[s].col(k) = -out.L_hat[s].col(k);
      }
    }
  }
  return out;
}

}  // namespace mldfm
