#include "core/mse.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cctype>
#include <cmath>

#include "core/linalg.hpp"
#include "core/rng.hpp"
#include "core/sls.hpp"

namespace mldfm {

const char* to_string(MseVariant variant) {
  switch (variant) {
    case MseVariant::True: return "TRUE";
    case MseVariant::HR: return "HR";
    case MseVariant::HRS: return "HRS";
    case MseVariant::FPR: return "FPR";
    case MseVariant::FPRS: return "FPRS";
  }
  throw Error::internal("unknown MseVariant");
}

MseVariant parse_variant(const std::string& text) {
  std::string up;
  up.reserve(text.size());
  for (char ch : text) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  if (up == "TRUE") return MseVariant::True;
  if (up == "HR") return MseVariant::HR;
  if (up == "HRS") return MseVariant::HRS;
  if (up == "FPR") return MseVariant::FPR;
  if (up == "FPRS") return MseVariant::FPRS;
  throw Error::argument("unknown MSE variant \"" + text +
                        "\" (expected true, hr, hrs, fpr, or fprs)");
}

namespace {

Matrix symmetrized(const Matrix& A) { return 0.5 * (A + A.transpose()); }

void require_symmetric(const Matrix& A, const char* what) {
  if (A.rows() != A.cols() || (A - A.transpose()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + A.cwiseAbs().maxCoeff()))
    throw Error::argument(std::string(what) + " must be a symmetric square matrix");
}

/* Spectral inverse of a symmetric positive definite matrix; throws `context`
   as a numeric error when it is singular to working precision. */
Matrix spd_inverse(const Matrix& A, const std::string& context) {
  SymEig eig = sym_eig_desc(A);
  const int n = static_cast<int>(A.rows());
  if (n == 0) return A;
  if (!(eig.values(0) > 0.0) || eig.values(n - 1) <= 1e-13 * eig.values(0))
    throw Error::numeric(context);
  return eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.transpose();
}

}  // namespace

GammaEstimate gamma_true(const Matrix& Lambda, const Matrix& Sigma_eps) {
  if (Sigma_eps.rows() != Lambda.rows())
    throw Error::argument("gamma_true: Lambda has " + std::to_string(Lambda.rows()) +
                          " rows but Sigma_eps is " + std::to_string(Sigma_eps.rows()) + "x" +
                          std::to_string(Sigma_eps.cols()));
  require_symmetric(Sigma_eps, "gamma_true: Sigma_eps");
  const double N = static_cast<double>(Lambda.rows());
  GammaEstimate out;
  out.value = symmetrized(Lambda.transpose() * Sigma_eps * Lambda / N);
  out.variant = MseVariant::True;
  return out;
}

AvarEstimate avar(const Matrix& Lambda_hat, const GammaEstimate& gamma) {
  const int r = static_cast<int>(Lambda_hat.cols());
  if (gamma.value.rows() != r || gamma.value.cols() != r)
    throw Error::argument("avar: Gamma must be r x r with r matching the loading columns");
  const double N = static_cast<double>(Lambda_hat.rows());
  Matrix gram = symmetrized(Lambda_hat.transpose() * Lambda_hat / N);
  Matrix gram_inv = spd_inverse(gram, "avar: singular loading Gram matrix");
  AvarEstimate out;
  out.value = symmetrized(gram_inv * gamma.value * gram_inv / N);
  out.variant = gamma.variant;
  out.t = gamma.t;
  out.N = static_cast<int>(Lambda_hat.rows());
  return out;
}

GammaEstimate gamma_hr(const Matrix& Lambda_hat, const Vector& eps_hat_t, int t) {
  if (eps_hat_t.size() != Lambda_hat.rows())
    throw Error::argument("gamma_hr: residual vector length must match the loading rows");
  const double N = static_cast<double>(Lambda_hat.rows());
  Vector e2 = eps_hat_t.cwiseProduct(eps_hat_t);
  Matrix scaled = (Lambda_hat.array().colwise() * e2.array()).matrix();
  GammaEstimate out;
  out.value = symmetrized(Lambda_hat.transpose() * scaled / N);
  out.variant = MseVariant::HR;
  out.t = t;
  return out;
}

double sample_idio_cov(const Matrix& eps_hat, int i, int j) {
  if (eps_hat.rows() < 2) throw Error::argument("sample_idio_cov: need T >= 2");
  if (i < 0 || j < 0 || i >= eps_hat.cols() || j >= eps_hat.cols())
    throw Error::argument("sample_idio_cov: series index out of range");
  return eps_hat.col(i).dot(eps_hat.col(j)) / static_cast<double>(eps_hat.rows());
}

Matrix sample_idio_cov(const Matrix& eps_hat) {
  if (eps_hat.rows() < 2) throw Error::argument("sample_idio_cov: need T >= 2");
  return symmetrized(eps_hat.transpose() * eps_hat / static_cast<double>(eps_hat.rows()));
}

Matrix threshold_idio_cov(const Matrix& eps_hat, const ThresholdConfig& config) {
  if (!(config.delta >= 0.0) || !std::isfinite(config.delta))
    throw Error::argument("threshold_idio_cov: delta must be finite and >= 0");
  const int T = static_cast<int>(eps_hat.rows());
  const int N = static_cast<int>(eps_hat.cols());
  if (T < 2 || N < 1) throw Error::argument("threshold_idio_cov: need T >= 2 and N >= 1");

  Matrix sigma = sample_idio_cov(eps_hat);
  /* theta_hat_ij = (1/T) sum_t (e_it e_jt - sigma_ij)^2 = Q_ij - sigma_ij^2
     with Q the second moment of the products; clamp fp negatives. */
  Matrix E2 = eps_hat.cwiseProduct(eps_hat);
  Matrix Q = symmetrized(E2.transpose() * E2 / static_cast<double>(T));
  Matrix theta = (Q - sigma.cwiseProduct(sigma)).cwiseMax(0.0);
  const double omega = 1.0 / std::sqrt(static_cast<double>(N)) +
                       std::sqrt(std::log(static_cast<double>(N)) / static_cast<double>(T));
  Matrix cutoff = config.delta * omega * theta.cwiseSqrt();

  Matrix out = (sigma.cwiseAbs().array() >= cutoff.array()).select(sigma, Matrix::Zero(N, N));
  out.diagonal() = sigma.diagonal();  // variances are never thresholded
  return out;
}

GammaEstimate gamma_fpr(const Matrix& Lambda_hat, const Matrix& Sigma_tilde) {
  if (Sigma_tilde.rows() != Lambda_hat.rows())
    throw Error::argument("gamma_fpr: Sigma_tilde dimension must match the loading rows");
  require_symmetric(Sigma_tilde, "gamma_fpr: Sigma_tilde");
  const double N = static_cast<double>(Lambda_hat.rows());
  GammaEstimate out;
  out.value = symmetrized(Lambda_hat.transpose() * Sigma_tilde * Lambda_hat / N);
  out.variant = MseVariant::FPR;
  return out;
}

double select_delta(const Matrix& eps_hat) {
  const int T = static_cast<int>(eps_hat.rows());
  if (T < 4) throw Error::argument("select_delta: need T >= 4 for 2-fold cross-validation");
  const int half = T / 2;
  const Matrix fold1 = eps_hat.topRows(half);
  const Matrix fold2 = eps_hat.bottomRows(T - half);
  const Matrix cov1 = sample_idio_cov(fold1);
  const Matrix cov2 = sample_idio_cov(fold2);

  double best_delta = 0.0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 8; ++k) {
    const double delta = 0.5 * k;
    ThresholdConfig cfg{delta};
    const double loss = (threshold_idio_cov(fold1, cfg) - cov2).squaredNorm() +
                        (threshold_idio_cov(fold2, cfg) - cov1).squaredNorm();
    if (loss < best_loss) {
      best_loss = loss;
      best_delta = delta;
    }
  }
  return best_delta;
}

namespace {

/* Aligns subsample loadings to the full-sample ones: one Procrustes rotation
   for PC; for SLS one per identified block so the zero pattern is preserved. */
Matrix align_loadings(const Matrix& Lambda_sub, const Matrix& Lambda_full, Estimator estimator,
                      const GroupStructure& st) {
  if (estimator == Estimator::PC) return Lambda_sub * procrustes_rotation(Lambda_sub, Lambda_full);
  Matrix out = Matrix::Zero(Lambda_sub.rows(), Lambda_sub.cols());
  if (st.r_g > 0) {
    Matrix block = Lambda_sub.leftCols(st.r_g);
    out.leftCols(st.r_g) = block * procrustes_rotation(block, Lambda_full.leftCols(st.r_g));
  }
  for (int s = 0; s < st.S; ++s) {
    if (st.r_s[s] == 0) continue;
    const int rows = st.group_sizes[s];
    const int row0 = st.group_offset(s);
    const int col0 = st.local_col(s);
    Matrix block = Lambda_sub.block(row0, col0, rows, st.r_s[s]);
    out.block(row0, col0, rows, st.r_s[s]) =
        block * procrustes_rotation(block, Lambda_full.block(row0, col0, rows, st.r_s[s]));
  }
  return out;
}

}  // namespace

std::vector<Matrix> subsample_dispersion(const PanelData& panel, Estimator estimator,
                                         const Matrix& Lambda_full,
                                         const SubsampleConfig& config) {
  panel.validate();
  const GroupStructure& st = panel.structure;
  const int T = panel.T();
  const int r = st.r();
  if (Lambda_full.rows() != panel.N() || Lambda_full.cols() != r)
    throw Error::argument("subsample_dispersion: Lambda_full must be N x r");
  if (config.B < 1) throw Error::argument("subsample_dispersion: B must be >= 1");
  if (!(config.block_fraction > 0.0) || config.block_fraction > 1.0)
    throw Error::argument("subsample_dispersion: block_fraction must be in (0, 1]");
  const int block_len = static_cast<int>(std::floor(config.block_fraction * T));
  if (block_len < r + 1)
    throw Error::argument("subsample_dispersion: infeasible block length " +
                          std::to_string(block_len) + " (need >= r + 1 = " +
                          std::to_string(r + 1) + ")");

  auto rng = make_rng(config.seed, stream::subsample);
  std::uniform_int_distribution<int> start_dist(0, T - block_len);

  std::vector<Matrix> F_sub(config.B);
  for (int b = 0; b < config.B; ++b) {
    const int start = start_dist(rng);
    PanelData sub;
    sub.Y = panel.Y.middleRows(start, block_len);
    sub.structure = st;
    Matrix Lambda_b;
    if (estimator == Estimator::PC)
      Lambda_b = pc_extract(sub, r).Lambda_hat;
    else
      Lambda_b = sls_estimate(sub).stacked_loadings();
    Matrix aligned = align_loadings(Lambda_b, Lambda_full, estimator, st);
    Matrix gram_inv =
        spd_inverse(symmetrized(aligned.transpose() * aligned),
                    "subsample_dispersion: rank-deficient subsample loadings");
    F_sub[b] = panel.Y * aligned * gram_inv;  // T x r, full-sample periods
  }

  Matrix mean = Matrix::Zero(T, r);
  for (const Matrix& F : F_sub) mean += F;
  mean /= static_cast<double>(config.B);

  std::vector<Matrix> C(T, Matrix::Zero(r, r));
  for (const Matrix& F : F_sub) {
    for (int t = 0; t < T; ++t) {
      Vector d = (F.row(t) - mean.row(t)).transpose();
      C[t] += d * d.transpose();
    }
  }
  for (Matrix& Ct : C) Ct /= static_cast<double>(config.B);
  return C;
}

std::vector<AvarEstimate> subsample_correction(const PanelData& panel, Estimator estimator,
                                               MseVariant base_variant,
                                               const SubsampleConfig& config,
                                               const ThresholdConfig& threshold) {
  if (base_variant != MseVariant::HR && base_variant != MseVariant::FPR)
    throw Error::argument("subsample_correction: base variant must be HR or FPR");
  panel.validate();
  const int T = panel.T();
  const int r = panel.structure.r();

  FactorEstimate est = estimator == Estimator::PC
                           ? pc_extract(panel, r)
                           : sls_estimate(panel).as_factor_estimate();
  Matrix E = residuals(panel, est);

  std::vector<Matrix> base(T);
  if (base_variant == MseVariant::HR) {
    for (int t = 0; t < T; ++t)
      base[t] = avar(est.Lambda_hat, gamma_hr(est.Lambda_hat, E.row(t).transpose(), t)).value;
  } else {
    Matrix fpr =
        avar(est.Lambda_hat, gamma_fpr(est.Lambda_hat, threshold_idio_cov(E, threshold))).value;
    for (int t = 0; t < T; ++t) base[t] = fpr;
  }

  std::vector<Matrix> C = subsample_dispersion(panel, estimator, est.Lambda_hat, config);

  std::vector<AvarEstimate> out(T);
  for (int t = 0; t < T; ++t) {
    out[t].value = base[t] + C[t];
    out[t].variant = base_variant == MseVariant::HR ? MseVariant::HRS : MseVariant::FPRS;
    out[t].t = t;
    out[t].N = panel.N();
  }
  return out;
}

bool confidence_region_contains(const Vector& F_hat_t, const AvarEstimate& avar, const Vector& F,
                                double alpha) {
  const int r = static_cast<int>(F_hat_t.size());
  if (avar.value.rows() != r || avar.value.cols() != r || F.size() != r)
    throw Error::argument("confidence_region_contains: dimension mismatch");
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw Error::argument("confidence_region_contains: alpha must lie in (0, 1)");
  Matrix inv = spd_inverse(avar.value, "confidence_region_contains: singular Avar matrix");
  Vector d = F - F_hat_t;
  const double quad = d.dot(inv * d);
  return quad <= chi_square_quantile(r, 1.0 - alpha);
}

double chi_square_quantile(int r, double p) {
  if (r < 1) throw Error::argument("chi_square_quantile: degrees of freedom must be >= 1");
  if (!(p > 0.0) || !(p < 1.0)) throw Error::argument("chi_square_quantile: p must lie in (0, 1)");
  boost::math::chi_squared dist(static_cast<double>(r));
  return boost::math::quantile(dist, p);
}

double region_half_width(const AvarEstimate& avar, int k, double alpha) {
  const int r = static_cast<int>(avar.value.rows());
  if (k < 0 || k >= r) throw Error::argument("region_half_width: factor index out of range");
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw Error::argument("region_half_width: alpha must lie in (0, 1)");
  return std::sqrt(chi_square_quantile(r, 1.0 - alpha) * avar.value(k, k));
}

}  // namespace mldfm
