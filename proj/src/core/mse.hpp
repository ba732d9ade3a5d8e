#pragma once

// Finite-sample asymptotic MSE of estimated factors: the true-parameter
// sandwich, the heteroscedasticity-robust (HR) and thresholded-covariance
// (FPR) plug-in estimators of Gamma, the subsampling correction (HRS/FPRS),
// and chi-square confidence regions.

#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/panel.hpp"
#include "core/pc.hpp"

namespace mldfm {

enum class MseVariant { True, HR, HRS, FPR, FPRS };

/* Canonical tag used in file outputs: TRUE, HR, HRS, FPR, FPRS. */
const char* to_string(MseVariant variant);

/* Parses a variant tag, case-insensitive ("hr", "FPRS", ...). */
MseVariant parse_variant(const std::string& text);

/* Gamma = plim (1/N) sum_ij lambda_i lambda_j' E(eps_it eps_jt), the meat of
   the asymptotic MSE sandwich.  t < 0 marks a time-invariant estimate. */
struct GammaEstimate {
  Matrix value;  // r x r, symmetric PSD
  MseVariant variant = MseVariant::True;
  int t = -1;
};

/* Finite-sample asymptotic MSE matrix of F_hat_t. */
struct AvarEstimate {
  Matrix value;  // r x r, symmetric PSD
  MseVariant variant = MseVariant::True;
  int t = -1;
  int N = 0;
};

/* Universal-threshold configuration for the residual covariance; the
   threshold is c_ij = delta * omega_NT * sqrt(theta_hat_ij) with natural-log
   omega_NT = 1/sqrt(N) + sqrt(ln(N)/T). */
struct ThresholdConfig {
  double delta = 2.0;
};

/* Subsampling-correction configuration: B contiguous time blocks of length
   floor(block_fraction * T), seeded starts. */
struct SubsampleConfig {
  int B = 50;
  double block_fraction = 0.75;
  std::uint64_t seed = 0;
};

/* Gamma under known parameters: (1/N) Lambda' Sigma_eps Lambda (variant TRUE,
   time-invariant under the stationary Gaussian DGP). */
GammaEstimate gamma_true(const Matrix& Lambda, const Matrix& Sigma_eps);

/* Sandwich (1/N) (Lambda_hat'Lambda_hat/N)^-1 Gamma (Lambda_hat'Lambda_hat/N)^-1.
   Throws a numeric error when the loading Gram matrix is singular. */
AvarEstimate avar(const Matrix& Lambda_hat, const GammaEstimate& gamma);

/* Heteroscedasticity-robust per-period estimator:
   (1/N) sum_i lambda_i lambda_i' eps_hat_it^2. */
GammaEstimate gamma_hr(const Matrix& Lambda_hat, const Vector& eps_hat_t, int t = -1);

/* sigma_hat_ij = (1/T) sum_t eps_hat_it eps_hat_jt. */
double sample_idio_cov(const Matrix& eps_hat, int i, int j);

/* Full sample covariance E'E/T of the residual panel. */
Matrix sample_idio_cov(const Matrix& eps_hat);

/* Universally thresholded residual covariance: entries with
   |sigma_hat_ij| < c_ij are zeroed, the diagonal is always retained, and the
   result is exactly symmetric.  theta_hat_ij = (1/T) sum_t
   (eps_it eps_jt - sigma_hat_ij)^2 uses the pre-threshold sample covariance
   inside the deviation. */
Matrix threshold_idio_cov(const Matrix& eps_hat, const ThresholdConfig& config);

/* Cross-correlation-robust estimator (1/N) Lambda_hat' Sigma_tilde Lambda_hat
   (variant FPR, time-invariant). */
GammaEstimate gamma_fpr(const Matrix& Lambda_hat, const Matrix& Sigma_tilde);

/* Optional data-driven threshold level: 2-fold cross-validation over the grid
   delta in {0, 0.5, ..., 4}, minimizing the summed Frobenius distance between
   the thresholded covariance of one half and the sample covariance of the
   other.  Ties resolve to the smallest delta. */
double select_delta(const Matrix& eps_hat);

/* Between-subsample dispersion of the re-estimated factors at each period:
   C_t = (1/B) sum_b (F_hat_t^(b) - Fbar_t)(F_hat_t^(b) - Fbar_t)'.  Each of B
   seeded contiguous time blocks re-estimates the loadings with the same
   estimator, aligns them to Lambda_full (whole-matrix Procrustes for PC;
   per-identification-block Procrustes for SLS), and recomputes every period's
   factor estimate from the full panel.  Returns T matrices r x r. */
std::vector<Matrix> subsample_dispersion(const PanelData& panel, Estimator estimator,
                                         const Matrix& Lambda_full,
                                         const SubsampleConfig& config);

/* Full subsampling-corrected Avar series: estimates the panel, forms the base
   HR (per-period) or FPR (time-invariant) Avar, and adds the between-subsample
   factor dispersion; variants HRS/FPRS.  base_variant must be HR or FPR. */
std::vector<AvarEstimate> subsample_correction(const PanelData& panel, Estimator estimator,
                                               MseVariant base_variant,
                                               const SubsampleConfig& config,
                                               const ThresholdConfig& threshold = {});

/* True iff (F - F_hat_t)' Avar^-1 (F - F_hat_t) <= chi2_{r,1-alpha}.  Throws a
   numeric error when Avar is singular. */
bool confidence_region_contains(const Vector& F_hat_t, const AvarEstimate& avar, const Vector& F,
                                double alpha);

/* p-quantile of the chi-square distribution with r degrees of freedom. */
double chi_square_quantile(int r, double p);

/* Half-width of the (1-alpha) confidence ellipsoid's bounding box along factor
   axis k: sqrt(chi2_{r,1-alpha} * Avar_kk). */
double region_half_width(const AvarEstimate& avar, int k, double alpha);

}  // namespace mldfm
