#pragma once

#include <utility>
#include <vector>

#include "core/pc.hpp"

namespace mldfm {

struct MlFactorEstimate {
  GroupStructure structure;
  Matrix G_hat;                       // T x r_g
  std::vector<Matrix> L_hat;          // per group, T x r_s
  Matrix Lambda_g_hat;                // N x r_g
  std::vector<Matrix> Lambda_l_hat;   // per group, N_s x r_s
  int iterations = 0;
  std::vector<double> rss_trace;
  bool converged = false;
  double leading_canonical_correlation = 0.0;
  bool cca_fallback = false;

  Matrix stacked_factors() const;   // T x r in [G, L_1, ..., L_S] column order
  Matrix stacked_loadings() const;  // N x r with the block-zero pattern
  FactorEstimate as_factor_estimate() const;
};

struct CcaInit {
  Matrix G0;               // T x r_g, orthonormalized
  std::vector<Matrix> L0;  // per group, T x r_s
  double leading_canonical_correlation = 0.0;
  bool fallback = false;   // pooled-PC fallback used for G0
};

/* Step 1: per-group PC of r_g + r_s factors, generalized CCA across the S
   group factor sets for the global factors, then per-group PC of the
   G0-residualized panel for the local factors. */
CcaInit cca_init(const PanelData& panel);

/* Step 2: per-series time-series LS of Y_s on [G, L_s]; the zero pattern is
   structural (series in group s never load on other groups' factors). */
std::pair<Matrix, std::vector<Matrix>> update_loadings(const PanelData& panel, const Matrix& G,
                                                       const std::vector<Matrix>& L);

/* Step 3: cross-sectional LS per period on the stacked loading matrix. */
std::pair<Matrix, std::vector<Matrix>> update_factors(const PanelData& panel,
                                                      const Matrix& Lambda_g,
                                                      const std::vector<Matrix>& Lambda_l);

/* Step 4: alternate steps 2-3 from the CCA initialization until the relative
   RSS change falls below tol, then impose the identifying restrictions. */
MlFactorEstimate sls_estimate(const PanelData& panel, double tol = 1e-8, int max_iter = 500);

/* Rotates the estimate onto the identified representative: G orthonormal,
   L_s orthonormal and orthogonal to G, loading Gram blocks diagonal with
   decreasing entries, deterministic column signs.  The common component is
   preserved to machine precision, and the map is idempotent. */
MlFactorEstimate finalize_identification(const MlFactorEstimate& est);

}  // namespace mldfm
