#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/linalg.hpp"
#include "core/rng.hpp"

namespace mldfm {

/* Block layout of a multi-level panel: S groups of sizes N_s, r_g global
   factors loading on every series and r_s group-specific factors loading only
   inside their group.  A plain DFM is the degenerate case S=1, r_s=[0]. */
struct GroupStructure {
  int S = 0;
  std::vector<int> group_sizes;  // N_s
  int r_g = 0;
  std::vector<int> r_s;

  int N() const;              // total series
  int r() const;              // total factors r_g + sum r_s
  int sum_r_s() const;
  int group_offset(int s) const;   // first series index of group s
  int local_col(int s) const;      // first stacked-factor column of L_s
  bool is_plain_dfm() const { return S == 1 && sum_r_s() == 0; }
  void validate() const;           // throws on invariant violations

  static GroupStructure dfm(int N, int r);
  static GroupStructure make(std::vector<int> sizes, int r_g, std::vector<int> r_s);
};

bool operator==(const GroupStructure& a, const GroupStructure& b);

/* Column labels in stacked factor order: F1..Fr for a plain DFM, otherwise
   G (or G1..G_{r_g}) followed by L1, L2, ... (or Ls_j for r_s > 1). */
std::vector<std::string> factor_labels(const GroupStructure& structure);

enum class FactorKind { global, group, pooled };

struct FactorSet {
  Matrix F;  // T x r
  FactorKind kind = FactorKind::pooled;
};

struct LoadingSet {
  Matrix Lambda;  // N x r, stacked with the block-zero pattern
  GroupStructure structure;
  BoolMatrix zero_mask;  // true = structurally zero

  Eigen::Block<const Matrix> global_block() const {
    return Lambda.block(0, 0, Lambda.rows(), structure.r_g);
  }
  Eigen::Block<const Matrix> local_block(int s) const {
    return Lambda.block(structure.group_offset(s), structure.local_col(s),
                        structure.group_sizes[s], structure.r_s[s]);
  }
};

/* Idiosyncratic covariance specification: sigma_i^2 = c*u_i on the diagonal,
   Toeplitz cross-correlation sigma_ij = sigma_i sigma_j tau^|i-j|, then a
   symmetric permutation of the series order. */
struct IdioSpec {
  double c = 0.25;
  double tau = 0.0;
  bool heteroscedastic = false;
  std::vector<double> u;        // per-series multipliers (1 when homoscedastic)
  std::vector<int> permutation; // result(i,j) = base(perm[i], perm[j])

  std::vector<double> variances() const;  // sigma_i^2 = c*u_i
};

struct PanelData {
  Matrix Y;  // T x N, columns ordered group-by-group
  GroupStructure structure;

  int T() const { return static_cast<int>(Y.rows()); }
  int N() const { return static_cast<int>(Y.cols()); }
  Eigen::Block<const Matrix> group(int s) const {
    return Y.block(0, structure.group_offset(s), Y.rows(), structure.group_sizes[s]);
  }
  void validate() const;
};

/* r independent AR(1) paths (stationary initialization, innovation variance
   1-phi^2), drawn column by column from the given engine. */
Matrix simulate_ar1_paths(int T, int r, double phi, Rng& rng);

/* AR(1) paths jointly orthonormalized so F'F/T = I_r. */
FactorSet simulate_factors(int T, int r, double phi, std::uint64_t seed);

/* Raw U(0.5,1) draws with the block-zero pattern, before orthogonalization. */
Matrix simulate_raw_loadings(const GroupStructure& structure, Rng& rng);

/* U(0.5,1) draws, zero pattern imposed, then block-respecting unnormalized
   Gram-Schmidt: global columns sequentially over all rows; each group's local
   columns against the group's slice of the global columns and then against
   each other.  Column norms are not rescaled - the shrinking norms are what
   produce the decreasing factor strength of the simulation designs. */
LoadingSet simulate_loadings(const GroupStructure& structure, std::uint64_t seed);

/* Draws u (U(0.5,2) when heteroscedastic, else ones) and a uniform random
   permutation of the series order. */
IdioSpec make_idio_spec(int N, double c, double tau, bool heteroscedastic, std::uint64_t seed);

Matrix build_idio_cov(int N, const IdioSpec& spec);

/* Y_t = Lambda F_t + eps_t with eps_t ~ N(0, Sigma_eps) i.i.d. over t.
   A zero Sigma_eps is accepted as a test-only degenerate input. */
PanelData simulate_panel(const FactorSet& factors, const LoadingSet& loadings,
                         const Matrix& sigma_eps, std::uint64_t seed);

/* Noise panel E = Z L' from a pre-factorized covariance (L lower Cholesky);
   used by the Monte Carlo loop to avoid refactorizing per replication. */
Matrix simulate_noise(int T, const Matrix& chol_lower_factor, Rng& rng);

/* Lambda' Sigma_eps^{-1} Lambda: diagonal entries measure factor strength. */
Matrix factor_strength(const LoadingSet& loadings, const Matrix& sigma_eps);

}  // namespace mldfm
