#pragma once

// Shared fixtures for the test binaries: seeded design builders and small
// matrix-comparison utilities.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "core/mse.hpp"
#include "core/panel.hpp"
#include "core/pc.hpp"
#include "core/sls.hpp"

namespace mldfm::test {

inline double max_abs(const Matrix& A) { return A.cwiseAbs().maxCoeff(); }

inline double max_abs_diff(const Matrix& A, const Matrix& B) {
  return (A - B).cwiseAbs().maxCoeff();
}

/* Max-abs deviation after flipping each column of A to best match B. */
inline double max_abs_diff_up_to_sign(const Matrix& A, const Matrix& B) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < A.cols(); ++k) {
    const double plus = (A.col(k) - B.col(k)).cwiseAbs().maxCoeff();
    const double minus = (A.col(k) + B.col(k)).cwiseAbs().maxCoeff();
    worst = std::max(worst, std::min(plus, minus));
  }
  return worst;
}

inline double frob(const Matrix& A) { return A.norm(); }

inline Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = normal(rng);
  return M;
}

/* Square orthogonal matrix (Q'Q = I_k) from a seeded random draw. */
inline Matrix random_orthogonal(int k, std::uint64_t seed) {
  Matrix Q = orthonormalize(random_matrix(k, k, seed));
  return Q / std::sqrt(static_cast<double>(k));
}

/* A complete simulated design: truth plus the observed panel. */
struct Design {
  GroupStructure structure;
  FactorSet factors;
  LoadingSet loadings;
  Matrix sigma;
  PanelData panel;
};

inline Design make_design(const GroupStructure& structure, int T, double c, double tau,
                          bool heteroscedastic, std::uint64_t seed, double phi = 0.5) {
  Design d;
  d.structure = structure;
  d.factors = simulate_factors(T, structure.r(), phi, seed);
  d.loadings = simulate_loadings(structure, seed);
  IdioSpec spec = make_idio_spec(structure.N(), c, tau, heteroscedastic, seed);
  d.sigma = build_idio_cov(structure.N(), spec);
  d.panel = simulate_panel(d.factors, d.loadings, d.sigma, seed);
  return d;
}

inline Design make_dfm_design(int N, int T, int r, double c, std::uint64_t seed,
                              double tau = 0.0, bool heteroscedastic = false) {
  return make_design(GroupStructure::dfm(N, r), T, c, tau, heteroscedastic, seed);
}

inline GroupStructure ml_structure(int group_size = 25) {
  return GroupStructure::make({group_size, group_size}, 1, {1, 1});
}

inline std::string to_text(const Matrix& A) {
  std::string out;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) out += std::to_string(A(i, j)) + " ";
    out += "\n";
  }
  return out;
}

}  // namespace mldfm::test
