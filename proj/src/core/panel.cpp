#include "core/panel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mldfm {

int GroupStructure::N() const {
  return std::accumulate(group_sizes.begin(), group_sizes.end(), 0);
}

int GroupStructure::sum_r_s() const { return std::accumulate(r_s.begin(), r_s.end(), 0); }

int GroupStructure::r() const { return r_g + sum_r_s(); }

int GroupStructure::group_offset(int s) const {
  return std::accumulate(group_sizes.begin(), group_sizes.begin() + s, 0);
}

int GroupStructure::local_col(int s) const {
  return r_g + std::accumulate(r_s.begin(), r_s.begin() + s, 0);
}

void GroupStructure::validate() const {
  if (S < 1) throw Error::config("group structure: S must be >= 1");
  if (static_cast<int>(group_sizes.size()) != S)
    throw Error::config("group structure: group_sizes must have one entry per group");
  if (static_cast<int>(r_s.size()) != S)
    throw Error::config("group structure: r_s must have one entry per group");
  for (int s = 0; s < S; ++s) {
    if (group_sizes[s] < 1) throw Error::config("group structure: every group_sizes entry must be >= 1");
    if (r_s[s] < 0) throw Error::config("group structure: r_s entries must be >= 0");
  }
  if (r_g < 0) throw Error::config("group structure: r_g must be >= 0");
  if (r() >= N()) throw Error::config("group structure: total factor count r must be < N");
  for (int s = 0; s < S; ++s) {
    if (r_g + r_s[s] >= group_sizes[s])
      throw Error::config("group structure: r_g + r_s must be < group_sizes within every group");
  }
}

GroupStructure GroupStructure::dfm(int N, int r) {
  GroupStructure g;
  g.S = 1;
  g.group_sizes = {N};
  g.r_g = r;
  g.r_s = {0};
  g.validate();
  return g;
}

GroupStructure GroupStructure::make(std::vector<int> sizes, int r_g, std::vector<int> r_s) {
  GroupStructure g;
  g.S = static_cast<int>(sizes.size());
  g.group_sizes = std::move(sizes);
  g.r_g = r_g;
  g.r_s = std::move(r_s);
  g.validate();
  return g;
}

bool operator==(const GroupStructure& a, const GroupStructure& b) {
  return a.S == b.S && a.group_sizes == b.group_sizes && a.r_g == b.r_g && a.r_s == b.r_s;
}

std::vector<std::string> factor_labels(const GroupStructure& structure) {
  std::vector<std::string> labels;
  if (structure.is_plain_dfm()) {
    for (int k = 0; k < structure.r_g; ++k) labels.push_back("F" + std::to_string(k + 1));
    return labels;
  }
  for (int k = 0; k < structure.r_g; ++k)
    labels.push_back(structure.r_g == 1 ? "G" : "G" + std::to_string(k + 1));
  for (int s = 0; s < structure.S; ++s)
    for (int j = 0; j < structure.r_s[s]; ++j)
      labels.push_back(structure.r_s[s] == 1 ? "L" + std::to_string(s + 1)
                                             : "L" + std::to_string(s + 1) + "_" + std::to_string(j + 1));
  return labels;
}

std::vector<double> IdioSpec::variances() const {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = c * u[i];
  return v;
}

void PanelData::validate() const {
  structure.validate();
  if (N() != structure.N()) throw Error::argument("panel: column count does not match group sizes");
  if (!Y.allFinite()) throw Error::argument("panel: non-finite entries");
}

Matrix simulate_ar1_paths(int T, int r, double phi, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double se = std::sqrt(1.0 - phi * phi);
  Matrix X(T, r);
  for (int j = 0; j < r; ++j) {
    double x = normal(rng);  // stationary start, variance 1
    X(0, j) = x;
    for (int t = 1; t < T; ++t) {
      x = phi * x + se * normal(rng);
      X(t, j) = x;
    }
  }
  return X;
}

FactorSet simulate_factors(int T, int r, double phi, std::uint64_t seed) {
  if (!(std::abs(phi) < 1.0))
    throw Error::argument("simulate_factors: phi must satisfy |phi| < 1");
  if (r < 1) throw Error::argument("simulate_factors: r must be >= 1");
  if (T <= r) throw Error::argument("simulate_factors: T must exceed r");
  Rng rng = make_rng(seed, stream::factors);
  Matrix raw = simulate_ar1_paths(T, r, phi, rng);
  return FactorSet{orthonormalize(raw), FactorKind::pooled};
}

Matrix simulate_raw_loadings(const GroupStructure& structure, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.5, 1.0);
  const int N = structure.N();
  Matrix raw = Matrix::Zero(N, structure.r());
  for (int k = 0; k < structure.r_g; ++k)
    for (int i = 0; i < N; ++i) raw(i, k) = unif(rng);
  for (int s = 0; s < structure.S; ++s) {
    const int off = structure.group_offset(s);
    for (int j = 0; j < structure.r_s[s]; ++j)
      for (int i = 0; i < structure.group_sizes[s]; ++i)
        raw(off + i, structure.local_col(s) + j) = unif(rng);
  }
  return raw;
}

namespace {

/* Subtracts from `target` its projections on each column of `basis`, without
   renormalizing.  Columns of `basis` are assumed already orthogonalized. */
void project_out(Eigen::Ref<Eigen::VectorXd> target, const Eigen::Ref<const Matrix>& basis) {
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    const double denom = basis.col(k).squaredNorm();
    if (denom <= 1e-300) throw Error::numeric("simulate_loadings: degenerate column during orthogonalization");
    target -= (basis.col(k).dot(target) / denom) * basis.col(k);
  }
}

}  // namespace

LoadingSet simulate_loadings(const GroupStructure& structure, std::uint64_t seed) {
  structure.validate();
  Rng rng = make_rng(seed, stream::loadings);
  Matrix Lambda = simulate_raw_loadings(structure, rng);
  const int N = structure.N();

  // Global block: sequential unnormalized Gram-Schmidt over all rows.
  for (int j = 1; j < structure.r_g; ++j)
    project_out(Lambda.col(j), Lambda.leftCols(j));

  // Local blocks: within the group's rows, orthogonalize against the group's
  // slice of the global columns and against earlier local columns.  The global
  // slices are not mutually orthogonal inside one group (they were
  // orthogonalized over all rows), so project onto their joint span via least
  // squares rather than column by column.
  for (int s = 0; s < structure.S; ++s) {
    const int off = structure.group_offset(s);
    const int n_s = structure.group_sizes[s];
    const int col0 = structure.local_col(s);
    for (int j = 0; j < structure.r_s[s]; ++j) {
      auto target = Lambda.block(off, col0 + j, n_s, 1).col(0);
      const int k = structure.r_g + j;
      if (k == 0) continue;
      Matrix basis(n_s, k);
      basis.leftCols(structure.r_g) = Lambda.block(off, 0, n_s, structure.r_g);
      if (j > 0) basis.rightCols(j) = Lambda.block(off, col0, n_s, j);
      Eigen::ColPivHouseholderQR<Matrix> qr(basis);
      if (qr.rank() < k)
        throw Error::numeric("simulate_loadings: degenerate column during orthogonalization");
      const Vector coef = qr.solve(Vector(target));
      target -= basis * coef;
    }
  }

  LoadingSet out;
  out.structure = structure;
  out.zero_mask = BoolMatrix::Constant(N, structure.r(), false);
  for (int s = 0; s < structure.S; ++s) {
    const int off = structure.group_offset(s);
    const int n_s = structure.group_sizes[s];
    for (int j = 0; j < structure.sum_r_s(); ++j) {
      const int col = structure.r_g + j;
      const bool owned = col >= structure.local_col(s) && col < structure.local_col(s) + structure.r_s[s];
      if (!owned)
        for (int i = 0; i < n_s; ++i) out.zero_mask(off + i, col) = true;
    }
  }
  // Enforce exact zeros on the masked entries (they are exact by construction).
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < structure.r(); ++k)
      if (out.zero_mask(i, k)) Lambda(i, k) = 0.0;
  out.Lambda = std::move(Lambda);
  return out;
}

IdioSpec make_idio_spec(int N, double c, double tau, bool heteroscedastic, std::uint64_t seed) {
  if (N < 1) throw Error::config("idiosyncratic spec: N must be >= 1");
  if (!(c >= 0.0)) throw Error::config("idiosyncratic spec: c must be >= 0");
  if (!(tau > -1.0 && tau < 1.0))
    throw Error::config("idiosyncratic spec: tau must lie in (-1, 1)");
  IdioSpec spec;
  spec.c = c;
  spec.tau = tau;
  spec.heteroscedastic = heteroscedastic;
  spec.u.assign(N, 1.0);
  if (heteroscedastic) {
    Rng rng = make_rng(seed, stream::idio_u);
    std::uniform_real_distribution<double> unif(0.5, 2.0);
    for (int i = 0; i < N; ++i) spec.u[i] = unif(rng);
  }
  spec.permutation.resize(N);
  std::iota(spec.permutation.begin(), spec.permutation.end(), 0);
  Rng perm_rng = make_rng(seed, stream::permutation);
  std::shuffle(spec.permutation.begin(), spec.permutation.end(), perm_rng);
  return spec;
}

Matrix build_idio_cov(int N, const IdioSpec& spec) {
  if (static_cast<int>(spec.u.size()) != N)
    throw Error::config("idiosyncratic spec: u must have N entries");
  if (static_cast<int>(spec.permutation.size()) != N)
    throw Error::config("idiosyncratic spec: permutation must have N entries");
  if (!(spec.c >= 0.0)) throw Error::config("idiosyncratic spec: c must be >= 0");
  if (!(spec.tau > -1.0 && spec.tau < 1.0))
    throw Error::config("idiosyncratic spec: tau must lie in (-1, 1)");
  std::vector<char> seen(N, 0);
  for (int p : spec.permutation) {
    if (p < 0 || p >= N || seen[p]) throw Error::config("idiosyncratic spec: permutation is not a permutation");
    seen[p] = 1;
  }
  for (double ui : spec.u)
    if (!(ui > 0.0)) throw Error::config("idiosyncratic spec: u entries must be > 0");

  // c = 0 is the noiseless degenerate case: the covariance is identically zero
  // and exempt from the positive-definiteness requirement.
  if (spec.c == 0.0) return Matrix::Zero(N, N);

  Vector sigma(N);
  for (int i = 0; i < N; ++i) sigma(i) = std::sqrt(spec.c * spec.u[i]);
  Matrix base(N, N);
  for (int i = 0; i < N; ++i) {
    base(i, i) = sigma(i) * sigma(i);
    for (int j = i + 1; j < N; ++j) {
      const double v = sigma(i) * sigma(j) * std::pow(spec.tau, j - i);
      base(i, j) = v;
      base(j, i) = v;
    }
  }
  Matrix out(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) out(i, j) = base(spec.permutation[i], spec.permutation[j]);

  Eigen::LLT<Matrix> llt(out);
  if (llt.info() != Eigen::Success) {
    const double lambda_min = Eigen::SelfAdjointEigenSolver<Matrix>(out).eigenvalues().minCoeff();
    throw Error::config("idiosyncratic spec: covariance is not positive definite (smallest eigenvalue " +
                        std::to_string(lambda_min) + ")");
  }
  return out;
}

Matrix simulate_noise(int T, const Matrix& chol_lower_factor, Rng& rng) {
  const int N = static_cast<int>(chol_lower_factor.rows());
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Z(T, N);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < N; ++i) Z(t, i) = normal(rng);
  return Z * chol_lower_factor.transpose();
}

PanelData simulate_panel(const FactorSet& factors, const LoadingSet& loadings,
                         const Matrix& sigma_eps, std::uint64_t seed) {
  const int T = static_cast<int>(factors.F.rows());
  const int N = static_cast<int>(loadings.Lambda.rows());
  if (factors.F.cols() != loadings.Lambda.cols())
    throw Error::argument("simulate_panel: factor and loading column counts differ");
  if (sigma_eps.rows() != N || sigma_eps.cols() != N)
    throw Error::argument("simulate_panel: sigma_eps dimension mismatch");

  PanelData panel;
  panel.structure = loadings.structure;
  panel.Y = factors.F * loadings.Lambda.transpose();
  if (!sigma_eps.isZero(0.0)) {
    Matrix L = chol_lower(sigma_eps, "simulate_panel");
    Rng rng = make_rng(seed, stream::panel_noise);
    panel.Y += simulate_noise(T, L, rng);
  }
  panel.validate();
  return panel;
}

Matrix factor_strength(const LoadingSet& loadings, const Matrix& sigma_eps) {
  const Eigen::Index N = loadings.Lambda.rows();
  if (sigma_eps.rows() != N || sigma_eps.cols() != N)
    throw Error::argument("factor_strength: sigma_eps dimension mismatch");
  Eigen::LLT<Matrix> llt(sigma_eps);
  if (llt.info() != Eigen::Success)
    throw Error::numeric("factor_strength: sigma_eps is singular or not positive definite");
  return loadings.Lambda.transpose() * llt.solve(loadings.Lambda);
}

}  // namespace mldfm
