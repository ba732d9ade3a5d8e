// Acceptance suite: eleven end-to-end criteria covering exact recovery,
// identification counts, the MSE decomposition identity, asymptotic-versus-
// empirical agreement, variant orderings, coverage, oracle equivalence, and
// determinism.  Each criterion prints a single [PASS]/[FAIL] line; the exit
// status is nonzero when any criterion fails.
//
// Usage: mldfm_acceptance [--criterion K] [--list]

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "core/ident.hpp"
#include "core/io.hpp"
#include "core/linalg.hpp"
#include "core/montecarlo.hpp"
#include "core/sls.hpp"

using namespace mldfm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(4);
  out << x;
  return out.str();
}

ExperimentConfig dfm_experiment(int N, int T, int r, int M, std::uint64_t seed) {
  ExperimentConfig config;
  config.structure = GroupStructure::dfm(N, r);
  config.T = T;
  config.M = M;
  config.phi = 0.5;
  config.c = 0.25;
  config.tau = 0.0;
  config.heteroscedastic = false;
  config.estimator = Estimator::PC;
  config.seed = seed;
  config.variants = {MseVariant::True};
  return config;
}

ExperimentConfig ml_experiment(int N_s, int T, int M, std::uint64_t seed) {
  ExperimentConfig config;
  config.structure = GroupStructure::make({N_s, N_s}, 1, {1, 1});
  config.T = T;
  config.M = M;
  config.phi = 0.5;
  config.c = 0.25;
  config.tau = 0.0;
  config.heteroscedastic = false;
  config.estimator = Estimator::SLS;
  config.seed = seed;
  config.variants = {MseVariant::True};
  return config;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/* 1. Noiseless panels: the estimators recover the generating factors exactly
   (after alignment) on every simulation structure, in under a second each. */
Outcome criterion_exact_recovery() {
  struct Case {
    GroupStructure structure;
    Estimator estimator;
  };
  const std::vector<Case> cases = {
      {GroupStructure::dfm(50, 3), Estimator::PC},
      {GroupStructure::dfm(100, 3), Estimator::PC},
      {GroupStructure::dfm(600, 3), Estimator::PC},
      {GroupStructure::make({25, 25}, 1, {1, 1}), Estimator::SLS},
      {GroupStructure::make({300, 300}, 1, {1, 1}), Estimator::SLS},
  };
  const int T = 50;
  double worst_diff = 0.0, worst_secs = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = 101 + i;
    const GroupStructure& st = cases[i].structure;
    FactorSet factors = simulate_factors(T, st.r(), 0.5, seed);
    LoadingSet loadings = simulate_loadings(st, seed);
    PanelData panel = simulate_panel(factors, loadings, Matrix::Zero(st.N(), st.N()), seed);
    FactorEstimate est;
    if (cases[i].estimator == Estimator::PC)
      est = procrustes_align(pc_extract(panel, st.r()), factors.F);
    else
      est = sign_align(sls_estimate(panel).as_factor_estimate(), factors.F);
    const double diff = (est.F_hat - factors.F).cwiseAbs().maxCoeff();
    const double secs = seconds_since(start);
    worst_diff = std::max(worst_diff, diff);
    worst_secs = std::max(worst_secs, secs);
  }
  return {worst_diff < 1e-6 && worst_secs < 1.0,
          "max |F_hat - F| = " + fmt(worst_diff) + ", slowest case " + fmt(worst_secs) + "s"};
}

/* 2. Identification restriction counts and the admissible-rotation mask. */
Outcome criterion_identification_counts() {
  const GroupStructure small = GroupStructure::make({4, 4}, 1, {1, 1});
  const GroupStructure large = GroupStructure::make({8, 7}, 2, {2, 1});
  const long count_small = count_restrictions(small);
  const long count_large = count_restrictions(large);
  const long mask_small = rotation_mask(small).mask.count();
  const long mask_large = rotation_mask(large).mask.count();
  const bool pass =
      count_small == 5 && count_large == 15 && mask_small == 5 && mask_large == 15;
  return {pass, "restrictions " + std::to_string(count_small) + "/" + std::to_string(count_large) +
                    ", mask allowed entries " + std::to_string(mask_small) + "/" +
                    std::to_string(mask_large)};
}

/* 3. MSE = Cov + Bias2 within 1e-10 on every Monte Carlo cell (also enforced
   inside every experiment run, which aborts on violation). */
Outcome criterion_mse_identity() {
  ExperimentConfig pc_cell = dfm_experiment(40, 40, 3, 30, 211);
  pc_cell.variants = {MseVariant::True, MseVariant::HR};
  const double v_pc = run_experiment(pc_cell).eq16_max_violation;
  ExperimentConfig sls_cell = ml_experiment(20, 36, 30, 213);
  const double v_sls = run_experiment(sls_cell).eq16_max_violation;
  return {v_pc <= 1e-10 && v_sls <= 1e-10,
          "max violation " + fmt(v_pc) + " (PC), " + fmt(v_sls) + " (SLS)"};
}

/* 4. Large homoscedastic uncorrelated panel: the true-parameter asymptotic
   MSE diagonal matches the empirical covariance diagonal within 15%. */
Outcome criterion_asymptotic_vs_empirical() {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult result = run_experiment(dfm_experiment(600, 500, 3, 200, 227));
  const double secs = seconds_since(start);
  if (result.failures != 0) return {false, "unexpected replication failures"};
  const Matrix& truth = result.asymptotic.at(MseVariant::True);
  double worst = 0.0;
  for (int k = 0; k < 3; ++k)
    worst = std::max(worst, std::abs(truth(k, k) - result.empirical_cov(k, k)) /
                                result.empirical_cov(k, k));
  return {worst <= 0.15 && secs < 600.0,
          "worst relative gap " + fmt(worst) + ", runtime " + fmt(secs) + "s"};
}

/* 5. Without cross-correlation the HR and FPR diagonals agree within 10%. */
Outcome criterion_hr_fpr_agreement() {
  ExperimentConfig config = dfm_experiment(100, 100, 3, 200, 229);
  config.variants = {MseVariant::True, MseVariant::HR, MseVariant::FPR};
  const ExperimentResult result = run_experiment(config);
  const Matrix& hr = result.asymptotic.at(MseVariant::HR);
  const Matrix& fpr = result.asymptotic.at(MseVariant::FPR);
  double worst = 0.0;
  for (int k = 0; k < 3; ++k)
    worst = std::max(worst, std::abs(hr(k, k) - fpr(k, k)) / fpr(k, k));
  return {worst <= 0.10, "worst relative diagonal gap " + fmt(worst)};
}

/* 6. The subsampling correction never shrinks a diagonal (the added
   dispersion is PSD) and moves at least 2 of the 3 factors closer to the
   empirical covariance on the small multi-level cell. */
Outcome criterion_subsampling_direction() {
  ExperimentConfig config = ml_experiment(25, 50, 500, 233);
  config.variants = {MseVariant::True, MseVariant::HR, MseVariant::HRS};
  const ExperimentResult result = run_experiment(config);
  const Matrix& hr = result.asymptotic.at(MseVariant::HR);
  const Matrix& hrs = result.asymptotic.at(MseVariant::HRS);
  bool never_below = true;
  int closer = 0;
  for (int k = 0; k < 3; ++k) {
    if (hrs(k, k) < hr(k, k)) never_below = false;
    if (std::abs(hrs(k, k) - result.empirical_cov(k, k)) <
        std::abs(hr(k, k) - result.empirical_cov(k, k)))
      ++closer;
  }
  return {never_below && closer >= 2,
          std::string("corrected >= uncorrected: ") + (never_below ? "yes" : "NO") + ", closer on " +
              std::to_string(closer) + "/3 factors"};
}

/* 7. Under cross-correlated heteroscedastic noise the thresholded-covariance
   variant tracks the true asymptotic more closely than the HR family. */
Outcome criterion_threshold_under_cross_correlation() {
  ExperimentConfig config = ml_experiment(25, 50, 500, 239);
  config.tau = -0.5;
  config.heteroscedastic = true;
  config.delta = 1.0;
  config.variants = {MseVariant::True, MseVariant::HRS, MseVariant::FPRS};
  const ExperimentResult result = run_experiment(config);
  const Matrix& truth = result.asymptotic.at(MseVariant::True);
  const Matrix& hrs = result.asymptotic.at(MseVariant::HRS);
  const Matrix& fprs = result.asymptotic.at(MseVariant::FPRS);
  double gap_hrs = 0.0, gap_fprs = 0.0;
  for (int k = 0; k < 3; ++k) {
    gap_hrs += std::abs(hrs(k, k) - truth(k, k)) / 3.0;
    gap_fprs += std::abs(fprs(k, k) - truth(k, k)) / 3.0;
  }
  return {gap_fprs < gap_hrs,
          "mean |diag - true|: " + fmt(gap_fprs) + " (FPRS) vs " + fmt(gap_hrs) + " (HRS)"};
}

/* 8. Magnitude reproduction on the small multi-level cell: the global
   factor's empirical MSE lands within +-40% of 0.0087 and both group factors
   are at least 5x harder to estimate. */
Outcome criterion_magnitude_reproduction() {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult result = run_experiment(ml_experiment(25, 50, 1000, 241));
  const double secs = seconds_since(start);
  if (result.failures != 0) return {false, "unexpected replication failures"};
  const double g = result.empirical_mse(0, 0);
  const double l1 = result.empirical_mse(1, 1);
  const double l2 = result.empirical_mse(2, 2);
  const bool in_band = g >= 0.0087 * 0.6 && g <= 0.0087 * 1.4;
  const bool ordered = l1 >= 5.0 * g && l2 >= 5.0 * g;
  return {in_band && ordered && secs < 300.0,
          "MSE(G) = " + fmt(g) + " (band 0.00522..0.01218), MSE(L1)/MSE(G) = " + fmt(l1 / g) +
              ", MSE(L2)/MSE(G) = " + fmt(l2 / g) + ", runtime " + fmt(secs) + "s"};
}

/* 9. True-variant 95% confidence regions achieve 92-98% empirical coverage
   on the large panel at each retained period. */
Outcome criterion_coverage() {
  const int N = 600, T = 500, r = 3, M = 500;
  const std::uint64_t seed = 251;
  const GroupStructure st = GroupStructure::dfm(N, r);
  FactorSet factors = simulate_factors(T, r, 0.5, seed);
  LoadingSet loadings = simulate_loadings(st, seed);
  IdioSpec idio = make_idio_spec(N, 0.25, 0.0, false, seed);
  Matrix sigma = build_idio_cov(N, idio);
  Matrix chol_L = chol_lower(sigma, "acceptance: idiosyncratic covariance");
  Matrix common = factors.F * loadings.Lambda.transpose();
  const AvarEstimate true_avar = avar(loadings.Lambda, gamma_true(loadings.Lambda, sigma));
  const int keep_ts[3] = {0, (T + 1) / 2 - 1, T - 1};

  std::atomic<int> hits[3] = {0, 0, 0};
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int m = next.fetch_add(1); m < M; m = next.fetch_add(1)) {
      Rng rng = make_rng(replication_seed(seed, m), stream::panel_noise);
      PanelData panel;
      panel.structure = st;
      panel.Y = common + simulate_noise(T, chol_L, rng);
      FactorEstimate est = procrustes_align(pc_extract(panel, r), factors.F);
      for (int i = 0; i < 3; ++i) {
        const int t = keep_ts[i];
        if (confidence_region_contains(est.F_hat.row(t).transpose(), true_avar,
                                       factors.F.row(t).transpose(), 0.05))
          hits[i].fetch_add(1);
      }
    }
  };
  unsigned n_threads = std::thread::hardware_concurrency();
  if (n_threads == 0) n_threads = 1;
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();

  bool pass = true;
  std::string detail = "coverage";
  for (int i = 0; i < 3; ++i) {
    const double coverage = static_cast<double>(hits[i].load()) / M;
    if (coverage < 0.92 || coverage > 0.98) pass = false;
    detail += (i == 0 ? " " : " / ") + fmt(coverage);
  }
  return {pass, detail + " at t = 1, " + std::to_string((T + 1) / 2) + ", " + std::to_string(T)};
}

/* 10. Oracle equivalence on tiny instances: principal components vs a
   truncated singular decomposition, the factor update vs a dense
   least-squares solve, the Gamma/Avar formulas vs explicit loops, and
   thresholding vs a direct double loop. */
Outcome criterion_oracles() {
  double worst = 0.0;

  {  // (a) PC common component vs rank-r singular reconstruction, T,N <= 10
    const GroupStructure st = GroupStructure::dfm(6, 2);
    FactorSet factors = simulate_factors(8, 2, 0.5, 301);
    LoadingSet loadings = simulate_loadings(st, 301);
    IdioSpec idio = make_idio_spec(6, 0.25, 0.0, false, 301);
    PanelData panel = simulate_panel(factors, loadings, build_idio_cov(6, idio), 301);
    FactorEstimate est = pc_extract(panel, 2);
    Eigen::JacobiSVD<Matrix> svd(panel.Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Matrix recon = svd.matrixU().leftCols(2) * svd.singularValues().head(2).asDiagonal() *
                   svd.matrixV().leftCols(2).transpose();
    worst = std::max(worst,
                     (est.F_hat * est.Lambda_hat.transpose() - recon).cwiseAbs().maxCoeff());
  }

  {  // (b) factor update vs per-period dense least squares
    const GroupStructure st = GroupStructure::make({3, 3}, 1, {1, 1});
    FactorSet factors = simulate_factors(6, st.r(), 0.5, 303);
    LoadingSet loadings = simulate_loadings(st, 303);
    IdioSpec idio = make_idio_spec(6, 0.25, 0.0, false, 303);
    PanelData panel = simulate_panel(factors, loadings, build_idio_cov(6, idio), 303);
    std::vector<Matrix> Lambda_l = {Matrix(loadings.local_block(0)),
                                    Matrix(loadings.local_block(1))};
    auto [G_new, L_new] = update_factors(panel, Matrix(loadings.global_block()), Lambda_l);
    Matrix stacked(6, st.r());
    stacked.col(0) = G_new;
    stacked.col(1) = L_new[0];
    stacked.col(2) = L_new[1];
    for (int t = 0; t < 6; ++t) {
      Vector oracle = loadings.Lambda.colPivHouseholderQr().solve(panel.Y.row(t).transpose());
      worst = std::max(worst, (stacked.row(t).transpose() - oracle).cwiseAbs().maxCoeff());
    }
  }

  {  // (c) Gamma and Avar formulas vs explicit index loops
    Matrix Lambda(4, 2);
    Lambda << 0.9, 0.1, 0.7, -0.3, 1.1, 0.4, 0.5, 0.8;
    Vector eps(4);
    eps << 0.3, -0.2, 0.5, 0.1;
    GammaEstimate hr = gamma_hr(Lambda, eps, 2);
    Matrix gamma_loop = Matrix::Zero(2, 2);
    for (int i = 0; i < 4; ++i)
      gamma_loop += Lambda.row(i).transpose() * Lambda.row(i) * (eps(i) * eps(i));
    gamma_loop /= 4.0;
    worst = std::max(worst, (hr.value - gamma_loop).cwiseAbs().maxCoeff());

    AvarEstimate a = avar(Lambda, hr);
    Matrix S = Lambda.transpose() * Lambda / 4.0;
    const double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
    Matrix S_inv(2, 2);
    S_inv << S(1, 1) / det, -S(0, 1) / det, -S(1, 0) / det, S(0, 0) / det;
    Matrix avar_loop = S_inv * gamma_loop * S_inv / 4.0;
    worst = std::max(worst, (a.value - avar_loop).cwiseAbs().maxCoeff());

    Matrix Sigma(4, 4);
    Sigma << 0.5, 0.1, 0.0, 0.0, 0.1, 0.6, 0.2, 0.0, 0.0, 0.2, 0.4, 0.1, 0.0, 0.0, 0.1, 0.7;
    GammaEstimate g_true = gamma_true(Lambda, Sigma);
    Matrix true_loop = Matrix::Zero(2, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        true_loop += Lambda.row(i).transpose() * Lambda.row(j) * Sigma(i, j);
    true_loop /= 4.0;
    worst = std::max(worst, (g_true.value - true_loop).cwiseAbs().maxCoeff());
  }

  {  // (d) universal thresholding vs a direct double loop
    const int T = 10, N = 6;
    Rng rng = make_rng(307, stream::panel_noise);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix E(T, N);
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < N; ++i) E(t, i) = normal(rng);
    const double delta = 1.5;
    Matrix thresholded = threshold_idio_cov(E, ThresholdConfig{delta});
    const double omega = 1.0 / std::sqrt(double(N)) + std::sqrt(std::log(double(N)) / T);
    Matrix oracle(N, N);
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        double s = 0.0;
        for (int t = 0; t < T; ++t) s += E(t, i) * E(t, j);
        s /= T;
        double theta = 0.0;
        for (int t = 0; t < T; ++t) {
          const double d = E(t, i) * E(t, j) - s;
          theta += d * d;
        }
        theta /= T;
        const bool keep = i == j || std::abs(s) >= delta * omega * std::sqrt(theta);
        oracle(i, j) = keep ? s : 0.0;
      }
    }
    worst = std::max(worst, (thresholded - oracle).cwiseAbs().maxCoeff());
  }

  return {worst <= 1e-10, "worst oracle deviation " + fmt(worst)};
}

/* 11. Rerunning an experiment at different worker counts yields a
   byte-identical results table. */
Outcome criterion_determinism() {
  ExperimentConfig config = dfm_experiment(20, 30, 2, 12, 311);
  config.variants = {MseVariant::True, MseVariant::HR, MseVariant::HRS, MseVariant::FPR,
                     MseVariant::FPRS};
  config.delta = 1.5;
  config.subsample.B = 5;
  config.subsample.block_fraction = 0.8;
  const ExperimentResult serial = run_experiment(config, 1);
  const ExperimentResult parallel = run_experiment(config, 3);

  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path();
  const std::string tag = std::to_string(
      std::chrono::steady_clock::now().time_since_epoch().count());
  const std::string p1 = (base / ("mldfm_acc_w1_" + tag + ".csv")).string();
  const std::string p3 = (base / ("mldfm_acc_w3_" + tag + ".csv")).string();
  write_table_csv(p1, serial);
  write_table_csv(p3, parallel);
  const std::string bytes1 = read_text_file(p1);
  const std::string bytes3 = read_text_file(p3);
  fs::remove(p1);
  fs::remove(p3);
  return {!bytes1.empty() && bytes1 == bytes3,
          bytes1 == bytes3 ? "table bytes identical for workers 1 and 3"
                           : "table bytes differ between worker counts"};
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "noiseless exact recovery", criterion_exact_recovery},
      {2, "identification restriction counts", criterion_identification_counts},
      {3, "MSE = Cov + Bias2 identity", criterion_mse_identity},
      {4, "true asymptotic matches empirical covariance", criterion_asymptotic_vs_empirical},
      {5, "HR and FPR agree without cross-correlation", criterion_hr_fpr_agreement},
      {6, "subsampling correction direction", criterion_subsampling_direction},
      {7, "thresholding under cross-correlation", criterion_threshold_under_cross_correlation},
      {8, "magnitude reproduction on the small multi-level cell",
       criterion_magnitude_reproduction},
      {9, "confidence region coverage", criterion_coverage},
      {10, "oracle equivalence micro-suite", criterion_oracles},
      {11, "byte-identical tables across worker counts", criterion_determinism},
  };

  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--list") {
      for (const Criterion& c : criteria)
        std::cout << c.id << ": " << c.name << '\n';
      return 0;
    }
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (arg.rfind("--criterion=", 0) == 0) {
      only = std::atoi(arg.substr(12).c_str());
    } else {
      std::cerr << "usage: mldfm_acceptance [--criterion K] [--list]\n";
      return 2;
    }
  }

  int ran = 0, failed = 0;
  for (const Criterion& criterion : criteria) {
    if (only != 0 && criterion.id != only) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(start);
    std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion.id << ": "
              << criterion.name << (outcome.detail.empty() ? "" : " — " + outcome.detail) << " ["
              << fmt(secs) << "s]" << std::endl;
    if (!outcome.pass) ++failed;
  }
  if (ran == 0) {
    std::cerr << "error: no such criterion " << only << '\n';
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
