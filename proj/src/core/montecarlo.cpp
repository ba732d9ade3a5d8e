#include "core/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "core/linalg.hpp"
#include "core/rng.hpp"
#include "core/sls.hpp"

namespace mldfm {

void ExperimentConfig::validate() const {
  structure.validate();
  if (T < 2) throw Error::config("T must be >= 2");
  if (M < 1) throw Error::config("M must be >= 1");
  if (!(std::abs(phi) < 1.0)) throw Error::config("phi must lie in (-1, 1)");
  if (!(c >= 0.0)) throw Error::config("c must be >= 0");
  if (!(std::abs(tau) < 1.0)) throw Error::config("tau must lie in (-1, 1)");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw Error::config("delta must be finite and >= 0");
  if (subsample.B < 1) throw Error::config("subsample.B must be >= 1");
  if (!(subsample.block_fraction > 0.0) || subsample.block_fraction > 1.0)
    throw Error::config("subsample.block_fraction must lie in (0, 1]");
  if (variants.empty()) throw Error::config("variants must not be empty");
  if (bins < 1) throw Error::config("bins must be >= 1");
  if (!(tol > 0.0)) throw Error::config("tol must be > 0");
  if (max_iter < 1) throw Error::config("max_iter must be >= 1");
}

namespace {

/* Everything one replication contributes to the reduction. */
struct RepPayload {
  bool ok = false;
  Matrix F_hat;                        // T x r, aligned to the true factors
  std::map<MseVariant, Matrix> avars;  // time-averaged plug-in variants
  std::exception_ptr fatal;            // non-numeric error, rethrown after join
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, int workers,
                                const std::function<bool(int)>& inject_failure) {
  const auto clock_start = std::chrono::steady_clock::now();
  config.validate();
  const GroupStructure& st = config.structure;
  const int T = config.T;
  const int M = config.M;
  const int r = st.r();
  const int N = st.N();

  /* Fixed design data, drawn once and shared read-only across replications. */
  FactorSet factors = simulate_factors(T, r, config.phi, config.seed);
  LoadingSet loadings = simulate_loadings(st, config.seed);
  IdioSpec idio = make_idio_spec(N, config.c, config.tau, config.heteroscedastic, config.seed);
  Matrix sigma = build_idio_cov(N, idio);
  Matrix chol_L = config.c == 0.0 ? Matrix::Zero(N, N).eval()
                                  : chol_lower(sigma, "run_experiment: idiosyncratic covariance");
  Matrix common = factors.F * loadings.Lambda.transpose();

  auto wants = [&](MseVariant v) {
    return std::find(config.variants.begin(), config.variants.end(), v) != config.variants.end();
  };
  const bool want_hr = wants(MseVariant::HR);
  const bool want_hrs = wants(MseVariant::HRS);
  const bool want_fpr = wants(MseVariant::FPR);
  const bool want_fprs = wants(MseVariant::FPRS);
  const bool need_resid = want_hr || want_hrs || want_fpr || want_fprs;

  const AvarEstimate true_avar = avar(loadings.Lambda, gamma_true(loadings.Lambda, sigma));

  std::vector<RepPayload> payloads(M);
  std::atomic<int> next{0};

  auto run_rep = [&](int m) {
    RepPayload& out = payloads[m];
    if (inject_failure && inject_failure(m)) return;  // test hook: counted as failed
    try {
      const std::uint64_t rep_seed = replication_seed(config.seed, m);
      Rng rng = make_rng(rep_seed, stream::panel_noise);
      PanelData panel;
      panel.structure = st;
      panel.Y = common + simulate_noise(T, chol_L, rng);

      FactorEstimate est;
      if (config.estimator == Estimator::PC)
        est = procrustes_align(pc_extract(panel, r), factors.F);
      else
        est = sign_align(sls_estimate(panel, config.tol, config.max_iter).as_factor_estimate(),
                         factors.F);

      if (need_resid) {
        Matrix E = residuals(panel, est);
        Matrix hr_avg;
        if (want_hr || want_hrs) {
          hr_avg = Matrix::Zero(r, r);
          for (int t = 0; t < T; ++t)
            hr_avg +=
                avar(est.Lambda_hat, gamma_hr(est.Lambda_hat, E.row(t).transpose(), t)).value;
          hr_avg /= static_cast<double>(T);
          if (want_hr) out.avars[MseVariant::HR] = hr_avg;
        }
        Matrix fpr;
        if (want_fpr || want_fprs) {
          fpr = avar(est.Lambda_hat, gamma_fpr(est.Lambda_hat, threshold_idio_cov(
                                                   E, ThresholdConfig{config.delta})))
                    .value;
          if (want_fpr) out.avars[MseVariant::FPR] = fpr;
        }
        if (want_hrs || want_fprs) {
          SubsampleConfig sub = config.subsample;
          sub.seed = rep_seed;
          Matrix C_avg = average_over_time(
              subsample_dispersion(panel, config.estimator, est.Lambda_hat, sub));
          if (want_hrs) out.avars[MseVariant::HRS] = hr_avg + C_avg;
          if (want_fprs) out.avars[MseVariant::FPRS] = fpr + C_avg;
        }
      }
      out.F_hat = std::move(est.F_hat);
      out.ok = true;
    } catch (const Error& e) {
      if (e.kind() == Error::Kind::numeric)
        log_debug("replication " + std::to_string(m) + " failed: " + e.what());
      else
        out.fatal = std::current_exception();
    } catch (...) {
      out.fatal = std::current_exception();
    }
  };

  auto worker = [&] {
    for (;;) {
      const int m = next.fetch_add(1);
      if (m >= M) return;
      run_rep(m);
    }
  };

  int W = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  W = std::max(1, std::min(W, M));
  if (W == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(W);
    for (int w = 0; w < W; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  for (int m = 0; m < M; ++m)
    if (payloads[m].fatal) std::rethrow_exception(payloads[m].fatal);

  /* Reduction in fixed replication order: identical for any worker count. */
  std::vector<Matrix> estimates;
  estimates.reserve(M);
  for (int m = 0; m < M; ++m)
    if (payloads[m].ok) estimates.push_back(std::move(payloads[m].F_hat));
  const int ok_count = static_cast<int>(estimates.size());
  const int failures = M - ok_count;
  if (failures * 20 > M)
    throw Error::numeric("run_experiment: " + std::to_string(failures) + " of " +
                         std::to_string(M) + " replications failed (more than 5%)");
  if (failures > 0)
    log_warn("run_experiment: excluded " + std::to_string(failures) + " failed replications");

  ExperimentResult result;
  result.structure = st;
  result.T = T;
  result.bins = config.bins;
  result.replications = ok_count;
  result.failures = failures;

  std::vector<Matrix> mse_series(T);
  std::vector<Matrix> cov_series(T);
  std::vector<Matrix> bias_series(T);
  double eq16 = 0.0;
  for (int t = 0; t < T; ++t) {
    mse_series[t] = empirical_mse(estimates, factors.F, t);
    auto [cov, bias2] = decompose_mse(estimates, factors.F, t);
    eq16 = std::max(eq16, (mse_series[t] - cov - bias2).cwiseAbs().maxCoeff());
    cov_series[t] = std::move(cov);
    bias_series[t] = std::move(bias2);
  }
  result.eq16_max_violation = eq16;
  if (eq16 > 1e-10)
    throw Error::internal("run_experiment: MSE = Cov + Bias2 identity violated (max deviation " +
                          std::to_string(eq16) + ")");
  result.empirical_mse = average_over_time(mse_series);
  result.empirical_cov = average_over_time(cov_series);
  result.empirical_bias2 = average_over_time(bias_series);

  result.asymptotic[MseVariant::True] = true_avar.value;
  for (MseVariant v :
       {MseVariant::HR, MseVariant::HRS, MseVariant::FPR, MseVariant::FPRS}) {
    if (!wants(v)) continue;
    Matrix acc = Matrix::Zero(r, r);
    for (int m = 0; m < M; ++m)
      if (payloads[m].ok) acc += payloads[m].avars.at(v);
    result.asymptotic[v] = acc / static_cast<double>(ok_count);
  }

  std::vector<int> keep_ts{0, (T + 1) / 2 - 1, T - 1};
  keep_ts.erase(std::unique(keep_ts.begin(), keep_ts.end()), keep_ts.end());
  for (int t : keep_ts) {
    for (int k = 0; k < r; ++k) {
      HistogramCell cell;
      cell.t = t;
      cell.factor = k;
      cell.truth = factors.F(t, k);
      cell.asymptotic_sd = std::sqrt(std::max(0.0, true_avar.value(k, k)));
      cell.estimates.reserve(ok_count);
      for (const Matrix& F : estimates) cell.estimates.push_back(F(t, k));
      result.histogram_cells.push_back(std::move(cell));
    }
  }

  result.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return result;
}

namespace {

void check_estimate_shapes(const std::vector<Matrix>& estimates, const Matrix& truth, int t) {
  if (estimates.empty()) throw Error::argument("need at least one replication estimate");
  if (t < 0 || t >= truth.rows()) throw Error::argument("period index out of range");
  for (const Matrix& F : estimates)
    if (F.rows() != truth.rows() || F.cols() != truth.cols())
      throw Error::argument("replication estimate dimensions must match the truth");
}

}  // namespace

Matrix empirical_mse(const std::vector<Matrix>& estimates, const Matrix& truth, int t) {
  check_estimate_shapes(estimates, truth, t);
  const int r = static_cast<int>(truth.cols());
  Matrix acc = Matrix::Zero(r, r);
  for (const Matrix& F : estimates) {
    Vector d = (F.row(t) - truth.row(t)).transpose();
    acc += d * d.transpose();
  }
  return acc / static_cast<double>(estimates.size());
}

std::pair<Matrix, Matrix> decompose_mse(const std::vector<Matrix>& estimates, const Matrix& truth,
                                        int t) {
  check_estimate_shapes(estimates, truth, t);
  const int r = static_cast<int>(truth.cols());
  const double M = static_cast<double>(estimates.size());
  Vector mean = Vector::Zero(r);
  for (const Matrix& F : estimates) mean += F.row(t).transpose();
  mean /= M;
  Matrix cov = Matrix::Zero(r, r);
  for (const Matrix& F : estimates) {
    Vector d = F.row(t).transpose() - mean;
    cov += d * d.transpose();
  }
  cov /= M;
  Vector b = truth.row(t).transpose() - mean;
  return {std::move(cov), b * b.transpose()};
}

Matrix average_over_time(const std::vector<Matrix>& series) {
  if (series.empty()) throw Error::argument("average_over_time: need at least one period");
  Matrix acc = Matrix::Zero(series.front().rows(), series.front().cols());
  for (const Matrix& A : series) {
    if (A.rows() != acc.rows() || A.cols() != acc.cols())
      throw Error::argument("average_over_time: inconsistent matrix dimensions");
    acc += A;
  }
  return acc / static_cast<double>(series.size());
}

Histogram histogram_data(const std::vector<double>& estimates, int bins, double asymptotic_sd,
                         double truth) {
  if (estimates.size() < 2) throw Error::argument("histogram_data: need at least 2 estimates");
  if (bins < 1) throw Error::argument("histogram_data: bins must be >= 1");
  if (!(asymptotic_sd > 0.0)) throw Error::argument("histogram_data: asymptotic_sd must be > 0");

  Histogram out;
  out.truth = truth;
  out.asymptotic_sd = asymptotic_sd;

  double lo = *std::min_element(estimates.begin(), estimates.end());
  double hi = *std::max_element(estimates.begin(), estimates.end());
  if (!(hi > lo)) {
    /* Degenerate range: pad symmetrically so every estimate lands in one bin. */
    const double pad = 0.5 * std::max(1.0, std::abs(lo)) * 1e-9;
    lo -= pad;
    hi += pad;
  }
  const double width = (hi - lo) / bins;
  out.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) out.edges[b] = lo + width * b;
  out.counts.assign(bins, 0);
  for (double x : estimates) {
    int idx = static_cast<int>((x - lo) / width);
    idx = std::clamp(idx, 0, bins - 1);
    ++out.counts[idx];
  }

  const double curve_lo = std::min(lo, truth - 4.0 * asymptotic_sd);
  const double curve_hi = std::max(hi, truth + 4.0 * asymptotic_sd);
  const int points = 201;
  const double step = (curve_hi - curve_lo) / (points - 1);
  const double norm = 1.0 / (asymptotic_sd * std::sqrt(2.0 * M_PI));
  out.density_x.resize(points);
  out.density_y.resize(points);
  for (int i = 0; i < points; ++i) {
    const double x = curve_lo + step * i;
    const double z = (x - truth) / asymptotic_sd;
    out.density_x[i] = x;
    out.density_y[i] = norm * std::exp(-0.5 * z * z);
  }
  return out;
}

}  // namespace mldfm
