#pragma once

// Simulation-study runner: fixed factors/loadings per design, M replications
// of idiosyncratic draws, PC or SLS estimation per replication, empirical
// MSE/covariance/bias decomposition, and asymptotic-variant aggregation.

#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "core/mse.hpp"
#include "core/panel.hpp"
#include "core/pc.hpp"

namespace mldfm {

struct ExperimentConfig {
  GroupStructure structure;
  int T = 0;
  int M = 1;
  double phi = 0.5;
  double c = 0.25;
  double tau = 0.0;
  bool heteroscedastic = false;
  Estimator estimator = Estimator::PC;
  double delta = 2.0;
  SubsampleConfig subsample;
  std::uint64_t seed = 0;

  /* Which asymptotic variants to aggregate; TRUE is always computed (it is
     free given the DGP parameters), the plug-in variants can be trimmed to
     keep large designs affordable. */
  std::vector<MseVariant> variants = {MseVariant::True, MseVariant::HR, MseVariant::HRS,
                                      MseVariant::FPR, MseVariant::FPRS};
  int bins = 30;        // histogram bins
  double tol = 1e-8;    // SLS convergence tolerance
  int max_iter = 500;   // SLS iteration cap

  void validate() const;  // throws config errors naming the offending key
};

/* Replication-level factor estimates at one retained period, for the
   histogram figures. */
struct HistogramCell {
  int t = 0;       // 0-based period
  int factor = 0;  // stacked factor column
  double truth = 0.0;
  double asymptotic_sd = 0.0;
  std::vector<double> estimates;  // one per successful replication
};

struct ExperimentResult {
  GroupStructure structure;
  int T = 0;
  Matrix empirical_mse;    // r x r, time-averaged
  Matrix empirical_cov;
  Matrix empirical_bias2;
  std::map<MseVariant, Matrix> asymptotic;  // r x r, time-averaged
  std::vector<HistogramCell> histogram_cells;
  int bins = 30;
  double runtime_seconds = 0.0;
  int replications = 0;  // successful replications
  int failures = 0;
  double eq16_max_violation = 0.0;
};

/* Runs the experiment: draws factors/loadings once (seeded) and holds them
   fixed, then per replication simulates idiosyncratic noise, estimates
   (PC + Procrustes alignment or SLS + sign alignment), and aggregates.
   Replications fan out over `workers` threads (0 = hardware concurrency) with
   per-replication seeds and a fixed-order reduction, so results are identical
   for any worker count.  Numeric failures in a replication are excluded and
   counted; more than 5% failures aborts with a numeric error.
   `inject_failure` is a test hook: replications m where it returns true are
   counted as failed without running. */
ExperimentResult run_experiment(const ExperimentConfig& config, int workers = 0,
                                const std::function<bool(int)>& inject_failure = {});

/* (1/M) sum_m (F_hat_t^(m) - F_t)(F_hat_t^(m) - F_t)'. */
Matrix empirical_mse(const std::vector<Matrix>& estimates, const Matrix& truth, int t);

/* Empirical covariance around the replication mean and squared bias of the
   mean; their sum reproduces empirical_mse exactly. */
std::pair<Matrix, Matrix> decompose_mse(const std::vector<Matrix>& estimates, const Matrix& truth,
                                        int t);

/* Elementwise mean over the time series of matrices. */
Matrix average_over_time(const std::vector<Matrix>& series);

/* Binned replication estimates plus the asymptotic Gaussian density (mean =
   truth, sd as given) sampled for plotting. */
struct Histogram {
  std::vector<double> edges;   // bins + 1
  std::vector<int> counts;     // sum = number of estimates
  std::vector<double> density_x;
  std::vector<double> density_y;
  double truth = 0.0;
  double asymptotic_sd = 0.0;
};

Histogram histogram_data(const std::vector<double>& estimates, int bins, double asymptotic_sd,
                         double truth);

}  // namespace mldfm
