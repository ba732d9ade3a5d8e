#include "mldfm/mldfm.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "core/io.hpp"
#include "core/montecarlo.hpp"
#include "core/sls.hpp"

using namespace mldfm;

struct mldfm_config {
  FileConfig cfg;
};

struct mldfm_panel {
  PanelData panel;
};

struct mldfm_estimate {
  FactorEstimate est;
  GroupStructure structure;
};

struct mldfm_experiment {
  ExperimentResult result;
};

namespace {

thread_local std::string tls_error;

int status_for(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::argument:
    case Error::Kind::config:
    case Error::Kind::io:
      return MLDFM_ERR_INPUT;
    case Error::Kind::numeric:
      return MLDFM_ERR_NUMERIC;
    case Error::Kind::internal:
      return MLDFM_ERR_INTERNAL;
  }
  return MLDFM_ERR_INTERNAL;
}

template <typename Fn>
int guarded(Fn&& fn) noexcept {
  try {
    fn();
    tls_error.clear();
    return MLDFM_OK;
  } catch (const Error& e) {
    tls_error = e.what();
    return status_for(e.kind());
  } catch (const std::exception& e) {
    tls_error = e.what();
    return MLDFM_ERR_INTERNAL;
  } catch (...) {
    tls_error = "unknown error";
    return MLDFM_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error::argument(what);
}

char* copy_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

FactorEstimate run_estimator(const PanelData& panel, Estimator estimator,
                             const ExperimentConfig& exp) {
  if (estimator == Estimator::PC) return pc_extract(panel, panel.structure.r());
  return sls_estimate(panel, exp.tol, exp.max_iter).as_factor_estimate();
}

std::vector<AvarEstimate> mse_series(const PanelData& panel, const Matrix& F, const Matrix& Lambda,
                                     MseVariant variant, const ExperimentConfig& exp) {
  const int T = panel.T();
  const int r = panel.structure.r();
  if (F.rows() != T || F.cols() != r)
    throw Error::argument("factors file must be T x r for the configured design");
  if (Lambda.rows() != panel.N() || Lambda.cols() != r)
    throw Error::argument("loadings file must be N x r for the configured design");

  Matrix E = panel.Y - F * Lambda.transpose();

  std::vector<Matrix> base(T);
  if (variant == MseVariant::HR || variant == MseVariant::HRS) {
    for (int t = 0; t < T; ++t)
      base[t] = avar(Lambda, gamma_hr(Lambda, E.row(t).transpose(), t)).value;
  } else {
    Matrix fpr =
        avar(Lambda, gamma_fpr(Lambda, threshold_idio_cov(E, ThresholdConfig{exp.delta}))).value;
    for (int t = 0; t < T; ++t) base[t] = fpr;
  }
  if (variant == MseVariant::HRS || variant == MseVariant::FPRS) {
    std::vector<Matrix> C = subsample_dispersion(panel, exp.estimator, Lambda, exp.subsample);
    for (int t = 0; t < T; ++t) base[t] += C[t];
  }

  std::vector<AvarEstimate> out(T);
  for (int t = 0; t < T; ++t) {
    out[t].value = std::move(base[t]);
    out[t].variant = variant;
    out[t].t = t;
    out[t].N = panel.N();
  }
  return out;
}

}  // namespace

extern "C" {

const char* mldfm_version(void) { return "1.0.0"; }

const char* mldfm_last_error(void) { return tls_error.c_str(); }

void mldfm_string_free(char* s) { delete[] s; }

int mldfm_config_load(const char* path, mldfm_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "mldfm_config_load: null argument");
    *out = new mldfm_config{load_config(path)};
  });
}

int mldfm_config_parse(const char* json_text, mldfm_config** out) {
  return guarded([&] {
    require(json_text != nullptr && out != nullptr, "mldfm_config_parse: null argument");
    *out = new mldfm_config{parse_config(json_text)};
  });
}

void mldfm_config_free(mldfm_config* config) { delete config; }

int mldfm_config_set_seed(mldfm_config* config, uint64_t seed) {
  return guarded([&] {
    require(config != nullptr, "mldfm_config_set_seed: null config");
    config->cfg.experiment.seed = seed;
  });
}

int mldfm_config_set_estimator(mldfm_config* config, const char* method) {
  return guarded([&] {
    require(config != nullptr && method != nullptr, "mldfm_config_set_estimator: null argument");
    const std::string name(method);
    if (name == "pc")
      config->cfg.experiment.estimator = Estimator::PC;
    else if (name == "sls")
      config->cfg.experiment.estimator = Estimator::SLS;
    else
      throw Error::argument("estimator must be \"pc\" or \"sls\", got \"" + name + "\"");
  });
}

uint64_t mldfm_config_seed(const mldfm_config* config) {
  return config == nullptr ? 0 : config->cfg.experiment.seed;
}

int mldfm_simulate(const mldfm_config* config, const char* out_dir) {
  return guarded([&] {
    require(config != nullptr && out_dir != nullptr, "mldfm_simulate: null argument");
    const ExperimentConfig& exp = config->cfg.experiment;
    const std::string dir(out_dir);
    FactorSet factors = simulate_factors(exp.T, exp.structure.r(), exp.phi, exp.seed);
    LoadingSet loadings = simulate_loadings(exp.structure, exp.seed);
    IdioSpec idio =
        make_idio_spec(exp.structure.N(), exp.c, exp.tau, exp.heteroscedastic, exp.seed);
    Matrix sigma = build_idio_cov(exp.structure.N(), idio);
    PanelData panel = simulate_panel(factors, loadings, sigma, exp.seed);
    write_panel_csv(dir + "/panel.csv", panel);
    write_factors_csv(dir + "/true_factors.csv", factors.F, exp.structure);
    write_loadings_csv(dir + "/true_loadings.csv", loadings.Lambda, exp.structure);
    write_sigma_csv(dir + "/sigma_eps.csv", sigma);
  });
}

int mldfm_panel_load(const mldfm_config* config, const char* panel_csv, mldfm_panel** out) {
  return guarded([&] {
    require(config != nullptr && panel_csv != nullptr && out != nullptr,
            "mldfm_panel_load: null argument");
    *out = new mldfm_panel{read_panel_csv(panel_csv, config->cfg.experiment.structure)};
  });
}

void mldfm_panel_free(mldfm_panel* panel) { delete panel; }

int mldfm_panel_dims(const mldfm_panel* panel, int* T, int* N) {
  return guarded([&] {
    require(panel != nullptr, "mldfm_panel_dims: null panel");
    if (T != nullptr) *T = panel->panel.T();
    if (N != nullptr) *N = panel->panel.N();
  });
}

int mldfm_estimate_run(const mldfm_panel* panel, const char* method, const mldfm_config* config,
                       mldfm_estimate** out) {
  return guarded([&] {
    require(panel != nullptr && config != nullptr && out != nullptr,
            "mldfm_estimate_run: null argument");
    Estimator estimator = config->cfg.experiment.estimator;
    if (method != nullptr) {
      const std::string name(method);
      if (name == "pc")
        estimator = Estimator::PC;
      else if (name == "sls")
        estimator = Estimator::SLS;
      else
        throw Error::argument("method must be \"pc\" or \"sls\", got \"" + name + "\"");
    }
    FactorEstimate est = run_estimator(panel->panel, estimator, config->cfg.experiment);
    *out = new mldfm_estimate{std::move(est), panel->panel.structure};
  });
}

void mldfm_estimate_free(mldfm_estimate* estimate) { delete estimate; }

int mldfm_estimate_write(const mldfm_estimate* estimate, const char* out_dir) {
  return guarded([&] {
    require(estimate != nullptr && out_dir != nullptr, "mldfm_estimate_write: null argument");
    const std::string dir(out_dir);
    write_factors_csv(dir + "/factors.csv", estimate->est.F_hat, estimate->structure);
    write_loadings_csv(dir + "/loadings.csv", estimate->est.Lambda_hat, estimate->structure);
    write_text_file(dir + "/diagnostics.json",
                    diagnostics_json(estimate->est, estimate->structure));
  });
}

int mldfm_estimate_info_json(const mldfm_estimate* estimate, char** out_json) {
  return guarded([&] {
    require(estimate != nullptr && out_json != nullptr, "mldfm_estimate_info_json: null argument");
    *out_json = copy_string(diagnostics_json(estimate->est, estimate->structure));
  });
}

int mldfm_mse_run(const mldfm_config* config, const char* panel_csv, const char* factors_csv,
                  const char* loadings_csv, const char* variant, const char* out_dir) {
  return guarded([&] {
    require(config != nullptr && panel_csv != nullptr && factors_csv != nullptr &&
                loadings_csv != nullptr && variant != nullptr && out_dir != nullptr,
            "mldfm_mse_run: null argument");
    const ExperimentConfig& exp = config->cfg.experiment;
    const MseVariant v = parse_variant(variant);
    if (v == MseVariant::True)
      throw Error::argument("mldfm_mse_run: variant must be hr, hrs, fpr, or fprs");
    PanelData panel = read_panel_csv(panel_csv, exp.structure);
    Matrix F = read_factors_csv(factors_csv);
    Matrix Lambda = read_loadings_csv(loadings_csv);
    std::vector<AvarEstimate> series = mse_series(panel, F, Lambda, v, exp);
    const std::string dir(out_dir);
    write_avar_csv(dir + "/avar.csv", series);
    write_regions_csv(dir + "/regions.csv", series, exp.structure, 0.05);
  });
}

int mldfm_experiment_run(const mldfm_config* config, int workers, mldfm_experiment** out) {
  return guarded([&] {
    require(config != nullptr && out != nullptr, "mldfm_experiment_run: null argument");
    *out = new mldfm_experiment{run_experiment(config->cfg.experiment, workers)};
  });
}

void mldfm_experiment_free(mldfm_experiment* experiment) { delete experiment; }

int mldfm_experiment_write(const mldfm_experiment* experiment, const char* out_dir) {
  return guarded([&] {
    require(experiment != nullptr && out_dir != nullptr, "mldfm_experiment_write: null argument");
    const std::string dir(out_dir);
    write_table_csv(dir + "/table.csv", experiment->result);
    write_histograms_json(dir + "/histograms.json", experiment->result);
  });
}

int mldfm_experiment_info_json(const mldfm_experiment* experiment, char** out_json) {
  return guarded([&] {
    require(experiment != nullptr && out_json != nullptr,
            "mldfm_experiment_info_json: null argument");
    const ExperimentResult& res = experiment->result;
    std::string json = "{\"replications\": " + std::to_string(res.replications) +
                       ", \"failures\": " + std::to_string(res.failures) +
                       ", \"runtime_seconds\": " + format_double(res.runtime_seconds) +
                       ", \"eq16_max_violation\": " + format_double(res.eq16_max_violation) + "}";
    *out_json = copy_string(json);
  });
}

int mldfm_render_table(const char* table_csv_path, char** out_text) {
  return guarded([&] {
    require(table_csv_path != nullptr && out_text != nullptr, "mldfm_render_table: null argument");
    *out_text = copy_string(render_table(read_csv(table_csv_path)));
  });
}

int mldfm_manifest_write(const char* manifest_path, const char* command, const char* config_path,
                         const char* out_dir, uint64_t seed, const char* started,
                         const char* finished, const char* artifacts_csv) {
  return guarded([&] {
    require(manifest_path != nullptr && command != nullptr && config_path != nullptr &&
                out_dir != nullptr && started != nullptr && finished != nullptr &&
                artifacts_csv != nullptr,
            "mldfm_manifest_write: null argument");
    std::vector<std::string> artifacts;
    std::string current;
    for (const char* p = artifacts_csv; *p != '\0'; ++p) {
      if (*p == ',') {
        if (!current.empty()) artifacts.push_back(std::move(current));
        current.clear();
      } else {
        current += *p;
      }
    }
    if (!current.empty()) artifacts.push_back(std::move(current));
    write_manifest(manifest_path, command, config_path, out_dir, seed, started, finished,
                   artifacts);
  });
}

}  // extern "C"
