// Command-line front end for the mldfm library.  Talks to the library
// exclusively through the public C API.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "mldfm/mldfm.h"

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

int fail(int status) {
  std::cerr << "error: " << mldfm_last_error() << '\n';
  return status;
}

struct ConfigDeleter {
  void operator()(mldfm_config* p) const { mldfm_config_free(p); }
};
struct PanelDeleter {
  void operator()(mldfm_panel* p) const { mldfm_panel_free(p); }
};
struct EstimateDeleter {
  void operator()(mldfm_estimate* p) const { mldfm_estimate_free(p); }
};
struct ExperimentDeleter {
  void operator()(mldfm_experiment* p) const { mldfm_experiment_free(p); }
};
struct StringDeleter {
  void operator()(char* p) const { mldfm_string_free(p); }
};

using ConfigPtr = std::unique_ptr<mldfm_config, ConfigDeleter>;
using PanelPtr = std::unique_ptr<mldfm_panel, PanelDeleter>;
using EstimatePtr = std::unique_ptr<mldfm_estimate, EstimateDeleter>;
using ExperimentPtr = std::unique_ptr<mldfm_experiment, ExperimentDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

/* Loads the config and applies a --seed override when one was given. */
int open_config(const std::string& path, bool seed_set, std::uint64_t seed, ConfigPtr& out) {
  mldfm_config* raw = nullptr;
  int rc = mldfm_config_load(path.c_str(), &raw);
  if (rc != MLDFM_OK) return rc;
  out.reset(raw);
  if (seed_set) {
    rc = mldfm_config_set_seed(raw, seed);
    if (rc != MLDFM_OK) return rc;
  }
  return MLDFM_OK;
}

int make_out_dir(const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << out_dir << ": " << ec.message()
              << '\n';
    return MLDFM_ERR_INPUT;
  }
  return MLDFM_OK;
}

int write_run_manifest(const std::string& command, const std::string& config_path,
                       const std::string& out_dir, const mldfm_config* cfg,
                       const std::string& started, const std::string& artifacts) {
  return mldfm_manifest_write((out_dir + "/manifest.json").c_str(), command.c_str(),
                              config_path.c_str(), out_dir.c_str(), mldfm_config_seed(cfg),
                              started.c_str(), utc_now().c_str(), artifacts.c_str());
}

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string panel_path;
  std::string factors_path;
  std::string loadings_path;
  std::string method;
  std::string variant;
  std::string table_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
};

int cmd_simulate(const Options& opt) {
  const std::string started = utc_now();
  ConfigPtr cfg;
  int rc = open_config(opt.config_path, opt.seed_set, opt.seed, cfg);
  if (rc != MLDFM_OK) return fail(rc);
  rc = make_out_dir(opt.out_dir);
  if (rc != MLDFM_OK) return rc;
  rc = mldfm_simulate(cfg.get(), opt.out_dir.c_str());
  if (rc != MLDFM_OK) return fail(rc);
  rc = write_run_manifest("simulate", opt.config_path, opt.out_dir, cfg.get(), started,
                          "panel.csv,true_factors.csv,true_loadings.csv,sigma_eps.csv");
  if (rc != MLDFM_OK) return fail(rc);
  std::cout << "simulate: wrote panel.csv, true_factors.csv, true_loadings.csv, sigma_eps.csv, "
               "manifest.json to "
            << opt.out_dir << '\n';
  return 0;
}

int cmd_estimate(const Options& opt) {
  const std::string started = utc_now();
  ConfigPtr cfg;
  int rc = open_config(opt.config_path, opt.seed_set, opt.seed, cfg);
  if (rc != MLDFM_OK) return fail(rc);
  mldfm_panel* panel_raw = nullptr;
  rc = mldfm_panel_load(cfg.get(), opt.panel_path.c_str(), &panel_raw);
  if (rc != MLDFM_OK) return fail(rc);
  PanelPtr panel(panel_raw);
  mldfm_estimate* est_raw = nullptr;
  rc = mldfm_estimate_run(panel.get(), opt.method.empty() ? nullptr : opt.method.c_str(),
                          cfg.get(), &est_raw);
  if (rc != MLDFM_OK) return fail(rc);
  EstimatePtr est(est_raw);
  rc = make_out_dir(opt.out_dir);
  if (rc != MLDFM_OK) return rc;
  rc = mldfm_estimate_write(est.get(), opt.out_dir.c_str());
  if (rc != MLDFM_OK) return fail(rc);
  rc = write_run_manifest("estimate", opt.config_path, opt.out_dir, cfg.get(), started,
                          "factors.csv,loadings.csv,diagnostics.json");
  if (rc != MLDFM_OK) return fail(rc);
  std::cout << "estimate: wrote factors.csv, loadings.csv, diagnostics.json, manifest.json to "
            << opt.out_dir << '\n';
  return 0;
}

int cmd_mse(const Options& opt) {
  const std::string started = utc_now();
  ConfigPtr cfg;
  int rc = open_config(opt.config_path, opt.seed_set, opt.seed, cfg);
  if (rc != MLDFM_OK) return fail(rc);
  rc = make_out_dir(opt.out_dir);
  if (rc != MLDFM_OK) return rc;
  rc = mldfm_mse_run(cfg.get(), opt.panel_path.c_str(), opt.factors_path.c_str(),
                     opt.loadings_path.c_str(), opt.variant.c_str(), opt.out_dir.c_str());
  if (rc != MLDFM_OK) return fail(rc);
  rc = write_run_manifest("mse", opt.config_path, opt.out_dir, cfg.get(), started,
                          "avar.csv,regions.csv");
  if (rc != MLDFM_OK) return fail(rc);
  std::cout << "mse: wrote avar.csv, regions.csv, manifest.json to " << opt.out_dir << '\n';
  return 0;
}

int cmd_montecarlo(const Options& opt) {
  const std::string started = utc_now();
  ConfigPtr cfg;
  int rc = open_config(opt.config_path, opt.seed_set, opt.seed, cfg);
  if (rc != MLDFM_OK) return fail(rc);
  mldfm_experiment* exp_raw = nullptr;
  rc = mldfm_experiment_run(cfg.get(), opt.workers, &exp_raw);
  if (rc != MLDFM_OK) return fail(rc);
  ExperimentPtr exp(exp_raw);
  rc = make_out_dir(opt.out_dir);
  if (rc != MLDFM_OK) return rc;
  rc = mldfm_experiment_write(exp.get(), opt.out_dir.c_str());
  if (rc != MLDFM_OK) return fail(rc);
  rc = write_run_manifest("montecarlo", opt.config_path, opt.out_dir, cfg.get(), started,
                          "table.csv,histograms.json");
  if (rc != MLDFM_OK) return fail(rc);
  char* info = nullptr;
  rc = mldfm_experiment_info_json(exp.get(), &info);
  if (rc != MLDFM_OK) return fail(rc);
  StringPtr info_guard(info);
  std::cout << "montecarlo: " << info << '\n'
            << "montecarlo: wrote table.csv, histograms.json, manifest.json to " << opt.out_dir
            << '\n';
  return 0;
}

int cmd_report(const Options& opt) {
  char* text = nullptr;
  const int rc = mldfm_render_table(opt.table_path.c_str(), &text);
  if (rc != MLDFM_OK) return fail(rc);
  StringPtr guard(text);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor extraction, finite-sample asymptotic MSE, and Monte Carlo experiments "
               "for (multi-level) dynamic factor models"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* sim = app.add_subcommand("simulate", "Simulate a panel from a design config");
  sim->add_option("--config", opt.config_path, "JSON design config")->required();
  sim->add_option("--out", opt.out_dir, "Output directory")->required();
  CLI::Option* sim_seed = sim->add_option("--seed", opt.seed, "Override the config seed");

  CLI::App* est = app.add_subcommand("estimate", "Estimate factors and loadings from a panel");
  est->add_option("--config", opt.config_path, "JSON design config")->required();
  est->add_option("--panel", opt.panel_path, "Panel CSV")->required();
  est->add_option("--out", opt.out_dir, "Output directory")->required();
  est->add_option("--method", opt.method, "Estimator: pc or sls (default: config)");
  CLI::Option* est_seed = est->add_option("--seed", opt.seed, "Override the config seed");

  CLI::App* mse = app.add_subcommand("mse", "Asymptotic MSE of estimated factors");
  mse->add_option("--config", opt.config_path, "JSON design config")->required();
  mse->add_option("--panel", opt.panel_path, "Panel CSV")->required();
  mse->add_option("--factors", opt.factors_path, "Estimated factors CSV")->required();
  mse->add_option("--loadings", opt.loadings_path, "Estimated loadings CSV")->required();
  mse->add_option("--variant", opt.variant, "hr, hrs, fpr, or fprs")->required();
  mse->add_option("--out", opt.out_dir, "Output directory")->required();
  CLI::Option* mse_seed = mse->add_option("--seed", opt.seed, "Override the config seed");

  CLI::App* mc = app.add_subcommand("montecarlo", "Run a Monte Carlo experiment");
  mc->add_option("--config", opt.config_path, "JSON experiment config")->required();
  mc->add_option("--out", opt.out_dir, "Output directory")->required();
  mc->add_option("--workers", opt.workers, "Worker threads (default: hardware parallelism)");
  CLI::Option* mc_seed = mc->add_option("--seed", opt.seed, "Override the config seed");

  CLI::App* rep = app.add_subcommand("report", "Render a table.csv as aligned text");
  rep->add_option("--table", opt.table_path, "table.csv produced by montecarlo")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return MLDFM_ERR_INPUT;
  }

  opt.seed_set = (sim_seed->count() > 0) || (est_seed->count() > 0) || (mse_seed->count() > 0) ||
                 (mc_seed->count() > 0);

  if (sim->parsed()) return cmd_simulate(opt);
  if (est->parsed()) return cmd_estimate(opt);
  if (mse->parsed()) return cmd_mse(opt);
  if (mc->parsed()) return cmd_montecarlo(opt);
  if (rep->parsed()) return cmd_report(opt);
  std::cerr << "error: no subcommand given\n";
  return MLDFM_ERR_INPUT;
}
