#ifndef MLDFM_H
#define MLDFM_H

/* C API for the multi-level dynamic factor model library.
 *
 * All functions returning int use the status codes below.  On any non-OK
 * status, mldfm_last_error() returns a thread-local human-readable message.
 * Objects are opaque handles created by the load, parse, and run functions
 * and released with the matching free function; strings returned through
 * char** output parameters are released with mldfm_string_free.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MLDFM_OK 0
#define MLDFM_ERR_INPUT 2    /* invalid arguments, config, or input files */
#define MLDFM_ERR_NUMERIC 3  /* numerical/estimation failure */
#define MLDFM_ERR_INTERNAL 10

const char* mldfm_version(void);

/* Message for the most recent failure on this thread; empty after success. */
const char* mldfm_last_error(void);

void mldfm_string_free(char* s);

/* ----- configuration ---------------------------------------------------- */

typedef struct mldfm_config mldfm_config;

int mldfm_config_load(const char* path, mldfm_config** out);
int mldfm_config_parse(const char* json_text, mldfm_config** out);
void mldfm_config_free(mldfm_config* config);

/* Command-line overrides. method is "pc" or "sls". */
int mldfm_config_set_seed(mldfm_config* config, uint64_t seed);
int mldfm_config_set_estimator(mldfm_config* config, const char* method);

uint64_t mldfm_config_seed(const mldfm_config* config);

/* ----- simulation ------------------------------------------------------- */

/* Writes panel.csv, true_factors.csv, true_loadings.csv, sigma_eps.csv.
 * out_dir must be an existing directory; that holds for every function here
 * that takes an out_dir (the CLI creates its output directories itself). */
int mldfm_simulate(const mldfm_config* config, const char* out_dir);

/* ----- panels and estimation -------------------------------------------- */

typedef struct mldfm_panel mldfm_panel;

int mldfm_panel_load(const mldfm_config* config, const char* panel_csv, mldfm_panel** out);
void mldfm_panel_free(mldfm_panel* panel);
int mldfm_panel_dims(const mldfm_panel* panel, int* T, int* N);

typedef struct mldfm_estimate mldfm_estimate;

/* method NULL uses the config's estimator. */
int mldfm_estimate_run(const mldfm_panel* panel, const char* method, const mldfm_config* config,
                       mldfm_estimate** out);
void mldfm_estimate_free(mldfm_estimate* estimate);

/* Writes factors.csv, loadings.csv, diagnostics.json. */
int mldfm_estimate_write(const mldfm_estimate* estimate, const char* out_dir);

/* Diagnostics JSON (iterations, RSS trace, identification report). */
int mldfm_estimate_info_json(const mldfm_estimate* estimate, char** out_json);

/* ----- asymptotic MSE --------------------------------------------------- */

/* variant is "hr", "hrs", "fpr", or "fprs".  Reads the panel plus previously
 * estimated factors/loadings, and writes avar.csv and regions.csv. */
int mldfm_mse_run(const mldfm_config* config, const char* panel_csv, const char* factors_csv,
                  const char* loadings_csv, const char* variant, const char* out_dir);

/* ----- Monte Carlo experiments ------------------------------------------ */

typedef struct mldfm_experiment mldfm_experiment;

/* workers <= 0 uses the hardware parallelism. */
int mldfm_experiment_run(const mldfm_config* config, int workers, mldfm_experiment** out);
void mldfm_experiment_free(mldfm_experiment* experiment);

/* Writes table.csv and histograms.json. */
int mldfm_experiment_write(const mldfm_experiment* experiment, const char* out_dir);

/* Summary JSON: replications, failures, runtime_seconds, eq16_max_violation. */
int mldfm_experiment_info_json(const mldfm_experiment* experiment, char** out_json);

/* ----- reports and manifests -------------------------------------------- */

/* Renders a table.csv file as aligned plain text. */
int mldfm_render_table(const char* table_csv_path, char** out_text);

/* Writes a run manifest with SHA-256 checksums for the named artifacts
 * (comma-separated file names, resolved relative to out_dir). */
int mldfm_manifest_write(const char* manifest_path, const char* command, const char* config_path,
                         const char* out_dir, uint64_t seed, const char* started,
                         const char* finished, const char* artifacts_csv);

#ifdef __cplusplus
}
#endif

#endif /* MLDFM_H */
