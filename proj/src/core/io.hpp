#pragma once

// File formats: JSON experiment configs, CSV artifacts (shortest round-trip
// doubles, RFC-4180 quoting), result tables, histogram data, and the run
// manifest with SHA-256 checksums.

#include <cstdint>
#include <string>
#include <vector>

#include "core/montecarlo.hpp"

namespace mldfm {

/* A parsed config file: the design block is mandatory, estimator/Monte-Carlo
   extras are optional with the documented defaults.  Unknown keys are errors. */
struct FileConfig {
  int schema_version = 1;
  ExperimentConfig experiment;
};

FileConfig parse_config(const std::string& json_text);
FileConfig load_config(const std::string& path);

/* Shortest decimal representation that round-trips to the same double. */
std::string format_double(double value);

/* Raw CSV with a mandatory header row. */
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Csv read_csv(const std::string& path);
void write_csv(const std::string& path, const Csv& data);

/* Typed artifact writers/readers.  Periods are written 1-based. */
void write_panel_csv(const std::string& path, const PanelData& panel);
PanelData read_panel_csv(const std::string& path, const GroupStructure& structure);

void write_factors_csv(const std::string& path, const Matrix& F, const GroupStructure& structure);
Matrix read_factors_csv(const std::string& path);

void write_loadings_csv(const std::string& path, const Matrix& Lambda,
                        const GroupStructure& structure);
Matrix read_loadings_csv(const std::string& path);

void write_sigma_csv(const std::string& path, const Matrix& sigma);

/* Estimation diagnostics: iterations, RSS trace, identification report. */
std::string diagnostics_json(const FactorEstimate& est, const GroupStructure& structure);

/* Avar series export: CSV columns (variant,t,i,j,value) and the JSON list of
   {variant, t, matrix} with the matrix in row-major order. */
void write_avar_csv(const std::string& path, const std::vector<AvarEstimate>& series);
std::string avar_json(const std::vector<AvarEstimate>& series);

/* Per-period marginal confidence half-widths at the given alpha. */
void write_regions_csv(const std::string& path, const std::vector<AvarEstimate>& series,
                       const GroupStructure& structure, double alpha);

/* Result table in the simulation-table layout: rows = factor diagonals then
   pairs, columns = MSE, Cov, Bias2, Asym-MSE, HR, HRS, FPR, FPRS, all values
   multiplied by 10.  Variants that were not computed are left empty. */
void write_table_csv(const std::string& path, const ExperimentResult& result);

/* Renders a table.csv file as aligned plain text. */
std::string render_table(const Csv& table);

void write_histograms_json(const std::string& path, const ExperimentResult& result);

std::string sha256_file(const std::string& path);

/* Run manifest: command, inputs, seed, ISO-8601 UTC timestamps, and a SHA-256
   checksum for every artifact (paths relative to the output directory). */
void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_path, const std::string& output_dir,
                    std::uint64_t seed, const std::string& started, const std::string& finished,
                    const std::vector<std::string>& artifacts);

/* Current UTC time as an ISO-8601 string. */
std::string utc_timestamp();

/* Whole-file helpers. */
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace mldfm
