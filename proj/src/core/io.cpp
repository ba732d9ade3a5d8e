#include "core/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "core/ident.hpp"
#include "json.hpp"

namespace mldfm {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

const json& require_key(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error::config("missing config key \"" + key + "\"");
  return *it;
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer())
    throw Error::config("config key \"" + key + "\" must be an integer");
  const auto wide = v.get<std::int64_t>();
  if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max())
    throw Error::config("config key \"" + key + "\" is out of range");
  return static_cast<int>(wide);
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw Error::config("config key \"" + key + "\" must be a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw Error::config("config key \"" + key + "\" must be true or false");
  return v.get<bool>();
}

std::uint64_t as_u64(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto wide = v.get<std::int64_t>();
    if (wide < 0)
      throw Error::config("config key \"" + key + "\" must be a non-negative integer");
    return static_cast<std::uint64_t>(wide);
  }
  throw Error::config("config key \"" + key + "\" must be a non-negative integer");
}

std::vector<int> as_int_list(const json& v, const std::string& key) {
  if (!v.is_array()) throw Error::config("config key \"" + key + "\" must be a list of integers");
  std::vector<int> out;
  out.reserve(v.size());
  for (const json& item : v) out.push_back(as_int(item, key));
  return out;
}

}  // namespace

FileConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error::config(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error::config("config must be a JSON object");

  static const std::set<std::string> allowed = {
      "schema_version", "T", "group_sizes", "r_g", "r_s", "phi", "c", "tau",
      "heteroscedastic", "seed", "M", "estimator", "delta", "subsample", "variants",
      "bins", "tol", "max_iter"};
  for (const auto& item : root.items())
    if (allowed.count(item.key()) == 0)
      throw Error::config("unknown config key \"" + item.key() + "\"");

  FileConfig out;
  out.schema_version = as_int(require_key(root, "schema_version"), "schema_version");
  if (out.schema_version != 1)
    throw Error::config("config key \"schema_version\" must be 1, got " +
                        std::to_string(out.schema_version));

  ExperimentConfig& exp = out.experiment;
  exp.T = as_int(require_key(root, "T"), "T");
  std::vector<int> sizes = as_int_list(require_key(root, "group_sizes"), "group_sizes");
  const int r_g = as_int(require_key(root, "r_g"), "r_g");
  std::vector<int> r_s = as_int_list(require_key(root, "r_s"), "r_s");
  exp.structure = GroupStructure::make(std::move(sizes), r_g, std::move(r_s));
  exp.phi = as_double(require_key(root, "phi"), "phi");
  exp.c = as_double(require_key(root, "c"), "c");
  exp.tau = as_double(require_key(root, "tau"), "tau");
  exp.heteroscedastic = as_bool(require_key(root, "heteroscedastic"), "heteroscedastic");
  exp.seed = as_u64(require_key(root, "seed"), "seed");

  if (root.contains("M")) exp.M = as_int(root["M"], "M");
  if (root.contains("estimator")) {
    const json& v = root["estimator"];
    if (!v.is_string()) throw Error::config("config key \"estimator\" must be \"pc\" or \"sls\"");
    const std::string name = lower(v.get<std::string>());
    if (name == "pc")
      exp.estimator = Estimator::PC;
    else if (name == "sls")
      exp.estimator = Estimator::SLS;
    else
      throw Error::config("config key \"estimator\" must be \"pc\" or \"sls\", got \"" +
                          v.get<std::string>() + "\"");
  }
  if (root.contains("delta")) exp.delta = as_double(root["delta"], "delta");
  if (root.contains("subsample")) {
    const json& sub = root["subsample"];
    if (!sub.is_object()) throw Error::config("config key \"subsample\" must be an object");
    static const std::set<std::string> sub_allowed = {"B", "block_fraction", "seed"};
    for (const auto& item : sub.items())
      if (sub_allowed.count(item.key()) == 0)
        throw Error::config("unknown config key \"subsample." + item.key() + "\"");
    if (sub.contains("B")) exp.subsample.B = as_int(sub["B"], "subsample.B");
    if (sub.contains("block_fraction"))
      exp.subsample.block_fraction = as_double(sub["block_fraction"], "subsample.block_fraction");
    if (sub.contains("seed")) exp.subsample.seed = as_u64(sub["seed"], "subsample.seed");
  }
  if (root.contains("variants")) {
    const json& v = root["variants"];
    if (!v.is_array()) throw Error::config("config key \"variants\" must be a list of strings");
    exp.variants.clear();
    for (const json& item : v) {
      if (!item.is_string())
        throw Error::config("config key \"variants\" must be a list of strings");
      try {
        exp.variants.push_back(parse_variant(item.get<std::string>()));
      } catch (const Error& e) {
        throw Error::config(std::string("config key \"variants\": ") + e.what());
      }
    }
  }
  if (root.contains("bins")) exp.bins = as_int(root["bins"], "bins");
  if (root.contains("tol")) exp.tol = as_double(root["tol"], "tol");
  if (root.contains("max_iter")) exp.max_iter = as_int(root["max_iter"], "max_iter");

  exp.validate();
  return out;
}

FileConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string format_double(double value) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (res.ec != std::errc())
    throw Error::internal("format_double: conversion failed");
  return std::string(buf.data(), res.ptr);
}

namespace {

double parse_csv_double(const std::string& field, const std::string& path, std::size_t line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw Error::io(path + ":" + std::to_string(line) + ": malformed number \"" + field + "\"");
  return value;
}

bool needs_quotes(const std::string& field) {
  return field.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quoted(const std::string& field) {
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

Csv read_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    /* Skip blank lines (a single empty unquoted field). */
    if (!(record.size() == 1 && record[0].empty())) records.push_back(record);
    record.clear();
  };

  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    const char ch = text[pos];
    if (in_quotes) {
      if (ch == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field += '"';
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
    } else if (ch == '"' && field.empty() && !field_was_quoted) {
      in_quotes = true;
      field_was_quoted = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\n') {
      /* CRLF line endings: strip the carriage return, but only from unquoted
         fields — a quoted field owns every byte it contains. */
      if (!field_was_quoted && !field.empty() && field.back() == '\r') field.pop_back();
      end_record();
      ++line;
    } else {
      field += ch;
    }
  }
  if (in_quotes)
    throw Error::io(path + ":" + std::to_string(line) + ": unterminated quoted field");
  if (!field.empty() || !record.empty() || field_was_quoted) {
    if (!field_was_quoted && !field.empty() && field.back() == '\r') field.pop_back();
    end_record();
  }

  if (records.empty()) throw Error::io(path + ": empty CSV, expected a header row");
  Csv out;
  out.header = records.front();
  out.rows.assign(records.begin() + 1, records.end());
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    if (out.rows[i].size() != out.header.size())
      throw Error::io(path + ":" + std::to_string(i + 2) + ": expected " +
                      std::to_string(out.header.size()) + " fields, got " +
                      std::to_string(out.rows[i].size()));
  }
  return out;
}

void write_csv(const std::string& path, const Csv& data) {
  std::ostringstream body;
  auto emit_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) body << ',';
      body << (needs_quotes(row[i]) ? quoted(row[i]) : row[i]);
    }
    body << '\n';
  };
  emit_row(data.header);
  for (const auto& row : data.rows) emit_row(row);
  write_text_file(path, body.str());
}

namespace {

std::vector<std::string> series_labels(int N) {
  std::vector<std::string> out;
  out.reserve(N);
  for (int i = 0; i < N; ++i) out.push_back("y" + std::to_string(i + 1));
  return out;
}

/* Reads a CSV whose first column is an index/label and returns the remaining
   numeric columns as a matrix. */
Matrix read_indexed_matrix(const std::string& path) {
  Csv csv = read_csv(path);
  if (csv.header.size() < 2)
    throw Error::io(path + ": expected an index column plus at least one value column");
  const int rows = static_cast<int>(csv.rows.size());
  const int cols = static_cast<int>(csv.header.size()) - 1;
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out(i, j) = parse_csv_double(csv.rows[i][j + 1], path, i + 2);
  return out;
}

}  // namespace

void write_panel_csv(const std::string& path, const PanelData& panel) {
  Csv csv;
  csv.header.push_back("t");
  for (const std::string& label : series_labels(panel.N())) csv.header.push_back(label);
  csv.rows.reserve(panel.T());
  for (int t = 0; t < panel.T(); ++t) {
    std::vector<std::string> row;
    row.reserve(panel.N() + 1);
    row.push_back(std::to_string(t + 1));
    for (int i = 0; i < panel.N(); ++i) row.push_back(format_double(panel.Y(t, i)));
    csv.rows.push_back(std::move(row));
  }
  write_csv(path, csv);
}

PanelData read_panel_csv(const std::string& path, const GroupStructure& structure) {
  structure.validate();
  Matrix Y = read_indexed_matrix(path);
  if (Y.cols() != structure.N())
    throw Error::argument(path + ": panel has " + std::to_string(Y.cols()) +
                          " series but the group structure expects " +
                          std::to_string(structure.N()));
  PanelData panel;
  panel.Y = std::move(Y);
  panel.structure = structure;
  panel.validate();
  return panel;
}

void write_factors_csv(const std::string& path, const Matrix& F,
                       const GroupStructure& structure) {
  const std::vector<std::string> labels = factor_labels(structure);
  if (F.cols() != static_cast<int>(labels.size()))
    throw Error::argument("write_factors_csv: factor columns do not match the structure");
  Csv csv;
  csv.header.push_back("t");
  for (const std::string& label : labels) csv.header.push_back(label);
  for (int t = 0; t < F.rows(); ++t) {
    std::vector<std::string> row;
    row.reserve(F.cols() + 1);
    row.push_back(std::to_string(t + 1));
    for (int k = 0; k < F.cols(); ++k) row.push_back(format_double(F(t, k)));
    csv.rows.push_back(std::move(row));
  }
  write_csv(path, csv);
}

Matrix read_factors_csv(const std::string& path) { return read_indexed_matrix(path); }

void write_loadings_csv(const std::string& path, const Matrix& Lambda,
                        const GroupStructure& structure) {
  const std::vector<std::string> labels = factor_labels(structure);
  if (Lambda.cols() != static_cast<int>(labels.size()))
    throw Error::argument("write_loadings_csv: loading columns do not match the structure");
  Csv csv;
  csv.header.push_back("series");
  for (const std::string& label : labels) csv.header.push_back(label);
  for (int i = 0; i < Lambda.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(Lambda.cols() + 1);
    row.push_back("y" + std::to_string(i + 1));
    for (int k = 0; k < Lambda.cols(); ++k) row.push_back(format_double(Lambda(i, k)));
    csv.rows.push_back(std::move(row));
  }
  write_csv(path, csv);
}

Matrix read_loadings_csv(const std::string& path) { return read_indexed_matrix(path); }

void write_sigma_csv(const std::string& path, const Matrix& sigma) {
  if (sigma.rows() != sigma.cols())
    throw Error::argument("write_sigma_csv: covariance matrix must be square");
  Csv csv;
  csv.header.push_back("series");
  for (const std::string& label : series_labels(static_cast<int>(sigma.cols())))
    csv.header.push_back(label);
  for (int i = 0; i < sigma.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(sigma.cols() + 1);
    row.push_back("y" + std::to_string(i + 1));
    for (int j = 0; j < sigma.cols(); ++j) row.push_back(format_double(sigma(i, j)));
    csv.rows.push_back(std::move(row));
  }
  write_csv(path, csv);
}

std::string diagnostics_json(const FactorEstimate& est, const GroupStructure& structure) {
  structure.validate();
  const int r = structure.r();
  if (est.F_hat.cols() != r || est.Lambda_hat.cols() != r ||
      est.Lambda_hat.rows() != structure.N())
    throw Error::argument("diagnostics_json: estimate dimensions do not match the structure");

  /* Split the stacked estimate into identification blocks for the report. */
  Matrix G = est.F_hat.leftCols(structure.r_g);
  Matrix Lambda_g = est.Lambda_hat.leftCols(structure.r_g);
  std::vector<Matrix> L(structure.S);
  std::vector<Matrix> Lambda_l(structure.S);
  for (int s = 0; s < structure.S; ++s) {
    L[s] = est.F_hat.middleCols(structure.local_col(s), structure.r_s[s]);
    Lambda_l[s] = est.Lambda_hat.block(structure.group_offset(s), structure.local_col(s),
                                       structure.group_sizes[s], structure.r_s[s]);
  }
  IdentReport report = check_identification(G, L, Lambda_g, Lambda_l, 1e-6);

  json out;
  out["estimator"] = est.estimator == Estimator::PC ? "pc" : "sls";
  out["iterations"] = est.iterations;
  out["converged"] = est.converged;
  out["rss_trace"] = est.rss_trace;
  out["warnings"] = est.warnings;
  json checks = json::array();
  for (const IdentCheck& check : report.checks) {
    checks.push_back(
        {{"name", check.name}, {"pass", check.pass}, {"max_violation", check.max_violation}});
  }
  out["identification"] = {
      {"tol", report.tol}, {"all_pass", report.all_pass}, {"checks", checks}};
  return out.dump(2) + "\n";
}

void write_avar_csv(const std::string& path, const std::vector<AvarEstimate>& series) {
  Csv csv;
  csv.header = {"variant", "t", "i", "j", "value"};
  for (const AvarEstimate& est : series) {
    const int r = static_cast<int>(est.value.rows());
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        csv.rows.push_back({to_string(est.variant), std::to_string(est.t + 1),
                            std::to_string(i + 1), std::to_string(j + 1),
                            format_double(est.value(i, j))});
  }
  write_csv(path, csv);
}

std::string avar_json(const std::vector<AvarEstimate>& series) {
  json out = json::array();
  for (const AvarEstimate& est : series) {
    std::vector<double> row_major;
    row_major.reserve(est.value.size());
    for (int i = 0; i < est.value.rows(); ++i)
      for (int j = 0; j < est.value.cols(); ++j) row_major.push_back(est.value(i, j));
    out.push_back({{"variant", to_string(est.variant)}, {"t", est.t + 1}, {"matrix", row_major}});
  }
  return out.dump(2) + "\n";
}

void write_regions_csv(const std::string& path, const std::vector<AvarEstimate>& series,
                       const GroupStructure& structure, double alpha) {
  const std::vector<std::string> labels = factor_labels(structure);
  Csv csv;
  csv.header = {"t", "factor", "half_width"};
  for (const AvarEstimate& est : series) {
    if (est.value.rows() != static_cast<int>(labels.size()))
      throw Error::argument("write_regions_csv: Avar dimension does not match the structure");
    for (int k = 0; k < est.value.rows(); ++k)
      csv.rows.push_back(
          {std::to_string(est.t + 1), labels[k], format_double(region_half_width(est, k, alpha))});
  }
  write_csv(path, csv);
}

namespace {

/* Table row order: every factor's diagonal, then factor pairs — superdiagonal
   order for a plain DFM ((F1,F2),(F2,F3),(F1,F3)), lexicographic for the
   multi-level layout ((G,L1),(G,L2),(L1,L2)). */
std::vector<std::pair<int, int>> table_cells(const GroupStructure& structure) {
  const int r = structure.r();
  std::vector<std::pair<int, int>> cells;
  for (int k = 0; k < r; ++k) cells.emplace_back(k, k);
  if (structure.is_plain_dfm()) {
    for (int d = 1; d < r; ++d)
      for (int i = 0; i + d < r; ++i) cells.emplace_back(i, i + d);
  } else {
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j) cells.emplace_back(i, j);
  }
  return cells;
}

}  // namespace

void write_table_csv(const std::string& path, const ExperimentResult& result) {
  const std::vector<std::string> labels = factor_labels(result.structure);
  const std::vector<MseVariant> variant_cols = {MseVariant::True, MseVariant::HR, MseVariant::HRS,
                                                MseVariant::FPR, MseVariant::FPRS};
  Csv csv;
  csv.header = {"factors", "MSE", "Cov", "Bias2", "Asym-MSE", "HR", "HRS", "FPR", "FPRS"};
  for (const auto& [i, j] : table_cells(result.structure)) {
    std::vector<std::string> row;
    row.reserve(csv.header.size());
    row.push_back(i == j ? "(" + labels[i] + ")" : "(" + labels[i] + "," + labels[j] + ")");
    row.push_back(format_double(10.0 * result.empirical_mse(i, j)));
    row.push_back(format_double(10.0 * result.empirical_cov(i, j)));
    row.push_back(format_double(10.0 * result.empirical_bias2(i, j)));
    for (MseVariant v : variant_cols) {
      const auto it = result.asymptotic.find(v);
      row.push_back(it == result.asymptotic.end() ? ""
                                                  : format_double(10.0 * it->second(i, j)));
    }
    csv.rows.push_back(std::move(row));
  }
  write_csv(path, csv);
}

std::string render_table(const Csv& table) {
  /* Re-format numeric cells to four decimals; keep labels and blanks as-is. */
  std::vector<std::vector<std::string>> grid;
  grid.push_back(table.header);
  for (const auto& row : table.rows) {
    std::vector<std::string> line;
    line.reserve(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == 0 || row[i].empty()) {
        line.push_back(row[i]);
      } else {
        std::ostringstream fmt;
        fmt.setf(std::ios::fixed);
        fmt.precision(4);
        double value = 0.0;
        const char* begin = row[i].data();
        const auto res = std::from_chars(begin, begin + row[i].size(), value);
        if (res.ec != std::errc() || res.ptr != begin + row[i].size()) {
          line.push_back(row[i]);  // not numeric, render verbatim
        } else {
          fmt << value;
          line.push_back(fmt.str());
        }
      }
    }
    grid.push_back(std::move(line));
  }

  std::vector<std::size_t> widths;
  for (const auto& row : grid) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }

  std::ostringstream out;
  for (std::size_t ri = 0; ri < grid.size(); ++ri) {
    const auto& row = grid[ri];
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << "  ";
      if (i == 0) {
        out << row[i] << std::string(widths[i] - row[i].size(), ' ');
      } else {
        out << std::string(widths[i] - row[i].size(), ' ') << row[i];
      }
    }
    out << '\n';
    if (ri == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < widths.size(); ++i) total += widths[i] + (i > 0 ? 2 : 0);
      out << std::string(total, '-') << '\n';
    }
  }
  return out.str();
}

void write_histograms_json(const std::string& path, const ExperimentResult& result) {
  const std::vector<std::string> labels = factor_labels(result.structure);
  json cells = json::array();
  for (const HistogramCell& cell : result.histogram_cells) {
    json entry;
    entry["t"] = cell.t + 1;
    entry["factor"] = labels.at(cell.factor);
    entry["truth"] = cell.truth;
    entry["asymptotic_sd"] = cell.asymptotic_sd;
    entry["estimates_count"] = cell.estimates.size();
    if (cell.estimates.size() >= 2 && cell.asymptotic_sd > 0.0) {
      Histogram hist =
          histogram_data(cell.estimates, result.bins, cell.asymptotic_sd, cell.truth);
      entry["edges"] = hist.edges;
      entry["counts"] = hist.counts;
      entry["density_x"] = hist.density_x;
      entry["density_y"] = hist.density_y;
    } else {
      entry["edges"] = json::array();
      entry["counts"] = json::array();
      entry["density_x"] = json::array();
      entry["density_y"] = json::array();
    }
    cells.push_back(std::move(entry));
  }
  json out;
  out["schema_version"] = 1;
  out["bins"] = result.bins;
  out["cells"] = std::move(cells);
  write_text_file(path, out.dump(2) + "\n");
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw Error::internal("sha256_file: EVP context allocation failed");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 65536> buf;
  for (;;) {
    in.read(buf.data(), buf.size());
    const std::streamsize got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(got));
    if (got < static_cast<std::streamsize>(buf.size())) break;
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_path, const std::string& output_dir,
                    std::uint64_t seed, const std::string& started, const std::string& finished,
                    const std::vector<std::string>& artifacts) {
  json checksums = json::object();
  for (const std::string& name : artifacts)
    checksums[name] = sha256_file(output_dir + "/" + name);
  json out;
  out["command"] = command;
  out["config_path"] = config_path;
  out["output_dir"] = output_dir;
  out["seed"] = seed;
  out["started"] = started;
  out["finished"] = finished;
  out["artifacts"] = std::move(checksums);
  write_text_file(path, out.dump(2) + "\n");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::io("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error::io("cannot read " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error::io("cannot write " + path);
  out << content;
  out.flush();
  if (!out) throw Error::io("cannot write " + path);
}

}  // namespace mldfm
