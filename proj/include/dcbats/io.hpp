#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dcbats/combine.hpp"
#include "dcbats/core.hpp"

namespace dcbats {

namespace fs = std::filesystem;

/// Header plus numeric body of a comma-separated file.
struct CsvTable {
  std::vector<std::string> header;
  MatrixXd values;

  /// Zero-based position of a named column; ParseError when absent.
  Index column(const std::string& name) const;
};

/// Reads a numeric CSV with a header row.
///
/// Empty cells and "NA" raise MissingValueError, anything else non-numeric
/// raises ParseError; both name the 1-based data row and the column.
CsvTable read_csv(const fs::path& path);

/// Writes doubles in shortest round-trip form, so reading back is exact.
void write_csv(const fs::path& path, const std::vector<std::string>& header, const MatrixXd& values);

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

/// DrawSet as CSV (one column per coordinate name) plus `<path>.json` holding
/// burn_in, acceptance_rate, seed and target_label.
void write_drawset(const fs::path& path, const DrawSet& draws);
/// Missing sidecar leaves the metadata at its defaults.
DrawSet read_drawset(const fs::path& path);

/// Columns u, q_bar.
void write_barycenter(const fs::path& path, const BarycenterResult& result);

/// Observations to `path` (columns x1.. unless the series carries labels);
/// covariates, when present, to `covariate_path` (z1..).
void write_series(const fs::path& path, const fs::path& covariate_path, const TimeSeries& series);

struct CsvSchema {
  std::vector<std::string> obs_columns;
  std::vector<std::string> covariate_columns;
  /// Replace each observation x by log(0.1 + x).
  bool log_transform = false;
};

/// Loads a TimeSeries from a CSV; the schema picks columns by header name.
/// Covariates may live in the same file or, when `covariate_path` is given, in
/// a second file with the same row count.
TimeSeries ingest_csv(const fs::path& path, const CsvSchema& schema,
                      const fs::path& covariate_path = {});

}  // namespace dcbats
