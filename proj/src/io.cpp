#include "dcbats/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dcbats {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string cell_location(const fs::path& path, Index row, const std::string& column) {
  std::ostringstream msg;
  msg << path.string() << ": row " << row << ", column '" << column << "'";
  return msg.str();
}

fs::path sidecar(const fs::path& path) { return fs::path(path.string() + ".json"); }

}  // namespace

Index CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<Index>(j);
  }
  throw ParseError("no column named '" + name + "'");
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw ParseError(path.string() + ": missing header row");
  CsvTable table;
  table.header = split_row(line);
  const auto cols = static_cast<Index>(table.header.size());
  std::vector<double> cells;
  Index row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_row(line);
    if (static_cast<Index>(fields.size()) != cols) {
      std::ostringstream msg;
      msg << path.string() << ": row " << row << " has " << fields.size() << " fields, header has " << cols;
      throw ParseError(msg.str());
    }
    for (Index j = 0; j < cols; ++j) {
      const std::string& f = fields[static_cast<std::size_t>(j)];
      const std::string& name = table.header[static_cast<std::size_t>(j)];
      if (f.empty() || f == "NA") throw MissingValueError("missing value at " + cell_location(path, row, name));
      double v = 0.0;
      const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || end != f.data() + f.size()) {
        throw ParseError("non-numeric value '" + f + "' at " + cell_location(path, row, name));
      }
      cells.push_back(v);
    }
  }
  table.values.resize(row, cols);
  for (Index i = 0; i < row; ++i)
    for (Index j = 0; j < cols; ++j) table.values(i, j) = cells[static_cast<std::size_t>(i * cols + j)];
  return table;
}

std::string format_double(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, end);
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, const MatrixXd& values) {
  if (static_cast<Index>(header.size()) != values.cols()) {
    throw DimensionError("CSV header has " + std::to_string(header.size()) + " names for " +
                         std::to_string(values.cols()) + " columns");
  }
  std::ofstream out = open_out(path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_double(values(i, j));
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_drawset(const fs::path& path, const DrawSet& draws) {
  write_csv(path, draws.names, draws.draws);
  const nlohmann::ordered_json meta = {{"target_label", draws.target_label},
                                       {"burn_in", draws.burn_in},
                                       {"acceptance_rate", draws.acceptance_rate},
                                       {"seed", draws.seed}};
  std::ofstream out = open_out(sidecar(path));
  out << meta.dump(2) << '\n';
}

DrawSet read_drawset(const fs::path& path) {
  CsvTable table = read_csv(path);
  DrawSet out;
  out.names = std::move(table.header);
  out.draws = std::move(table.values);
  const fs::path meta_path = sidecar(path);
  if (fs::exists(meta_path)) {
    std::ifstream in = open_in(meta_path);
    try {
      const auto meta = nlohmann::json::parse(in);
      out.target_label = meta.at("target_label").get<std::string>();
      out.burn_in = meta.at("burn_in").get<Index>();
      out.acceptance_rate = meta.at("acceptance_rate").get<double>();
      out.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(meta_path.string() + ": " + e.what());
    }
  }
  return out;
}

void write_barycenter(const fs::path& path, const BarycenterResult& result) {
  MatrixXd table(result.u_grid.size(), 2);
  table << result.u_grid, result.q_bar;
  write_csv(path, {"u", "q_bar"}, table);
}

void write_series(const fs::path& path, const fs::path& covariate_path, const TimeSeries& series) {
  auto names = [](const std::vector<std::string>& labels, Index n, const char* prefix) {
    if (!labels.empty()) return labels;
    std::vector<std::string> out;
    for (Index j = 1; j <= n; ++j) out.push_back(prefix + std::to_string(j));
    return out;
  };
  write_csv(path, names(series.obs_labels(), series.obs_dim(), "x"), series.obs());
  if (series.has_covariates()) {
    write_csv(covariate_path, names(series.covariate_labels(), series.cov_dim(), "z"), series.covariates());
  }
}

TimeSeries ingest_csv(const fs::path& path, const CsvSchema& schema, const fs::path& covariate_path) {
  if (schema.obs_columns.empty()) throw ConfigError("ingest_csv: no observation columns selected");
  const CsvTable table = read_csv(path);
  if (table.values.rows() == 0) throw EmptyInputError(path.string() + ": no data rows");
  auto pick = [](const CsvTable& t, const std::vector<std::string>& cols) {
    MatrixXd m(t.values.rows(), static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) m.col(static_cast<Index>(j)) = t.values.col(t.column(cols[j]));
    return m;
  };
  MatrixXd obs = pick(table, schema.obs_columns);
  if (schema.log_transform) {
    for (Index i = 0; i < obs.rows(); ++i) {
      for (Index j = 0; j < obs.cols(); ++j) {
        if (!(obs(i, j) > -0.1)) {
          throw DomainError("log(0.1 + x) undefined at " +
                            cell_location(path, i + 1, schema.obs_columns[static_cast<std::size_t>(j)]));
        }
        obs(i, j) = std::log(0.1 + obs(i, j));
      }
    }
  }
  std::optional<MatrixXd> cov;
  if (!schema.covariate_columns.empty()) {
    if (covariate_path.empty()) {
      cov = pick(table, schema.covariate_columns);
    } else {
      const CsvTable ct = read_csv(covariate_path);
      if (ct.values.rows() != obs.rows()) {
        throw LengthMismatchError(covariate_path.string() + " has " + std::to_string(ct.values.rows()) +
                                  " rows, observations have " + std::to_string(obs.rows()));
      }
      cov = pick(ct, schema.covariate_columns);
    }
  }
  return TimeSeries(std::move(obs), std::move(cov), schema.obs_columns, schema.covariate_columns);
}

}  // namespace dcbats
