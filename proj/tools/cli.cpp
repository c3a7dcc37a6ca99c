#include "cli.hpp"

#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "dcbats/config.hpp"
#include "dcbats/io.hpp"
#include "json.hpp"

namespace dcbats {

namespace {

// Raised for bad invocations that get past CLI11 (missing output dir, refusing to overwrite).
class UsageError : public Error {
 public:
  using Error::Error;
};

enum ExitCode { kOk = 0, kRuntime = 1, kUsage = 2 };

fs::path prepare_output(const std::optional<std::string>& flag, const std::optional<std::string>& from_config,
                        bool force) {
  const auto chosen = flag ? flag : from_config;
  if (!chosen || chosen->empty()) throw UsageError("no output directory: pass --out or set output.dir");
  const fs::path dir(*chosen);
  if (fs::exists(dir) && !fs::is_directory(dir)) throw UsageError("'" + dir.string() + "' exists and is not a directory");
  if (fs::exists(dir) && !fs::is_empty(dir) && !force) {
    throw UsageError("output directory '" + dir.string() + "' is not empty; use --force to overwrite");
  }
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// beta[3] -> beta_3, safe in file names.
std::string file_stem(const std::string& param) {
  std::string out;
  for (char c : param) {
    if (c == '[') out += '_';
    else if (c != ']') out += c;
  }
  return out;
}

struct SimulateArgs {
  std::string config;
  std::optional<std::string> out;
  bool force = false;
  Index replicate = 1;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const RunConfig cfg = load_run_config(a.config);
  const ExperimentSpec& spec = cfg.spec;
  if (spec.data) throw ConfigError("simulate needs a synthetic experiment; this config reads data from a file");
  if (a.replicate < 1 || a.replicate > spec.n_replicates) {
    throw UsageError("--replicate must lie in 1.." + std::to_string(spec.n_replicates));
  }
  const fs::path dir = prepare_output(a.out, cfg.output.dir, a.force);
  const TimeSeries series = replicate_series(spec, a.replicate);
  write_series(dir / "data.csv", dir / "covariates.csv", series);

  nlohmann::ordered_json meta;
  meta["experiment"] = spec.name;
  meta["model"] = spec.model.name();
  meta["replicate"] = a.replicate;
  meta["seed"] = replicate_data_seed(spec, a.replicate);
  meta["T"] = spec.T;
  meta["covariates"] = to_string(spec.covariates);
  nlohmann::ordered_json truth;
  const auto names = spec.model.space().coordinate_names();
  for (std::size_t j = 0; j < names.size(); ++j) truth[names[j]] = spec.true_theta[static_cast<Index>(j)];
  meta["truth"] = truth;
  write_text(dir / "data.json", meta.dump(2) + "\n");
  out << "wrote " << series.length() << " rows to " << (dir / "data.csv").string() << "\n";
  return kOk;
}

struct RunArgs {
  std::string config;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  bool force = false;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_run_config(a.config);
  const fs::path dir = prepare_output(a.out, cfg.output.dir, a.force);
  RunOptions options;
  options.threads = a.threads ? *a.threads : cfg.threads.value_or(0);
  const std::vector<std::string> names = cfg.spec.model.space().coordinate_names();
  if (cfg.output.draws || cfg.output.barycenters) {
    options.sink = [&](const ReplicateArtifacts& art) {
      const std::string rep = "rep" + std::to_string(art.replicate);
      if (cfg.output.draws) {
        write_drawset(dir / "draws" / (rep + "_full.csv"), *art.full);
        for (std::size_t ki = 0; ki < art.K_list.size(); ++ki) {
          const auto& chains = *art.subsequences[ki];
          for (std::size_t k = 0; k < chains.size(); ++k) {
            write_drawset(dir / "draws" /
                              (rep + "_K" + std::to_string(art.K_list[ki]) + "_k" + std::to_string(k + 1) + ".csv"),
                          chains[k]);
          }
        }
      }
      if (cfg.output.barycenters) {
        for (std::size_t ki = 0; ki < art.K_list.size(); ++ki) {
          const std::string cell = rep + "_K" + std::to_string(art.K_list[ki]);
          const MarginalCombination& comb = *art.combinations[ki];
          write_drawset(dir / "barycenters" / (cell + ".csv"), barycenter_drawset(comb));
          for (std::size_t j = 0; j < comb.names.size(); ++j) {
            write_barycenter(dir / "barycenters" / (cell + "_" + file_stem(comb.names[j]) + ".csv"),
                             comb.barycenters[j]);
          }
        }
      }
    };
  }
  const ComparisonReport report = run_experiment(cfg.spec, options);
  write_text(dir / "report.json", report_json(report));
  write_text(dir / "report.csv", report_csv(report));
  write_text(dir / "timings.json", timings_json(report));

  out << cfg.spec.name << ": " << report.records.size() << " parameter records";
  for (const auto& c : report.coverage) {
    if (c.method == "dcbats" && c.counted > 0) {
      out << "\n  K=" << c.K << " " << c.param << " coverage " << c.covered << "/" << c.counted;
    }
  }
  out << "\n";
  for (const auto& f : report.failures) err << "replicate " << f.replicate << " failed: " << f.message << "\n";
  return report.failures.empty() ? kOk : kRuntime;
}

struct CombineArgs {
  std::vector<std::string> inputs;
  double level = 0.95;
  std::optional<std::string> out;
  bool force = false;
  bool grid = false;
};

int cmd_combine(const CombineArgs& a, std::ostream& out) {
  std::vector<DrawSet> sets;
  for (const auto& path : a.inputs) sets.push_back(read_drawset(path));
  const MarginalCombination comb =
      combine_marginals(sets, a.level, a.grid ? SizePolicy::QuantileGrid : SizePolicy::Strict);
  const fs::path dir = prepare_output(a.out, std::nullopt, a.force);
  write_drawset(dir / "barycenter.csv", barycenter_drawset(comb));
  MatrixXd intervals(static_cast<Index>(comb.names.size()), 2);
  std::ostringstream table;
  table << "param,lo,hi\n";
  for (std::size_t j = 0; j < comb.names.size(); ++j) {
    table << comb.names[j] << ',' << format_double(comb.intervals[j].lo) << ','
          << format_double(comb.intervals[j].hi) << '\n';
    write_barycenter(dir / "quantiles" / (file_stem(comb.names[j]) + ".csv"), comb.barycenters[j]);
  }
  write_text(dir / "intervals.csv", table.str());
  out << "combined " << sets.size() << " draw sets over " << comb.names.size() << " parameters\n";
  return kOk;
}

bool is_usage_error(const Error& e) {
  return dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
         dynamic_cast<const ParseError*>(&e) || dynamic_cast<const MissingValueError*>(&e) ||
         dynamic_cast<const SpaceMismatchError*>(&e) || dynamic_cast<const LengthMismatchError*>(&e) ||
         dynamic_cast<const DivisibilityError*>(&e);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Divide-and-conquer Bayesian inference for long time series"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate one replicate's dataset from an experiment config");
  simulate->add_option("config", sim.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", sim.out, "Output directory (default: output.dir in the config)");
  simulate->add_option("--replicate", sim.replicate, "Replicate to simulate (1-based)");
  simulate->add_flag("--force", sim.force, "Write into a non-empty output directory");

  RunArgs run;
  auto* runc = app.add_subcommand("run", "Run an experiment: full posterior, DC-BATS, combination, report");
  runc->add_option("config", run.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  runc->add_option("-o,--out", run.out, "Output directory (default: output.dir in the config)");
  runc->add_option("-t,--threads", run.threads, "Worker threads (0 = all cores)");
  runc->add_flag("--force", run.force, "Write into a non-empty output directory");

  CombineArgs comb;
  auto* combine = app.add_subcommand("combine", "Wasserstein barycenter of draw CSV files");
  combine->add_option("draws", comb.inputs, "DrawSet CSV files")->required()->check(CLI::ExistingFile);
  combine->add_option("-l,--level", comb.level, "Credible level")->check(CLI::Range(0.0, 1.0));
  combine->add_option("-o,--out", comb.out, "Output directory")->required();
  combine->add_flag("--quantile-grid", comb.grid, "Allow draw sets of different sizes");
  combine->add_flag("--force", comb.force, "Write into a non-empty output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (runc->parsed()) return cmd_run(run, out, err);
    return cmd_combine(comb, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_usage_error(e) ? kUsage : kRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"dcbats"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace dcbats
