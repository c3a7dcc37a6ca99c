#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcbats/combine.hpp"
#include "dcbats/inference.hpp"

namespace dcbats {

enum class CovariateGenerator {
  None,
  IidNormal,           // z_t ~ N(0, I)
  NonstationaryDrift,  // z_t = (2t/T - 1) 1 + N(0, I): covariate means drift across segments
};

enum class InitStrategy {
  PriorMean,  // sampler default
  Truth,      // start every chain at the data-generating value
  Explicit,   // start at ExperimentSpec::init_value
};

std::string to_string(CovariateGenerator g);
CovariateGenerator parse_covariate_generator(const std::string& s);

struct ExperimentSpec {
  ExperimentSpec(std::string name, Model model, PriorSpec prior)
      : name(std::move(name)), model(std::move(model)), prior(std::move(prior)) {}

  std::string name;
  Model model;
  PriorSpec prior;
  /// Data-generating value in the model's free space. NaN entries mean unknown
  /// (real data), which disables coverage for those coordinates.
  VectorXd true_theta;
  Index T = 0;
  std::vector<Index> K_list;
  Index n_replicates = 1;
  double level = 0.95;
  SamplerConfig sampler;
  CovariateGenerator covariates = CovariateGenerator::None;
  InitStrategy init = InitStrategy::PriorMean;
  VectorXd init_value;
  /// Master seed; data and sampler seeds of every replicate derive from it.
  std::uint64_t seed = 0;
  /// Fixed dataset instead of simulation; requires n_replicates = 1.
  std::optional<TimeSeries> data;

  /// Throws ConfigError, DivisibilityError or DimensionError.
  void validate() const;
};

/// Seed used to simulate replicate r (1-based) and seed handed to its chains.
std::uint64_t replicate_data_seed(const ExperimentSpec& spec, Index r);
std::uint64_t replicate_sampler_seed(const ExperimentSpec& spec, Index r);

/// Covariates for T rows from the given generator.
std::optional<MatrixXd> generate_covariates(CovariateGenerator g, Index T, Index dim, std::uint64_t seed);

/// The dataset replicate r sees: spec.data when set, otherwise a fresh simulation.
TimeSeries replicate_series(const ExperimentSpec& spec, Index r);

struct MomentAlignment {
  double mean_gap = 0.0;
  double var_ratio = 1.0;
};

/// |mean(a) - mean(b)| and var(a) / var(b), b being the full-posterior draws.
/// Throws EmptyInputError or ZeroVarianceError (degenerate b).
MomentAlignment moment_alignment(const VectorXd& dcbats_draws, const VectorXd& full_draws);

/// Unbiased sample variance.
double sample_variance(const VectorXd& x);

struct ParameterRecord {
  Index replicate = 0;
  Index K = 0;
  std::string param;
  double truth = 0.0;
  Interval dcbats_interval;
  Interval full_interval;
  double dcbats_mean = 0.0;
  double full_mean = 0.0;
  double dcbats_var = 0.0;
  double full_var = 0.0;
  double w2 = 0.0;
  MomentAlignment alignment;
  /// Empty when the truth is unknown.
  std::optional<bool> dcbats_covered;
  std::optional<bool> full_covered;
};

/// Across-replicate coverage of one parameter for one K and method.
struct CoverageSummary {
  Index K = 0;
  std::string param;
  std::string method;  // "dcbats" or "full"
  Index covered = 0;
  Index counted = 0;
  double rate() const { return counted ? static_cast<double>(covered) / static_cast<double>(counted) : std::nan(""); }
};

/// Coverage across the components of one parameter block within one replicate.
struct BlockCoverage {
  Index replicate = 0;
  Index K = 0;
  std::string block;
  std::string method;
  Index covered = 0;
  Index counted = 0;
};

struct ReplicateFailure {
  Index replicate = 0;
  std::string message;
};

struct ChainTiming {
  Index replicate = 0;
  Index K = 0;  // 0 for the full posterior
  Index k = 0;
  double seconds = 0.0;
};

struct ComparisonReport {
  std::string experiment;
  std::vector<std::string> names;
  std::vector<ParameterRecord> records;  // ordered by (replicate, K, parameter)
  std::vector<CoverageSummary> coverage;
  std::vector<BlockCoverage> block_coverage;
  std::vector<ReplicateFailure> failures;
  /// Wall-clock measurements; kept apart from everything else because they
  /// vary between runs.
  std::vector<ChainTiming> chain_timings;
  double simulate_seconds = 0.0;
  double sampling_seconds = 0.0;
  double combine_seconds = 0.0;

  /// Records of one (replicate, K) cell.
  std::vector<const ParameterRecord*> cell(Index replicate, Index K) const;
};

/// Everything produced for one replicate, handed to an ExperimentSink in
/// replicate order once that replicate is combined.
struct ReplicateArtifacts {
  Index replicate = 0;
  const TimeSeries* series = nullptr;
  const DrawSet* full = nullptr;
  /// Per K in K_list order: the K subsequence draw sets and their combination.
  std::vector<Index> K_list;
  std::vector<const std::vector<DrawSet>*> subsequences;
  std::vector<const MarginalCombination*> combinations;
};

using ExperimentSink = std::function<void(const ReplicateArtifacts&)>;

struct RunOptions {
  unsigned threads = 0;
  ExperimentSink sink;
  /// Replicates whose chains are in flight together; bounds memory.
  Index replicate_batch = 8;
};

/// Full posterior and DC-BATS for every replicate and K, combined and compared.
///
/// A replicate whose simulation or sampling throws is listed in
/// report.failures and contributes no records. Results do not depend on the
/// thread count.
ComparisonReport run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Deterministic report content (no timings).
std::string report_json(const ComparisonReport& report);
/// Flat table: replicate,K,param,method,lo,hi,mean,var,w2,covered.
std::string report_csv(const ComparisonReport& report);
std::string timings_json(const ComparisonReport& report);

}  // namespace dcbats
