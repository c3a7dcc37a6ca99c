#include "dcbats/harness.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "dcbats/io.hpp"
#include "dcbats/parallel.hpp"
#include "json.hpp"

namespace dcbats {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string to_string(CovariateGenerator g) {
  switch (g) {
    case CovariateGenerator::None: return "none";
    case CovariateGenerator::IidNormal: return "iid-normal";
    case CovariateGenerator::NonstationaryDrift: return "nonstationary-drift";
  }
  return "none";
}

CovariateGenerator parse_covariate_generator(const std::string& s) {
  if (s == "none") return CovariateGenerator::None;
  if (s == "iid-normal") return CovariateGenerator::IidNormal;
  if (s == "nonstationary-drift") return CovariateGenerator::NonstationaryDrift;
  throw ConfigError("unknown covariate generator '" + s + "' (expected none, iid-normal or nonstationary-drift)");
}

void ExperimentSpec::validate() const {
  const Index d = model.space().dim();
  if (n_replicates < 1) throw ConfigError("replicates must be at least 1");
  if (K_list.empty()) throw ConfigError("K list is empty");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  if (!(prior.space() == model.space())) {
    throw ConfigError("prior blocks do not match the model's free parameter blocks");
  }
  if (true_theta.size() != d) {
    throw DimensionError("true parameter has " + std::to_string(true_theta.size()) + " entries, model has " +
                         std::to_string(d));
  }
  if (data) {
    if (n_replicates != 1) throw ConfigError("a fixed dataset allows exactly one replicate");
    if (data->length() != T) throw ConfigError("T differs from the length of the supplied data");
    model.check_series(*data);
  } else {
    if (T < 1) throw ConfigError("T must be at least 1");
    if (true_theta.hasNaN()) throw ConfigError("simulation needs a fully specified true parameter");
    if (model.needs_covariates() && covariates == CovariateGenerator::None) {
      throw ConfigError(model.name() + " needs a covariate generator");
    }
    if (!model.needs_covariates() && covariates != CovariateGenerator::None) {
      throw ConfigError(model.name() + " takes no covariates");
    }
  }
  for (Index K : K_list) make_partition(T, K);
  if (init == InitStrategy::Explicit && init_value.size() != d) {
    throw DimensionError("init has " + std::to_string(init_value.size()) + " entries, model has " +
                         std::to_string(d));
  }
  if (init == InitStrategy::Truth && true_theta.hasNaN()) {
    throw ConfigError("init from the truth needs a known true parameter");
  }
  sampler.validate(d);
}

std::uint64_t replicate_data_seed(const ExperimentSpec& spec, Index r) {
  return derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(r));
}

std::uint64_t replicate_sampler_seed(const ExperimentSpec& spec, Index r) {
  return derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(r) + 1);
}

std::optional<MatrixXd> generate_covariates(CovariateGenerator g, Index T, Index dim, std::uint64_t seed) {
  if (g == CovariateGenerator::None) return std::nullopt;
  Rng rng(seed);
  MatrixXd z(T, dim);
  for (Index t = 0; t < T; ++t) {
    const double drift =
        g == CovariateGenerator::NonstationaryDrift ? 2.0 * static_cast<double>(t + 1) / static_cast<double>(T) - 1.0 : 0.0;
    for (Index j = 0; j < dim; ++j) z(t, j) = drift + rng.normal();
  }
  return z;
}

TimeSeries replicate_series(const ExperimentSpec& spec, Index r) {
  if (spec.data) return *spec.data;
  const std::uint64_t seed = replicate_data_seed(spec, r);
  const auto cov = generate_covariates(spec.covariates, spec.T, spec.model.cov_dim(), derive_seed(seed, 1));
  return simulate(spec.model, spec.true_theta, spec.T, cov, seed);
}

double sample_variance(const VectorXd& x) {
  if (x.size() < 2) return 0.0;
  return (x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1);
}

MomentAlignment moment_alignment(const VectorXd& dcbats_draws, const VectorXd& full_draws) {
  if (dcbats_draws.size() == 0 || full_draws.size() == 0) throw EmptyInputError("moment_alignment of empty draws");
  const double full_var = sample_variance(full_draws);
  if (!(full_var > 0.0)) throw ZeroVarianceError("full-posterior draws have zero variance");
  return {std::abs(dcbats_draws.mean() - full_draws.mean()), sample_variance(dcbats_draws) / full_var};
}

std::vector<const ParameterRecord*> ComparisonReport::cell(Index replicate, Index K) const {
  std::vector<const ParameterRecord*> out;
  for (const auto& r : records) {
    if (r.replicate == replicate && r.K == K) out.push_back(&r);
  }
  return out;
}

namespace {

struct ReplicateState {
  Index replicate = 0;
  std::optional<TimeSeries> series;
  std::string error;
  DrawSet full;
  std::vector<std::vector<DrawSet>> subsequences;  // per K
  std::vector<MarginalCombination> combinations;   // per K
  std::vector<ParameterRecord> records;
};

struct ChainTask {
  std::size_t state = 0;
  std::size_t k_index = 0;
  Index K = 0;  // 0 = full posterior
  Index k = 0;
  std::string error;
  double seconds = 0.0;
};

SamplerConfig replicate_sampler(const ExperimentSpec& spec, Index r) {
  SamplerConfig cfg = spec.sampler;
  cfg.seed = replicate_sampler_seed(spec, r);
  const ParameterSpace space = sampling_space(spec.prior);
  switch (spec.init) {
    case InitStrategy::PriorMean: cfg.init.reset(); break;
    case InitStrategy::Truth: cfg.init = to_unconstrained(space, spec.true_theta); break;
    case InitStrategy::Explicit: cfg.init = to_unconstrained(space, spec.init_value); break;
  }
  return cfg;
}

std::optional<bool> covers(const Interval& iv, double truth) {
  if (std::isnan(truth)) return std::nullopt;
  return iv.contains(truth);
}

void compare(const ExperimentSpec& spec, const std::vector<std::string>& names, ReplicateState& st) {
  const Index d = static_cast<Index>(names.size());
  std::vector<VectorXd> full_sorted;
  for (Index j = 0; j < d; ++j) full_sorted.push_back(sorted(st.full.draws.col(j)));
  for (std::size_t ki = 0; ki < spec.K_list.size(); ++ki) {
    st.combinations.push_back(combine_marginals(st.subsequences[ki], spec.level));
    const MarginalCombination& comb = st.combinations.back();
    for (Index j = 0; j < d; ++j) {
      const VectorXd& bary = comb.barycenters[static_cast<std::size_t>(j)].pseudo_draws;
      const VectorXd& full = full_sorted[static_cast<std::size_t>(j)];
      ParameterRecord rec;
      rec.replicate = st.replicate;
      rec.K = spec.K_list[ki];
      rec.param = names[static_cast<std::size_t>(j)];
      rec.truth = spec.true_theta[j];
      rec.dcbats_interval = comb.intervals[static_cast<std::size_t>(j)];
      rec.full_interval = credible_interval(full, spec.level);
      rec.dcbats_mean = bary.mean();
      rec.full_mean = full.mean();
      rec.dcbats_var = sample_variance(bary);
      rec.full_var = sample_variance(full);
      rec.w2 = w2_distance_1d(bary, full, SizePolicy::QuantileGrid);
      rec.alignment = moment_alignment(bary, full);
      rec.dcbats_covered = covers(rec.dcbats_interval, rec.truth);
      rec.full_covered = covers(rec.full_interval, rec.truth);
      st.records.push_back(std::move(rec));
    }
  }
}

void summarize_coverage(const ExperimentSpec& spec, ComparisonReport& report) {
  const ParameterSpace& space = spec.model.space();
  const Index d = space.dim();
  for (Index K : spec.K_list) {
    for (Index j = 0; j < d; ++j) {
      CoverageSummary dc{K, report.names[static_cast<std::size_t>(j)], "dcbats", 0, 0};
      CoverageSummary fu{K, report.names[static_cast<std::size_t>(j)], "full", 0, 0};
      for (const auto& r : report.records) {
        if (r.K != K || r.param != dc.param || !r.dcbats_covered) continue;
        ++dc.counted;
        ++fu.counted;
        dc.covered += *r.dcbats_covered ? 1 : 0;
        fu.covered += *r.full_covered ? 1 : 0;
      }
      report.coverage.push_back(dc);
      report.coverage.push_back(fu);
    }
  }
  // Per-replicate coverage across the components of each block.
  std::size_t i = 0;
  while (i < report.records.size()) {
    const Index rep = report.records[i].replicate;
    const Index K = report.records[i].K;
    for (const auto& block : space.blocks()) {
      BlockCoverage dc{rep, K, block.name, "dcbats", 0, 0};
      BlockCoverage fu{rep, K, block.name, "full", 0, 0};
      const Index off = space.offset(block.name);
      for (Index c = 0; c < block.dim; ++c) {
        const ParameterRecord& r = report.records[i + static_cast<std::size_t>(off + c)];
        if (!r.dcbats_covered) continue;
        ++dc.counted;
        ++fu.counted;
        dc.covered += *r.dcbats_covered ? 1 : 0;
        fu.covered += *r.full_covered ? 1 : 0;
      }
      report.block_coverage.push_back(dc);
      report.block_coverage.push_back(fu);
    }
    i += static_cast<std::size_t>(d);
  }
}

}  // namespace

ComparisonReport run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  ComparisonReport report;
  report.experiment = spec.name;
  report.names = spec.model.space().coordinate_names();
  const Index batch = std::max<Index>(1, options.replicate_batch);

  for (Index first = 1; first <= spec.n_replicates; first += batch) {
    const Index last = std::min(spec.n_replicates, first + batch - 1);
    std::vector<ReplicateState> states(static_cast<std::size_t>(last - first + 1));

    auto t0 = Clock::now();
    parallel_for(states.size(), options.threads, [&](std::size_t i) {
      ReplicateState& st = states[i];
      st.replicate = first + static_cast<Index>(i);
      try {
        st.series = replicate_series(spec, st.replicate);
      } catch (const std::exception& e) {
        st.error = std::string("simulation: ") + e.what();
      }
    });
    report.simulate_seconds += seconds_since(t0);

    // Full chains first: they are the longest, so they should start earliest.
    std::vector<ChainTask> tasks;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i].error.empty()) tasks.push_back({i, 0, 0, 0, {}, 0.0});
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!states[i].error.empty()) continue;
      states[i].subsequences.resize(spec.K_list.size());
      for (std::size_t ki = 0; ki < spec.K_list.size(); ++ki) {
        const Index K = spec.K_list[ki];
        states[i].subsequences[ki].resize(static_cast<std::size_t>(K));
        for (Index k = 1; k <= K; ++k) tasks.push_back({i, ki, K, k, {}, 0.0});
      }
    }
    t0 = Clock::now();
    parallel_for(tasks.size(), options.threads, [&](std::size_t n) {
      ChainTask& task = tasks[n];
      ReplicateState& st = states[task.state];
      const auto start = Clock::now();
      try {
        const SamplerConfig cfg = replicate_sampler(spec, st.replicate);
        if (task.K == 0) {
          st.full = run_full_posterior(spec.model, spec.prior, *st.series, cfg);
        } else {
          st.subsequences[task.k_index][static_cast<std::size_t>(task.k - 1)] =
              run_subsequence(spec.model, spec.prior, *st.series, task.K, task.k, cfg);
        }
      } catch (const std::exception& e) {
        task.error = task.K == 0 ? std::string("full posterior: ") + e.what()
                                 : "K=" + std::to_string(task.K) + ": " + e.what();
      }
      task.seconds = seconds_since(start);
    });
    report.sampling_seconds += seconds_since(t0);
    for (const auto& task : tasks) {
      ReplicateState& st = states[task.state];
      if (!task.error.empty() && st.error.empty()) st.error = task.error;
      report.chain_timings.push_back({st.replicate, task.K, task.k, task.seconds});
    }

    t0 = Clock::now();
    for (auto& st : states) {
      if (st.error.empty()) {
        try {
          compare(spec, report.names, st);
        } catch (const std::exception& e) {
          st.error = std::string("combination: ") + e.what();
          st.records.clear();
        }
      }
      if (!st.error.empty()) {
        report.failures.push_back({st.replicate, st.error});
        continue;
      }
      report.records.insert(report.records.end(), st.records.begin(), st.records.end());
      if (options.sink) {
        ReplicateArtifacts art;
        art.replicate = st.replicate;
        art.series = &*st.series;
        art.full = &st.full;
        art.K_list = spec.K_list;
        for (std::size_t ki = 0; ki < spec.K_list.size(); ++ki) {
          art.subsequences.push_back(&st.subsequences[ki]);
          art.combinations.push_back(&st.combinations[ki]);
        }
        options.sink(art);
      }
    }
    report.combine_seconds += seconds_since(t0);
  }
  summarize_coverage(spec, report);
  return report;
}

namespace {

using Json = nlohmann::ordered_json;

Json optional_bool(const std::optional<bool>& b) { return b ? Json(*b) : Json(nullptr); }

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

std::string report_json(const ComparisonReport& report) {
  Json root;
  root["experiment"] = report.experiment;
  root["parameters"] = report.names;
  Json records = Json::array();
  for (const auto& r : report.records) {
    records.push_back({{"replicate", r.replicate},
                       {"K", r.K},
                       {"param", r.param},
                       {"truth", number(r.truth)},
                       {"dcbats",
                        {{"lo", r.dcbats_interval.lo},
                         {"hi", r.dcbats_interval.hi},
                         {"mean", r.dcbats_mean},
                         {"var", r.dcbats_var},
                         {"covered", optional_bool(r.dcbats_covered)}}},
                       {"full",
                        {{"lo", r.full_interval.lo},
                         {"hi", r.full_interval.hi},
                         {"mean", r.full_mean},
                         {"var", r.full_var},
                         {"covered", optional_bool(r.full_covered)}}},
                       {"w2", r.w2},
                       {"mean_gap", r.alignment.mean_gap},
                       {"var_ratio", r.alignment.var_ratio}});
  }
  root["records"] = std::move(records);
  Json coverage = Json::array();
  for (const auto& c : report.coverage) {
    coverage.push_back({{"K", c.K},
                        {"param", c.param},
                        {"method", c.method},
                        {"covered", c.covered},
                        {"counted", c.counted},
                        {"rate", number(c.rate())}});
  }
  root["coverage"] = std::move(coverage);
  Json blocks = Json::array();
  for (const auto& b : report.block_coverage) {
    blocks.push_back({{"replicate", b.replicate},
                      {"K", b.K},
                      {"block", b.block},
                      {"method", b.method},
                      {"covered", b.covered},
                      {"counted", b.counted}});
  }
  root["block_coverage"] = std::move(blocks);
  Json failures = Json::array();
  for (const auto& f : report.failures) failures.push_back({{"replicate", f.replicate}, {"message", f.message}});
  root["failures"] = std::move(failures);
  return root.dump(2) + "\n";
}

std::string report_csv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "replicate,K,param,method,lo,hi,mean,var,w2,covered\n";
  auto row = [&](const ParameterRecord& r, const char* method, const Interval& iv, double mean, double var,
                 const std::optional<bool>& covered) {
    out << r.replicate << ',' << r.K << ',' << r.param << ',' << method << ',' << format_double(iv.lo) << ','
        << format_double(iv.hi) << ',' << format_double(mean) << ',' << format_double(var) << ','
        << format_double(r.w2) << ',' << (covered ? (*covered ? "1" : "0") : "") << '\n';
  };
  for (const auto& r : report.records) {
    row(r, "dcbats", r.dcbats_interval, r.dcbats_mean, r.dcbats_var, r.dcbats_covered);
    row(r, "full", r.full_interval, r.full_mean, r.full_var, r.full_covered);
  }
  return out.str();
}

std::string timings_json(const ComparisonReport& report) {
  Json root;
  root["simulate_seconds"] = report.simulate_seconds;
  root["sampling_seconds"] = report.sampling_seconds;
  root["combine_seconds"] = report.combine_seconds;
  Json chains = Json::array();
  for (const auto& c : report.chain_timings) {
    chains.push_back({{"replicate", c.replicate}, {"K", c.K}, {"k", c.k}, {"seconds", c.seconds}});
  }
  root["chains"] = std::move(chains);
  return root.dump(2) + "\n";
}

}  // namespace dcbats
