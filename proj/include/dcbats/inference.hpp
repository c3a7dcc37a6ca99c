#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcbats/core.hpp"
#include "dcbats/models.hpp"
#include "dcbats/priors.hpp"
#include "dcbats/rng.hpp"

namespace dcbats {

/// Likelihood raised to `power` times the prior, on a full series or a segment.
///
/// power = 1 on the whole series is the ordinary posterior; power = K on
/// segment k is the k-th subsequence posterior.
class PosteriorTarget {
 public:
  PosteriorTarget(Model model, PriorSpec prior, TimeSeries series, double power = 1.0);

  const Model& model() const { return model_; }
  const PriorSpec& prior() const { return prior_; }
  const TimeSeries& series() const { return series_; }
  double power() const { return power_; }
  /// Space the sampler transforms against (model space with Uniform priors narrowing supports).
  const ParameterSpace& space() const { return space_; }

 private:
  Model model_;
  PriorSpec prior_;
  TimeSeries series_;
  double power_;
  ParameterSpace space_;
};

/// power * loglik(theta(eta)) + log prior(theta(eta)) + log |d theta / d eta|.
///
/// Invalid variances inside the likelihood give -inf so the sampler rejects.
/// Throws DimensionError when eta has the wrong length.
double target_log_density(const PosteriorTarget& target, const VectorXd& eta);

struct SamplerConfig {
  Index n_iterations = 10000;
  /// Defaults to n_iterations / 2.
  std::optional<Index> burn_in;
  /// Proposal standard deviation before covariance adaptation starts.
  double initial_step_scale = 0.1;
  /// Iteration at which the empirical-covariance proposal takes over.
  /// Defaults to max(2d, min(500, burn_in / 4)).
  std::optional<Index> adapt_start;
  double adapt_regularizer = 1e-6;
  /// false keeps the proposal fixed at initial_step_scale^2 I for the whole run.
  bool adapt = true;
  /// Keep every thin-th post-burn-in state.
  Index thin = 1;
  std::uint64_t seed = 0;
  /// Starting point in unconstrained space; defaults to the transformed prior mean.
  std::optional<VectorXd> init;

  Index resolved_burn_in() const { return burn_in.value_or(n_iterations / 2); }
  /// Number of draws returned: ceil((n_iterations - burn_in) / thin).
  Index n_draws() const { return (n_iterations - resolved_burn_in() + thin - 1) / thin; }
  Index resolved_adapt_start(Index d) const;
  /// Throws DomainError on inconsistent settings for a d-dimensional target.
  void validate(Index d) const;
};

/// One Metropolis-Hastings decision. Always consumes exactly one uniform draw.
bool metropolis_accept(double log_current, double log_proposed, Rng& rng);

/// Log density over unconstrained space; may return -inf, never NaN.
using LogDensityFn = std::function<double(const VectorXd&)>;

/// Adaptive random-walk Metropolis in unconstrained space.
///
/// Before adapt_start the proposal is isotropic and its scale follows a
/// Robbins-Monro recursion toward 23.4% acceptance. From adapt_start on the
/// proposal covariance is (2.38^2 / d) (C + eps I), where C is the running
/// covariance of past unconstrained states. During burn-in C is re-estimated
/// over doubling windows so the initial transient is forgotten; after burn-in
/// it accumulates for the rest of the run.
///
/// Returned draws are post-burn-in, thinned, and mapped back to constrained space.
/// Throws InitializationError when no finite starting density is found and
/// NonFiniteError when the target evaluates to NaN.
DrawSet adaptive_rwm_sample(const PosteriorTarget& target, const SamplerConfig& config,
                            std::string target_label = "full");

/// Same sampler on an arbitrary density. `space` maps states back to constrained
/// values; `start` is used when config.init is unset.
DrawSet adaptive_rwm_sample(const LogDensityFn& log_density, const ParameterSpace& space,
                            const VectorXd& start, const SamplerConfig& config,
                            std::string target_label);

/// Per-chain seed for subsequence k (1-based). The full posterior uses k = 1.
std::uint64_t chain_seed(std::uint64_t master, Index k);

/// Label of chain k out of K: "full" when K = 1, otherwise "subseq k/K".
std::string chain_label(Index k, Index K);

/// Chain k (1-based) of run_dcbats on its own: segment k at power K, seeded
/// with chain_seed(config.seed, k).
DrawSet run_subsequence(const Model& model, const PriorSpec& prior, const TimeSeries& series,
                        Index K, Index k, const SamplerConfig& config);

/// Samples the K subsequence posteriors (power K) independently, ordered by k.
/// `threads` bounds the worker pool (0 = hardware concurrency).
std::vector<DrawSet> run_dcbats(const Model& model, const PriorSpec& prior,
                                const TimeSeries& series, Index K, const SamplerConfig& config,
                                unsigned threads = 0);

/// Ordinary posterior on the whole series; identical to run_dcbats with K = 1.
DrawSet run_full_posterior(const Model& model, const PriorSpec& prior, const TimeSeries& series,
                           const SamplerConfig& config);

/// Geyer initial-monotone-sequence effective sample size of one chain.
double effective_sample_size(const VectorXd& chain);

}  // namespace dcbats
