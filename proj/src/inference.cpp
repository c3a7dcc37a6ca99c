#include "dcbats/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dcbats/parallel.hpp"

namespace dcbats {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTargetAcceptance = 0.234;
constexpr int kMaxInitAttempts = 100;

}  // namespace

PosteriorTarget::PosteriorTarget(Model model, PriorSpec prior, TimeSeries series, double power)
    : model_(std::move(model)),
      prior_(std::move(prior)),
      series_(std::move(series)),
      power_(power),
      space_(sampling_space(prior_)) {
  if (!(power_ >= 1.0) || !std::isfinite(power_)) {
    throw DomainError("posterior power must be finite and >= 1");
  }
  if (!(prior_.space() == model_.space())) {
    throw SpaceMismatchError("prior blocks do not match the model's free parameter blocks");
  }
  model_.check_series(series_);
}

double target_log_density(const PosteriorTarget& target, const VectorXd& eta) {
  const ConstrainedPoint point = from_unconstrained(target.space(), eta);
  const double log_prior = prior_log_density(target.prior(), point.theta);
  if (log_prior == kNegInf) return kNegInf;
  double ll = 0.0;
  try {
    ll = log_likelihood(target.model(), point.theta, target.series());
  } catch (const NonPositiveVarianceError&) {
    return kNegInf;
  }
  return target.power() * ll + log_prior + point.log_jacobian;
}

Index SamplerConfig::resolved_adapt_start(Index d) const {
  if (adapt_start) return *adapt_start;
  return std::max<Index>(2 * d, std::min<Index>(500, resolved_burn_in() / 4));
}

void SamplerConfig::validate(Index d) const {
  auto fail = [](const std::string& what) { throw DomainError("sampler config: " + what); };
  if (n_iterations < 2) fail("n_iterations must be at least 2");
  const Index burn = resolved_burn_in();
  if (burn < 1 || burn >= n_iterations) fail("burn_in must satisfy 0 < burn_in < n_iterations");
  if (!(initial_step_scale > 0.0) || !std::isfinite(initial_step_scale)) {
    fail("initial_step_scale must be positive");
  }
  if (!(adapt_regularizer > 0.0) || !std::isfinite(adapt_regularizer)) {
    fail("adapt_regularizer must be positive");
  }
  if (thin < 1) fail("thin must be at least 1");
  if (adapt && resolved_adapt_start(d) < 2 * d) fail("adapt_start must be at least 2 d");
  if (init && init->size() != d) throw DimensionError("sampler config: init has wrong dimension");
}

bool metropolis_accept(double log_current, double log_proposed, Rng& rng) {
  const double u = rng.uniform();
  if (log_proposed == kNegInf) return false;
  return std::log(u) < log_proposed - log_current;
}

namespace {

// Running mean and scatter of the states seen in the current adaptation window.
class Moments {
 public:
  explicit Moments(Index d) : mean_(VectorXd::Zero(d)), scatter_(MatrixXd::Zero(d, d)) {}

  void reset() {
    count_ = 0;
    mean_.setZero();
    scatter_.setZero();
  }

  void add(const VectorXd& x) {
    ++count_;
    const VectorXd delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    scatter_.noalias() += delta * (x - mean_).transpose();
  }

  Index count() const { return count_; }
  MatrixXd covariance() const { return scatter_ / static_cast<double>(count_ - 1); }

 private:
  Index count_ = 0;
  VectorXd mean_;
  MatrixXd scatter_;
};

double checked_density(const LogDensityFn& log_density, const VectorXd& eta) {
  const double lp = log_density(eta);
  if (std::isnan(lp)) throw NonFiniteError("target log density is NaN");
  return lp;
}

VectorXd initial_point(const LogDensityFn& log_density, const VectorXd& start, Rng& rng,
                       double& lp) {
  lp = checked_density(log_density, start);
  if (lp != kNegInf) return start;
  for (int attempt = 1; attempt <= kMaxInitAttempts; ++attempt) {
    const double scale = 0.1 * (1.0 + attempt / 10.0);
    VectorXd candidate = start + scale * rng.normal_vector(start.size());
    lp = checked_density(log_density, candidate);
    if (lp != kNegInf) return candidate;
  }
  throw InitializationError("no finite target density found near the initial point after " +
                            std::to_string(kMaxInitAttempts) + " jittered attempts");
}

}  // namespace

DrawSet adaptive_rwm_sample(const PosteriorTarget& target, const SamplerConfig& config,
                            std::string target_label) {
  const ParameterSpace& space = target.space();
  config.validate(space.dim());
  const VectorXd start =
      config.init ? *config.init : to_unconstrained(space, prior_mean(target.prior()));
  DrawSet out = adaptive_rwm_sample(
      [&target](const VectorXd& eta) { return target_log_density(target, eta); }, space, start,
      config, std::move(target_label));
  out.names = target.model().space().coordinate_names();
  return out;
}

DrawSet adaptive_rwm_sample(const LogDensityFn& log_density, const ParameterSpace& space,
                            const VectorXd& start_point, const SamplerConfig& config,
                            std::string target_label) {
  const Index d = space.dim();
  config.validate(d);
  space.require_dim(start_point, "sampler start");
  const Index n = config.n_iterations;
  const Index burn = config.resolved_burn_in();
  const Index adapt_start = config.adapt ? config.resolved_adapt_start(d) : n;
  const double am_scale = 2.38 * 2.38 / static_cast<double>(d);
  const MatrixXd eps_identity = config.adapt_regularizer * MatrixXd::Identity(d, d);

  Rng rng(config.seed);
  double lp = 0.0;
  VectorXd eta = initial_point(log_density, config.init ? *config.init : start_point, rng, lp);

  double log_step = std::log(config.initial_step_scale);
  MatrixXd chol = config.initial_step_scale * MatrixXd::Identity(d, d);
  Moments window(d);
  MatrixXd frozen_cov;  // covariance of the last completed window
  double log_lambda = 0.0;  // global scale on top of 2.38^2 / d, tuned during burn-in
  Index next_checkpoint = adapt_start;
  const Index window_min = 4 * d;

  DrawSet out;
  out.draws.resize(config.n_draws(), d);
  out.names = space.coordinate_names();
  out.burn_in = burn;
  out.seed = config.seed;
  out.target_label = std::move(target_label);
  Index accepted = 0;
  Index counted = 0;

  for (Index i = 0; i < n; ++i) {
    const VectorXd proposal = eta + chol * rng.normal_vector(d);
    const double lp_prop = checked_density(log_density, proposal);
    const bool accept = metropolis_accept(lp, lp_prop, rng);
    const double accept_prob = lp_prop == kNegInf ? 0.0 : std::min(1.0, std::exp(lp_prop - lp));
    if (accept) {
      eta = proposal;
      lp = lp_prop;
    }
    if (i >= adapt_start) {
      ++counted;
      accepted += accept ? 1 : 0;
    }
    if (i >= burn && (i - burn) % config.thin == 0) {
      out.draws.row((i - burn) / config.thin) = from_unconstrained(space, eta).theta.transpose();
    }

    if (!config.adapt) continue;
    if (i < adapt_start) {
      log_step += (accept_prob - kTargetAcceptance) / std::pow(static_cast<double>(i + 1), 0.6);
      chol = std::exp(log_step) * MatrixXd::Identity(d, d);
      if (i >= adapt_start / 2) window.add(eta);
      continue;
    }
    if (i < burn) {
      log_lambda += (accept_prob - kTargetAcceptance) / std::pow(static_cast<double>(i - adapt_start + 1), 0.6);
    }
    if (i == next_checkpoint && i <= burn / 2) {
      if (window.count() > d) frozen_cov = window.covariance();
      window.reset();
      next_checkpoint *= 2;
    }
    window.add(eta);
    const MatrixXd* cov = nullptr;
    MatrixXd current;
    if (window.count() >= window_min) {
      current = window.covariance();
      cov = &current;
    } else if (frozen_cov.size() > 0) {
      cov = &frozen_cov;
    }
    if (cov == nullptr) continue;
    const Eigen::LLT<MatrixXd> llt(am_scale * (*cov + eps_identity));
    if (llt.info() == Eigen::Success) chol = std::exp(log_lambda) * MatrixXd(llt.matrixL());
  }
  out.acceptance_rate = counted > 0 ? static_cast<double>(accepted) / static_cast<double>(counted) : 0.0;
  return out;
}

std::uint64_t chain_seed(std::uint64_t master, Index k) {
  return derive_seed(master, static_cast<std::uint64_t>(k));
}

std::string chain_label(Index k, Index K) {
  if (K == 1) return "full";
  return "subseq " + std::to_string(k) + "/" + std::to_string(K);
}

namespace {

template <class E>
[[noreturn]] void relabel(const E& e, Index k, Index K) {
  std::ostringstream msg;
  msg << "subsequence " << k << "/" << K << ": " << e.what();
  throw E(msg.str());
}

DrawSet sample_chain(const Model& model, const PriorSpec& prior, const TimeSeries& series,
                     double power, const SamplerConfig& config, Index k, Index K) {
  try {
    SamplerConfig chain_config = config;
    chain_config.seed = chain_seed(config.seed, k);
    const PosteriorTarget target(model, prior, series, power);
    return adaptive_rwm_sample(target, chain_config, chain_label(k, K));
  } catch (const InitializationError& e) {
    relabel(e, k, K);
  } catch (const NonFiniteError& e) {
    relabel(e, k, K);
  } catch (const DomainError& e) {
    relabel(e, k, K);
  } catch (const DimensionError& e) {
    relabel(e, k, K);
  }
}

}  // namespace

DrawSet run_subsequence(const Model& model, const PriorSpec& prior, const TimeSeries& series,
                        Index K, Index k, const SamplerConfig& config) {
  const Partition partition = make_partition(series.length(), K);
  return sample_chain(model, prior, extract_segment(series, partition, k), static_cast<double>(K),
                      config, k, K);
}

std::vector<DrawSet> run_dcbats(const Model& model, const PriorSpec& prior,
                                const TimeSeries& series, Index K, const SamplerConfig& config,
                                unsigned threads) {
  make_partition(series.length(), K);
  std::vector<DrawSet> out(static_cast<std::size_t>(K));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    out[i] = run_subsequence(model, prior, series, K, static_cast<Index>(i) + 1, config);
  });
  return out;
}

DrawSet run_full_posterior(const Model& model, const PriorSpec& prior, const TimeSeries& series,
                           const SamplerConfig& config) {
  return sample_chain(model, prior, series, 1.0, config, 1, 1);
}

double effective_sample_size(const VectorXd& chain) {
  const Index n = chain.size();
  if (n < 4) return static_cast<double>(n);
  const VectorXd x = chain.array() - chain.mean();
  const double gamma0 = x.squaredNorm() / static_cast<double>(n);
  if (!(gamma0 > 0.0)) return static_cast<double>(n);
  auto rho = [&](Index lag) {
    return x.head(n - lag).dot(x.tail(n - lag)) / static_cast<double>(n) / gamma0;
  };
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Index m = 0; 2 * m + 1 < n; ++m) {
    double pair = rho(2 * m) + rho(2 * m + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  return static_cast<double>(n) / std::max(tau, 1.0 / static_cast<double>(n));
}

}  // namespace dcbats
