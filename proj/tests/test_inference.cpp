#include "doctest.h"

#include <cmath>
#include <limits>
#include <string>

#include "dcbats/inference.hpp"
#include "dcbats/parallel.hpp"

using namespace dcbats;

namespace {

ParameterSpace real_space(Index d) { return ParameterSpace({{"x", d, Support::real()}}); }

// AR-error model reduced to x_t = alpha + N(0, 1): phi = 0, sigma2 = 1 fixed.
Model location_model() {
  return Model(models::ArErrorRegression{0}, {{"phi", VectorXd::Zero(2)}, {"sigma2", VectorXd::Ones(1)}});
}

PriorSpec location_prior(const Model& m, double prior_var) {
  return PriorSpec(m.space(), {{"alpha", prior::Normal{0.0, prior_var}}});
}

// Posterior N(gamma sum x / (gamma T + 1/v0), 1 / (gamma T + 1/v0)).
void check_conjugate(double power, std::uint64_t seed) {
  const Model m = location_model();
  const PriorSpec prior = location_prior(m, 100.0);
  VectorXd truth(1);
  truth << 1.5;
  const TimeSeries s = simulate(m, truth, 50, std::nullopt, seed);
  const double sum = s.obs().sum();
  const double precision = power * 50.0 + 0.01;
  const double mean = power * sum / precision;
  const double var = 1.0 / precision;

  SamplerConfig cfg;
  cfg.n_iterations = 40000;
  cfg.seed = seed;
  const DrawSet d = adaptive_rwm_sample(PosteriorTarget(m, prior, s, power), cfg);
  const VectorXd x = d.draws.col(0);
  const double ess = effective_sample_size(x);
  const double se = std::sqrt(var / ess);
  INFO("power ", power, " mean ", x.mean(), " expected ", mean, " ess ", ess);
  CHECK(std::abs(x.mean() - mean) < 4.0 * se);
  const double sample_var = (x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1);
  CHECK(sample_var / var == doctest::Approx(1.0).epsilon(0.15));
}

}  // namespace

TEST_CASE("sampler recovers a standard normal") {
  SamplerConfig cfg;
  cfg.n_iterations = 50000;
  cfg.seed = 11;
  const DrawSet d = adaptive_rwm_sample([](const VectorXd& x) { return -0.5 * x.squaredNorm(); },
                                        real_space(1), VectorXd::Zero(1), cfg, "normal");
  REQUIRE(d.size() == 25000);
  CHECK(d.burn_in == 25000);
  CHECK(d.target_label == "normal");
  const VectorXd x = d.draws.col(0);
  const double ess = effective_sample_size(x);
  CHECK(std::abs(x.mean()) < 3.0 / std::sqrt(ess));
  const double var = (x.array() - x.mean()).square().mean();
  CHECK(var >= 0.9);
  CHECK(var <= 1.1);
  CHECK(d.acceptance_rate > 0.2);
  CHECK(d.acceptance_rate < 0.7);
}

TEST_CASE("adaptation learns a strongly correlated covariance") {
  MatrixXd cov(2, 2);
  cov << 4.0, 1.9 * 0.99, 1.9 * 0.99, 0.9025;
  const Eigen::LLT<MatrixXd> llt(cov);
  auto logp = [&](const VectorXd& x) { return -0.5 * x.dot(llt.solve(x)); };
  SamplerConfig cfg;
  cfg.n_iterations = 60000;
  cfg.seed = 4;
  const DrawSet d = adaptive_rwm_sample(logp, real_space(2), VectorXd::Constant(2, 3.0), cfg, "corr");
  const MatrixXd centered = d.draws.rowwise() - d.draws.colwise().mean();
  const MatrixXd emp = centered.transpose() * centered / static_cast<double>(d.size() - 1);
  CHECK(emp(0, 0) == doctest::Approx(4.0).epsilon(0.15));
  CHECK(emp(1, 1) == doctest::Approx(0.9025).epsilon(0.15));
  CHECK(emp(0, 1) / std::sqrt(emp(0, 0) * emp(1, 1)) == doctest::Approx(0.99).epsilon(0.01));
  CHECK(d.acceptance_rate > 0.1);
  CHECK(d.acceptance_rate < 0.5);
}

TEST_CASE("conjugate normal location posterior, ordinary and powered") {
  check_conjugate(1.0, 21);
  check_conjugate(2.0, 22);
  check_conjugate(10.0, 23);
}

TEST_CASE("powered target scales the log likelihood only") {
  const Model m = location_model();
  const PriorSpec prior = location_prior(m, 4.0);
  VectorXd truth(1);
  truth << 0.3;
  const TimeSeries s = simulate(m, truth, 20, std::nullopt, 1);
  const PosteriorTarget t1(m, prior, s, 1.0);
  const PosteriorTarget t3(m, prior, s, 3.0);
  for (double a : {-1.0, 0.0, 0.7, 2.0}) {
    const VectorXd eta = VectorXd::Constant(1, a);
    const double ll = log_likelihood(m, eta, s);
    CHECK(t3.power() == 3.0);
    CHECK(target_log_density(t3, eta) - target_log_density(t1, eta) == doctest::Approx(2.0 * ll));
  }
  CHECK_THROWS_AS(PosteriorTarget(m, prior, s, 0.5), DomainError);
}

TEST_CASE("target density includes the log Jacobian of positive blocks") {
  const Model m(models::ArErrorRegression{0}, {{"phi", VectorXd::Zero(2)}, {"alpha", VectorXd::Zero(1)}});
  const PriorSpec prior(m.space(), {{"sigma2", prior::InverseGamma{3.0, 2.0}}});
  const TimeSeries s(MatrixXd::Constant(4, 1, 0.5));
  const PosteriorTarget t(m, prior, s);
  const double eta = 0.4;
  const double sigma2 = std::exp(eta);
  const double expected = log_likelihood(m, VectorXd::Constant(1, sigma2), s) +
                          prior_log_density(prior, VectorXd::Constant(1, sigma2)) + eta;
  CHECK(target_log_density(t, VectorXd::Constant(1, eta)) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("metropolis_accept matches min(1, exp(delta)) and draws one uniform") {
  Rng rng(8);
  const int trials = 100000;
  for (double delta : {-2.0, -0.5, 0.0, 0.3}) {
    int hits = 0;
    for (int i = 0; i < trials; ++i) hits += metropolis_accept(1.0, 1.0 + delta, rng) ? 1 : 0;
    const double p = std::min(1.0, std::exp(delta));
    const double sd = std::sqrt(std::max(p * (1 - p), 1e-12) / trials);
    INFO("delta ", delta);
    CHECK(std::abs(hits / static_cast<double>(trials) - p) <= 3.0 * sd + 1e-12);
  }
  Rng a(3), b(3);
  metropolis_accept(0.0, -std::numeric_limits<double>::infinity(), a);
  b.uniform();
  CHECK(a.uniform() == b.uniform());
  CHECK_FALSE(metropolis_accept(0.0, -std::numeric_limits<double>::infinity(), a));
}

TEST_CASE("sampler failures") {
  SamplerConfig cfg;
  cfg.n_iterations = 200;
  const ParameterSpace sp = real_space(1);
  CHECK_THROWS_AS(adaptive_rwm_sample([](const VectorXd&) { return std::nan(""); }, sp,
                                      VectorXd::Zero(1), cfg, "nan"),
                  NonFiniteError);
  CHECK_THROWS_AS(adaptive_rwm_sample([](const VectorXd&) { return -std::numeric_limits<double>::infinity(); },
                                      sp, VectorXd::Zero(1), cfg, "dead"),
                  InitializationError);
  // -inf at the start but finite nearby: jittered restarts recover.
  const DrawSet d = adaptive_rwm_sample(
      [](const VectorXd& x) { return x[0] == 0.0 ? -std::numeric_limits<double>::infinity() : -0.5 * x[0] * x[0]; },
      sp, VectorXd::Zero(1), cfg, "jitter");
  CHECK(d.size() == 100);

  SamplerConfig bad = cfg;
  bad.burn_in = 200;
  CHECK_THROWS_AS(bad.validate(1), DomainError);
  bad = cfg;
  bad.init = VectorXd::Zero(2);
  CHECK_THROWS_AS(bad.validate(1), DimensionError);
  bad = cfg;
  bad.initial_step_scale = 0.0;
  CHECK_THROWS_AS(bad.validate(1), DomainError);
}

TEST_CASE("fixed proposal when adaptation is off") {
  SamplerConfig cfg;
  cfg.n_iterations = 4000;
  cfg.adapt = false;
  cfg.initial_step_scale = 2.4;
  cfg.seed = 1;
  const DrawSet d = adaptive_rwm_sample([](const VectorXd& x) { return -0.5 * x.squaredNorm(); },
                                        real_space(1), VectorXd::Zero(1), cfg, "fixed");
  CHECK(d.size() == 2000);
  CHECK(d.acceptance_rate == 0.0);  // counted from adapt_start, which is never reached
}

TEST_CASE("same seed gives identical draws") {
  const Model m(models::GarchX{1, 1, 1});
  const PriorSpec prior(m.space(), {{"b", prior::Normal{0.0, 10.0}},
                                    {"omega", prior::HalfNormal{1.0}},
                                    {"alpha", prior::Uniform{0.0, 1.0}},
                                    {"beta", prior::Uniform{0.0, 1.0}}});
  const VectorXd truth = default_true_parameters(m);
  Rng rng(1);
  MatrixXd z(120, 1);
  for (Index t = 0; t < 120; ++t) z(t, 0) = rng.normal();
  const TimeSeries s = simulate(m, truth, 120, z, 2);
  SamplerConfig cfg;
  cfg.n_iterations = 2000;
  cfg.seed = 99;
  cfg.init = to_unconstrained(sampling_space(prior), truth);
  const DrawSet a = run_full_posterior(m, prior, s, cfg);
  const DrawSet b = run_full_posterior(m, prior, s, cfg);
  CHECK(a == b);
  CHECK(a.names == std::vector<std::string>{"b", "omega", "alpha", "beta"});
  cfg.seed = 100;
  CHECK_FALSE(run_full_posterior(m, prior, s, cfg) == a);
}

TEST_CASE("divide-and-conquer structure, labels and seeds") {
  const Model m = location_model();
  const PriorSpec prior = location_prior(m, 100.0);
  const TimeSeries s = simulate(m, VectorXd::Constant(1, 1.0), 100, std::nullopt, 3);
  SamplerConfig cfg;
  cfg.n_iterations = 1000;
  cfg.seed = 5;

  SUBCASE("K = 1 is the full posterior") {
    const auto sets = run_dcbats(m, prior, s, 1, cfg, 1);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0] == run_full_posterior(m, prior, s, cfg));
    CHECK(sets[0].target_label == "full");
  }
  SUBCASE("K = 2") {
    const auto sets = run_dcbats(m, prior, s, 2, cfg, 1);
    REQUIRE(sets.size() == 2);
    for (Index k = 1; k <= 2; ++k) {
      const DrawSet& d = sets[static_cast<std::size_t>(k - 1)];
      CHECK(d.target_label == "subseq " + std::to_string(k) + "/2");
      CHECK(d.seed == chain_seed(5, k));
      CHECK(d.size() == 500);
      CHECK(d.names == std::vector<std::string>{"alpha"});
    }
    CHECK(sets[0].seed != sets[1].seed);
    // Each chain samples its own segment at power 2.
    SamplerConfig c2 = cfg;
    c2.seed = chain_seed(5, 2);
    const TimeSeries seg = extract_segment(s, make_partition(100, 2), 2);
    CHECK(sets[1] == adaptive_rwm_sample(PosteriorTarget(m, prior, seg, 2.0), c2, "subseq 2/2"));
  }
  SUBCASE("thread count does not change results") {
    const auto one = run_dcbats(m, prior, s, 4, cfg, 1);
    const auto many = run_dcbats(m, prior, s, 4, cfg, 8);
    CHECK(one == many);
  }
  SUBCASE("errors name the subsequence") {
    SamplerConfig bad = cfg;
    bad.init = VectorXd::Zero(3);
    try {
      run_dcbats(m, prior, s, 2, bad, 1);
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      CHECK(std::string(e.what()).rfind("subsequence 1/2: ", 0) == 0);
    }
    CHECK_THROWS_AS(run_dcbats(m, prior, s, 3, cfg, 1), DivisibilityError);
  }
}

TEST_CASE("chain labels and seeds") {
  CHECK(chain_label(1, 1) == "full");
  CHECK(chain_label(3, 10) == "subseq 3/10");
  CHECK(chain_seed(7, 1) != chain_seed(7, 2));
  CHECK(chain_seed(7, 1) == chain_seed(7, 1));
}

TEST_CASE("effective sample size") {
  Rng rng(2);
  const Index n = 20000;
  VectorXd iid(n), ar(n);
  double state = 0.0;
  for (Index i = 0; i < n; ++i) {
    iid[i] = rng.normal();
    state = 0.9 * state + rng.normal();
    ar[i] = state;
  }
  CHECK(effective_sample_size(iid) == doctest::Approx(static_cast<double>(n)).epsilon(0.15));
  CHECK(effective_sample_size(ar) == doctest::Approx(n * 0.1 / 1.9).epsilon(0.25));
}

TEST_CASE("parallel_for runs every index and reports the first failure") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  try {
    parallel_for(10, 3, [](std::size_t i) {
      if (i == 4 || i == 7) throw DomainError("fail " + std::to_string(i));
    });
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()) == "fail 4");
  }
  CHECK(resolve_threads(0) >= 1);
  CHECK(resolve_threads(3) == 3);
}
