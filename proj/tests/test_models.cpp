#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dcbats/models.hpp"
#include "dcbats/priors.hpp"
#include "dcbats/rng.hpp"

using namespace dcbats;

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

MatrixXd normal_covariates(Index T, Index dim, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd z(T, dim);
  for (Index t = 0; t < T; ++t)
    for (Index j = 0; j < dim; ++j) z(t, j) = rng.normal();
  return z;
}

std::optional<MatrixXd> covariates_for(const Model& m, Index T, std::uint64_t seed) {
  if (!m.needs_covariates()) return std::nullopt;
  return normal_covariates(T, m.cov_dim(), seed);
}

std::vector<Model> all_models() {
  return {Model(models::ArErrorRegression{2}), Model(models::GarchX{2, 2, 1}),
          Model(models::LinearGaussianHmm::experiment()), Model(models::BinaryAr{2, 1}),
          Model(models::CccBivariateGarch{})};
}

}  // namespace

TEST_CASE("GARCH with zero ARCH and GARCH terms has unit variance") {
  const Model m(models::GarchX{0, 2, 3});
  VectorXd theta = VectorXd::Zero(m.space().dim());
  theta[0] = 1.0;  // omega
  const TimeSeries s(MatrixXd::Zero(12, 1));
  for (Index t = 1; t <= 12; ++t) {
    CHECK(conditional_log_density(m, theta, s, t) == doctest::Approx(-kHalfLog2Pi).epsilon(1e-15));
  }
}

TEST_CASE("AR-error regression with phi = 0 is an independent normal regression") {
  const Model m(models::ArErrorRegression{2});
  const Index T = 30;
  const MatrixXd z = normal_covariates(T, 2, 3);
  VectorXd theta(6);
  theta << 0.7, 1.5, -0.4, 0.0, 0.0, 2.3;
  const TimeSeries s = simulate(m, theta, T, z, 5);
  for (Index t = 1; t <= T; ++t) {
    const double mean = 0.7 + 1.5 * z(t - 1, 0) - 0.4 * z(t - 1, 1);
    const double r = s.obs()(t - 1, 0) - mean;
    const double expected = -kHalfLog2Pi - 0.5 * std::log(2.3) - 0.5 * r * r / 2.3;
    CHECK(conditional_log_density(m, theta, s, t) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("AR-error regression uses the AR mean only from t = 3") {
  const Model m(models::ArErrorRegression{0});
  VectorXd theta(4);
  theta << 1.0, 0.5, 0.2, 1.0;
  MatrixXd x(4, 1);
  x << 2.0, 3.0, 0.0, 1.0;
  const TimeSeries s(x);
  auto lp = [&](double mean, double obs) { return -kHalfLog2Pi - 0.5 * (obs - mean) * (obs - mean); };
  CHECK(conditional_log_density(m, theta, s, 1) == doctest::Approx(lp(1.0, 2.0)));
  CHECK(conditional_log_density(m, theta, s, 2) == doctest::Approx(lp(1.0, 3.0)));
  // eps_2 = 2, eps_1 = 1 -> mean 1 + 0.5*2 + 0.2*1
  CHECK(conditional_log_density(m, theta, s, 3) == doctest::Approx(lp(2.2, 0.0)));
  // eps_3 = -1, eps_2 = 2 -> mean 1 - 0.5 + 0.4
  CHECK(conditional_log_density(m, theta, s, 4) == doctest::Approx(lp(0.9, 1.0)));
}

TEST_CASE("fair binary AR gives log(1/2) everywhere") {
  const Model m(models::BinaryAr{3, 0});
  const VectorXd theta = VectorXd::Zero(4);
  MatrixXd x(6, 1);
  x << 1, 0, 0, 1, 1, 0;
  const TimeSeries s(x);
  for (Index t = 1; t <= 6; ++t) {
    CHECK(conditional_log_density(m, theta, s, t) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  }
}

TEST_CASE("log_likelihood is the time-ordered sum of conditional densities") {
  for (const Model& m : all_models()) {
    const Index T = 40;
    const VectorXd theta = default_true_parameters(m);
    const TimeSeries s = simulate(m, theta, T, covariates_for(m, T, 2), 9);
    double sum = 0.0;
    for (Index t = 1; t <= T; ++t) sum += conditional_log_density(m, theta, s, t);
    INFO(m.name());
    CHECK(sum == log_likelihood(m, theta, s));

    const Partition p = make_partition(T, 1);
    CHECK(log_likelihood(m, theta, extract_segment(s, p, 1)) == log_likelihood(m, theta, s));
  }
}

TEST_CASE("GARCH log likelihood matches a straight-line five-step evaluation") {
  // d_cov = 1, q = 2, p = 1 so r = 2: sigma_1^2 = sigma_2^2 = 1.
  const Model m(models::GarchX{1, 2, 1});
  VectorXd theta(5);
  theta << 0.8, 0.6, 0.3, 0.1, 0.4;  // b, omega, alpha1, alpha2, beta1
  MatrixXd z(5, 1);
  z << 1.0, -0.5, 2.0, 0.25, -1.0;
  MatrixXd x(5, 1);
  x << 1.3, -1.1, 0.7, 2.0, -0.4;
  const TimeSeries s(x, z);

  const double b = 0.8, w2 = 0.36, a1 = 0.3, a2 = 0.1, b1 = 0.4;
  const double e1 = 1.3 - b * 1.0, e2 = -1.1 - b * -0.5, e3 = 0.7 - b * 2.0, e4 = 2.0 - b * 0.25,
               e5 = -0.4 - b * -1.0;
  const double v1 = 1.0, v2 = 1.0;
  const double v3 = w2 + a1 * e2 * e2 + a2 * e1 * e1 + b1 * v2;
  const double v4 = w2 + a1 * e3 * e3 + a2 * e2 * e2 + b1 * v3;
  const double v5 = w2 + a1 * e4 * e4 + a2 * e3 * e3 + b1 * v4;
  auto term = [](double e, double v) { return -0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 * e * e / v; };
  const double expected = term(e1, v1) + term(e2, v2) + term(e3, v3) + term(e4, v4) + term(e5, v5);
  CHECK(log_likelihood(m, theta, s) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("CCC GARCH first step uses the unconditional variance") {
  const Model m(models::CccBivariateGarch{});
  VectorXd theta(9);
  theta << 1.0, -1.0, 0.2, 0.3, 0.1, 0.2, 0.5, 0.4, 0.3;
  MatrixXd x(2, 2);
  x << 1.5, -0.5, 0.0, -2.0;
  const TimeSeries s(x);
  const double h11 = 0.2 / 0.4, h22 = 0.3 / 0.4;
  auto bvn = [](double y1, double y2, double h1, double h2, double r) {
    const double det = h1 * h2 * (1 - r * r);
    const double q = (y1 * y1 / h1 - 2 * r * y1 * y2 / std::sqrt(h1 * h2) + y2 * y2 / h2) / (1 - r * r);
    return -std::log(2 * std::numbers::pi) - 0.5 * std::log(det) - 0.5 * q;
  };
  CHECK(conditional_log_density(m, theta, s, 1) == doctest::Approx(bvn(0.5, 0.5, h11, h22, 0.3)));
  const double g11 = 0.2 + 0.1 * 0.25 + 0.5 * h11;
  const double g22 = 0.3 + 0.2 * 0.25 + 0.4 * h22;
  CHECK(conditional_log_density(m, theta, s, 2) == doctest::Approx(bvn(-1.0, -1.0, g11, g22, 0.3)));

  // Non-stationary coefficients fall back to w.
  theta << 0.0, 0.0, 0.2, 0.3, 0.6, 0.2, 0.5, 0.4, 0.0;
  CHECK(conditional_log_density(m, theta, s, 1) ==
        doctest::Approx(bvn(1.5, -0.5, 0.2, 0.3 / 0.4, 0.0)));
}

TEST_CASE("conditional densities depend only on the prefix") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const Model& m : all_models()) {
    const Index T = 25;
    const VectorXd theta = default_true_parameters(m);
    const TimeSeries s = simulate(m, theta, T, covariates_for(m, T, 4), 8);
    for (Index t : {1, 2, 3, 7, 24}) {
      MatrixXd obs = s.obs();
      std::optional<MatrixXd> cov;
      if (s.has_covariates()) cov = s.covariates();
      for (Index r = t; r < T; ++r) {
        for (Index c = 0; c < obs.cols(); ++c) {
          obs(r, c) = std::holds_alternative<models::BinaryAr>(m.variant()) ? 1.0 - obs(r, c)
                                                                             : obs(r, c) + noise(gen);
        }
        if (cov) cov->row(r).setConstant(noise(gen));
      }
      const TimeSeries mutated(obs, cov);
      INFO(m.name(), " t=", t);
      CHECK(conditional_log_density(m, theta, mutated, t) == conditional_log_density(m, theta, s, t));
    }
  }
}

TEST_CASE("simulation examples") {
  SUBCASE("saturated logistic gives all ones") {
    const Model m(models::BinaryAr{1, 0});
    VectorXd theta(2);
    theta << 20.0, 0.0;
    const TimeSeries s = simulate(m, theta, 100, std::nullopt, 1);
    CHECK((s.obs().array() == 1.0).all());
  }
  SUBCASE("AR(2) errors reproduce the Yule-Walker lag-1 autocorrelation") {
    const Model m(models::ArErrorRegression{1});
    VectorXd theta(5);
    theta << 0.5, 2.0, 0.5, 0.2, 1.0;
    const Index T = 100000;
    const MatrixXd z = normal_covariates(T, 1, 12);
    const TimeSeries s = simulate(m, theta, T, z, 13);
    const VectorXd eps = s.obs().col(0).array() - 0.5 - 2.0 * z.col(0).array();
    const VectorXd c = eps.array() - eps.mean();
    const double rho1 = c.head(T - 1).dot(c.tail(T - 1)) / c.squaredNorm();
    CHECK(std::abs(rho1 - 0.5 / (1.0 - 0.2)) < 0.02);
  }
  SUBCASE("same seed, same series") {
    for (const Model& m : all_models()) {
      const VectorXd theta = default_true_parameters(m);
      const auto cov = covariates_for(m, 50, 1);
      CHECK(simulate(m, theta, 50, cov, 77) == simulate(m, theta, 50, cov, 77));
      CHECK_FALSE(simulate(m, theta, 50, cov, 77) == simulate(m, theta, 50, cov, 78));
    }
  }
}

TEST_CASE("default true parameters") {
  const Model hmm(models::LinearGaussianHmm::experiment());
  VectorXd expected(6);
  expected << 0.9, -0.3, 0.2, 1.0, 0.5, 0.5;
  CHECK(default_true_parameters(hmm) == expected);
  CHECK(hmm.space().coordinate_names() ==
        std::vector<std::string>{"A[1]", "A[2]", "A[3]", "A[4]", "sigma2_z", "sigma2_x"});

  const Model bin(models::BinaryAr{10, 5});
  CHECK(default_true_parameters(bin)[0] == 0.0);

  const Model garch(models::GarchX{5, 3, 5});
  const VectorXd g = default_true_parameters(garch);
  const double persistence = g.segment(6, 8).sum();
  CHECK(persistence < 1.0);
  // Stationarity in practice: a long simulated path stays bounded and its
  // variance sits near omega^2 / (1 - persistence) (no covariate effect here).
  const Model garch0(models::GarchX{0, 3, 5});
  const VectorXd g0 = default_true_parameters(garch0);
  const TimeSeries path = simulate(garch0, g0, 200000, std::nullopt, 3);
  CHECK(path.obs().allFinite());
  CHECK(path.obs().cwiseAbs().maxCoeff() < 50.0);
  const double var = path.obs().squaredNorm() / 200000.0;
  CHECK(var == doctest::Approx(g0[0] * g0[0] / (1.0 - g0.tail(8).sum())).epsilon(0.1));
}

TEST_CASE("model errors") {
  const Model ar(models::ArErrorRegression{2});
  const VectorXd theta = default_true_parameters(ar);
  const MatrixXd z = normal_covariates(10, 2, 1);
  const TimeSeries s = simulate(ar, theta, 10, z, 1);
  CHECK_THROWS_AS(conditional_log_density(ar, theta, s, 0), IndexError);
  CHECK_THROWS_AS(conditional_log_density(ar, theta, s, 11), IndexError);
  VectorXd bad = theta;
  bad[5] = -1.0;
  CHECK_THROWS_AS(log_likelihood(ar, bad, s), DomainError);
  CHECK_THROWS_AS(log_likelihood(ar, VectorXd::Zero(3), s), DimensionError);
  CHECK_THROWS_AS(log_likelihood(ar, theta, TimeSeries(s.obs())), CovariateError);
  CHECK_THROWS_AS(simulate(ar, theta, 10, std::nullopt, 1), CovariateError);
  CHECK_THROWS_AS(simulate(ar, theta, 10, normal_covariates(9, 2, 1), 1), CovariateError);
  CHECK_THROWS_AS(simulate(ar, bad, 10, z, 1), DomainError);

  const Model bin(models::BinaryAr{1, 0});
  MatrixXd x(3, 1);
  x << 0, 0.5, 1;
  CHECK_THROWS_AS(log_likelihood(bin, VectorXd::Zero(2), TimeSeries(x)), DomainError);
  CHECK_THROWS_AS(simulate(bin, VectorXd::Zero(2), 3, MatrixXd::Zero(3, 1), 1), CovariateError);

  const Model garch(models::GarchX{0, 1, 1});
  VectorXd dead(3);
  dead << 0.0, 0.0, 0.0;  // omega = alpha = beta = 0 -> zero variance after t = 1
  CHECK_THROWS_AS(log_likelihood(garch, dead, TimeSeries(MatrixXd::Ones(3, 1))),
                  NonPositiveVarianceError);
}

TEST_CASE("fixed blocks are removed from the free space") {
  const Model m(models::ArErrorRegression{0}, {{"phi", VectorXd::Zero(2)}, {"sigma2", VectorXd::Ones(1)}});
  CHECK(m.space().dim() == 1);
  CHECK(m.space().coordinate_names() == std::vector<std::string>{"alpha"});
  const VectorXd full = m.expand(VectorXd::Constant(1, 3.0));
  CHECK(full == (VectorXd(4) << 3.0, 0.0, 0.0, 1.0).finished());
  CHECK(m.restrict_to_free(full) == VectorXd::Constant(1, 3.0));
  CHECK_THROWS_AS(Model(models::ArErrorRegression{0}, {{"sigma2", VectorXd::Zero(1)}}), SupportError);
  CHECK_THROWS_AS(Model(models::ArErrorRegression{0}, {{"nope", VectorXd::Zero(1)}}), DomainError);
}

TEST_CASE("simulated data favour the true parameter on average (Monte Carlo KL positivity)") {
  const Index T = 200;
  const int replicates = 2000;
  for (const Model& m : all_models()) {
    const VectorXd truth = default_true_parameters(m);
    const auto cov = covariates_for(m, T, 21);
    // 20 perturbations in unconstrained space.
    Rng rng(99);
    const VectorXd eta0 = to_unconstrained(m.space(), truth);
    std::vector<VectorXd> alternatives;
    for (int j = 0; j < 20; ++j) {
      alternatives.push_back(from_unconstrained(m.space(), eta0 + 0.1 * rng.normal_vector(eta0.size())).theta);
    }
    std::vector<double> sum(20, 0.0), sum_sq(20, 0.0);
    for (int r = 0; r < replicates; ++r) {
      const TimeSeries s = simulate(m, truth, T, cov, derive_seed(5, r));
      const double l0 = log_likelihood(m, truth, s);
      for (int j = 0; j < 20; ++j) {
        const double diff = l0 - log_likelihood(m, alternatives[j], s);
        sum[j] += diff;
        sum_sq[j] += diff * diff;
      }
    }
    for (int j = 0; j < 20; ++j) {
      const double mean = sum[j] / replicates;
      const double var = sum_sq[j] / replicates - mean * mean;
      const double se = std::sqrt(var / replicates);
      INFO(m.name(), " perturbation ", j, " mean ", mean, " se ", se);
      CHECK(mean >= -3.0 * se);
    }
  }
}
