#include <cmath>

#include "variants.hpp"

namespace dcbats::models::detail {

ParameterSpace parameter_space(const BinaryAr& m) {
  std::vector<ParameterBlock> blocks{{"c", 1, Support::real()}};
  if (m.p_lag > 0) blocks.push_back({"alpha", m.p_lag, Support::real()});
  if (m.q_cov > 0) blocks.push_back({"b", m.q_cov, Support::real()});
  return ParameterSpace(std::move(blocks));
}

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double linear_predictor(const BinaryAr& m, const VectorXd& theta, const MatrixXd& x,
                        const MatrixXd* z, Index i) {
  double eta = theta[0];
  for (Index k = 1; k <= m.p_lag && k <= i; ++k) eta += theta[k] * x(i - k, 0);
  if (m.q_cov > 0) eta += row_dot(*z, i, theta.data() + 1 + m.p_lag, m.q_cov);
  return eta;
}

}  // namespace

void log_density_terms(const BinaryAr& m, const VectorXd& theta, const TimeSeries& series,
                       Index t_end, double* out) {
  const MatrixXd& x = series.obs();
  const MatrixXd* z = m.q_cov > 0 ? &series.covariates() : nullptr;
  for (Index i = 0; i < t_end; ++i) {
    const double eta = linear_predictor(m, theta, x, z, i);
    out[i] = x(i, 0) == 1.0 ? -softplus(-eta) : -softplus(eta);
  }
}

MatrixXd simulate_obs(const BinaryAr& m, const VectorXd& theta, Index T,
                      const std::optional<MatrixXd>& covariates, Rng& rng) {
  MatrixXd x = MatrixXd::Zero(T, 1);
  const MatrixXd* z = m.q_cov > 0 ? &*covariates : nullptr;
  for (Index i = 0; i < T; ++i) {
    const double eta = linear_predictor(m, theta, x, z, i);
    const double p1 = 1.0 / (1.0 + std::exp(-eta));
    x(i, 0) = rng.uniform() < p1 ? 1.0 : 0.0;
  }
  return x;
}

VectorXd default_truth(const BinaryAr& m) {
  VectorXd theta = VectorXd::Zero(1 + m.p_lag + m.q_cov);
  // Geometrically decaying lag effects with alternating sign.
  double a = 0.8;
  for (Index k = 0; k < m.p_lag; ++k, a *= -0.6) theta[1 + k] = a;
  for (Index j = 0; j < m.q_cov; ++j) theta[1 + m.p_lag + j] = j % 2 == 0 ? 0.5 : -0.5;
  return theta;
}

}  // namespace dcbats::models::detail
