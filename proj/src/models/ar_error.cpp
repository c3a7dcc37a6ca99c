#include <cmath>
#include <numbers>

#include "variants.hpp"

namespace dcbats::models::detail {

ParameterSpace parameter_space(const ArErrorRegression& m) {
  std::vector<ParameterBlock> blocks{{"alpha", 1, Support::real()}};
  if (m.p_cov > 0) blocks.push_back({"beta", m.p_cov, Support::real()});
  blocks.push_back({"phi", 2, Support::real()});
  blocks.push_back({"sigma2", 1, Support::positive()});
  return ParameterSpace(std::move(blocks));
}

void log_density_terms(const ArErrorRegression& m, const VectorXd& theta,
                       const TimeSeries& series, Index t_end, double* out) {
  const Index p = m.p_cov;
  const double alpha = theta[0];
  const double* beta = theta.data() + 1;
  const double phi1 = theta[1 + p];
  const double phi2 = theta[2 + p];
  const double sigma2 = theta[3 + p];
  if (!(sigma2 > 0.0)) throw_bad_variance("ar-error-regression", 1, sigma2);
  const double log_norm = -0.5 * (std::log(2.0 * std::numbers::pi) + std::log(sigma2));
  const MatrixXd& x = series.obs();

  // eps_{t-1}, eps_{t-2}; the AR recursion only kicks in from t = 3.
  double eps1 = 0.0;
  double eps2 = 0.0;
  for (Index i = 0; i < t_end; ++i) {
    double reg = alpha;
    if (p > 0) reg += row_dot(series.covariates(), i, beta, p);
    const double mean = i >= 2 ? reg + phi1 * eps1 + phi2 * eps2 : reg;
    const double resid = x(i, 0) - mean;
    out[i] = log_norm - 0.5 * resid * resid / sigma2;
    eps2 = eps1;
    eps1 = x(i, 0) - reg;
  }
}

MatrixXd simulate_obs(const ArErrorRegression& m, const VectorXd& theta, Index T,
                      const std::optional<MatrixXd>& covariates, Rng& rng) {
  const Index p = m.p_cov;
  const double alpha = theta[0];
  const double phi1 = theta[1 + p];
  const double phi2 = theta[2 + p];
  const double sd = std::sqrt(theta[3 + p]);
  MatrixXd x(T, 1);
  double eps1 = 0.0;
  double eps2 = 0.0;
  for (Index i = 0; i < T; ++i) {
    double reg = alpha;
    if (p > 0) reg += row_dot(*covariates, i, theta.data() + 1, p);
    const double innovation = sd * rng.normal();
    const double eps = i >= 2 ? phi1 * eps1 + phi2 * eps2 + innovation : innovation;
    x(i, 0) = reg + eps;
    eps2 = eps1;
    eps1 = eps;
  }
  return x;
}

VectorXd default_truth(const ArErrorRegression& m) {
  VectorXd theta(m.p_cov + 4);
  theta[0] = 1.0;
  for (Index j = 0; j < m.p_cov; ++j) {
    // Alternating signs, magnitudes spread over [0.5, 1.5].
    const double mag = 0.5 + (m.p_cov > 1 ? static_cast<double>(j) / (m.p_cov - 1) : 0.0);
    theta[1 + j] = (j % 2 == 0 ? 1.0 : -1.0) * mag;
  }
  theta[1 + m.p_cov] = 0.5;
  theta[2 + m.p_cov] = 0.2;
  theta[3 + m.p_cov] = 1.0;
  return theta;
}

}  // namespace dcbats::models::detail
