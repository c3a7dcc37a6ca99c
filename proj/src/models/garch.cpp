#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "variants.hpp"

namespace dcbats::models::detail {

ParameterSpace parameter_space(const GarchX& m) {
  if (m.q_arch < 1 || m.p_garch < 1) throw DomainError("GARCH orders must be at least 1");
  std::vector<ParameterBlock> blocks;
  if (m.d_cov > 0) blocks.push_back({"b", m.d_cov, Support::real()});
  blocks.push_back({"omega", 1, Support::positive()});
  blocks.push_back({"alpha", m.q_arch, Support::positive()});
  blocks.push_back({"beta", m.p_garch, Support::positive()});
  return ParameterSpace(std::move(blocks));
}

namespace {

struct GarchView {
  const double* b;
  double omega2;
  const double* alpha;
  const double* beta;
  Index r_init;
};

GarchView view(const GarchX& m, const VectorXd& theta) {
  const Index d = m.d_cov;
  return {theta.data(), theta[d] * theta[d], theta.data() + d + 1,
          theta.data() + d + 1 + m.q_arch, std::max(m.p_garch, m.q_arch)};
}

// sigma_t^2 for zero-based i given past squared errors and variances.
double next_variance(const GarchX& m, const GarchView& g, Index i, const std::vector<double>& eps2,
                     const std::vector<double>& var) {
  if (i < g.r_init) return 1.0;
  double s2 = g.omega2;
  for (Index k = 1; k <= m.q_arch; ++k) s2 += g.alpha[k - 1] * eps2[i - k];
  for (Index j = 1; j <= m.p_garch; ++j) s2 += g.beta[j - 1] * var[i - j];
  return s2;
}

}  // namespace

void log_density_terms(const GarchX& m, const VectorXd& theta, const TimeSeries& series,
                       Index t_end, double* out) {
  const GarchView g = view(m, theta);
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  const MatrixXd& x = series.obs();
  std::vector<double> eps2(static_cast<std::size_t>(t_end));
  std::vector<double> var(static_cast<std::size_t>(t_end));
  for (Index i = 0; i < t_end; ++i) {
    const double s2 = next_variance(m, g, i, eps2, var);
    if (!(s2 > 0.0) || !std::isfinite(s2)) throw_bad_variance("garch-x", i + 1, s2);
    const double mean = m.d_cov > 0 ? row_dot(series.covariates(), i, g.b, m.d_cov) : 0.0;
    const double e = x(i, 0) - mean;
    out[i] = -0.5 * (log_two_pi + std::log(s2) + e * e / s2);
    eps2[i] = e * e;
    var[i] = s2;
  }
}

MatrixXd simulate_obs(const GarchX& m, const VectorXd& theta, Index T,
                      const std::optional<MatrixXd>& covariates, Rng& rng) {
  const GarchView g = view(m, theta);
  MatrixXd x(T, 1);
  std::vector<double> eps2(static_cast<std::size_t>(T));
  std::vector<double> var(static_cast<std::size_t>(T));
  for (Index i = 0; i < T; ++i) {
    const double s2 = next_variance(m, g, i, eps2, var);
    if (!(s2 > 0.0) || !std::isfinite(s2)) throw_bad_variance("garch-x", i + 1, s2);
    const double e = std::sqrt(s2) * rng.normal();
    const double mean = m.d_cov > 0 ? row_dot(*covariates, i, g.b, m.d_cov) : 0.0;
    x(i, 0) = mean + e;
    eps2[i] = e * e;
    var[i] = s2;
  }
  return x;
}

VectorXd default_truth(const GarchX& m) {
  VectorXd theta(m.d_cov + 1 + m.q_arch + m.p_garch);
  for (Index j = 0; j < m.d_cov; ++j) theta[j] = (j % 2 == 0 ? 1.0 : -1.0) * (0.5 + 0.25 * (j % 3));
  theta[m.d_cov] = 0.5;
  // Sum of ARCH plus GARCH coefficients is 0.7 < 1.
  for (Index i = 0; i < m.q_arch; ++i) theta[m.d_cov + 1 + i] = 0.2 / static_cast<double>(m.q_arch);
  for (Index j = 0; j < m.p_garch; ++j) {
    theta[m.d_cov + 1 + m.q_arch + j] = 0.5 / static_cast<double>(m.p_garch);
  }
  return theta;
}

}  // namespace dcbats::models::detail
