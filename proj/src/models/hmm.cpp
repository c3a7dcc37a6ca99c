#include <cmath>
#include <numbers>

#include "variants.hpp"

namespace dcbats::models::detail {

ParameterSpace parameter_space(const LinearGaussianHmm& m) {
  if (m.z_dim < 1 || m.x_dim < 1) throw DomainError("HMM dimensions must be at least 1");
  if (m.mu0.size() != m.z_dim || m.sigma0.rows() != m.z_dim || m.sigma0.cols() != m.z_dim ||
      m.emission.rows() != m.x_dim || m.emission.cols() != m.z_dim || m.c_z.size() != m.z_dim ||
      m.c_x.size() != m.x_dim) {
    throw DimensionError("HMM fixed quantities disagree with z_dim/x_dim");
  }
  return ParameterSpace({{"A", m.z_dim * m.z_dim, Support::real()},
                         {"sigma2_z", 1, Support::positive()},
                         {"sigma2_x", 1, Support::positive()}});
}

namespace {

// Prediction-error decomposition with compile-time sizes where they are known.
template <int Z, int X>
void kalman_terms(const LinearGaussianHmm& m, const VectorXd& theta, const TimeSeries& series,
                  Index t_end, double* out) {
  using MatZ = Eigen::Matrix<double, Z, Z>;
  using MatX = Eigen::Matrix<double, X, X>;
  using MatXZ = Eigen::Matrix<double, X, Z>;
  using MatZX = Eigen::Matrix<double, Z, X>;
  using VecZ = Eigen::Matrix<double, Z, 1>;
  using VecX = Eigen::Matrix<double, X, 1>;

  const Index zd = m.z_dim;
  const Index xd = m.x_dim;
  MatZ A(zd, zd);
  for (Index i = 0; i < zd; ++i)
    for (Index j = 0; j < zd; ++j) A(i, j) = theta[i * zd + j];
  const double s2z = theta[zd * zd];
  const double s2x = theta[zd * zd + 1];
  const MatXZ H = m.emission;
  const VecZ cz = m.c_z;
  const VecX cx = m.c_x;
  const MatZ Iz = MatZ::Identity(zd, zd);
  const MatX Ix = MatX::Identity(xd, xd);
  const double log_two_pi = std::log(2.0 * std::numbers::pi);

  VecZ mean = m.mu0;
  MatZ cov = m.sigma0;
  const MatrixXd& x = series.obs();
  for (Index t = 0; t < t_end; ++t) {
    mean = A * mean + cz;
    cov = A * cov * A.transpose() + s2z * Iz;
    const VecX innov = x.row(t).transpose() - (H * mean + cx);
    const MatX S = H * cov * H.transpose() + s2x * Ix;
    const Eigen::LLT<MatX> llt(S);
    if (llt.info() != Eigen::Success) throw_bad_variance("linear-gaussian-hmm", t + 1, S(0, 0));
    const VecX w = llt.matrixL().solve(innov);
    double log_det = 0.0;
    for (Index i = 0; i < xd; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
    out[t] = -0.5 * (static_cast<double>(xd) * log_two_pi + log_det + w.squaredNorm());

    const MatZX gain = llt.solve(H * cov).transpose();
    mean += gain * innov;
    const MatZ J = Iz - gain * H;
    cov = J * cov * J.transpose() + s2x * gain * gain.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
  }
}

}  // namespace

void log_density_terms(const LinearGaussianHmm& m, const VectorXd& theta,
                       const TimeSeries& series, Index t_end, double* out) {
  if (m.z_dim == 1 && m.x_dim == 1) return kalman_terms<1, 1>(m, theta, series, t_end, out);
  if (m.z_dim == 2 && m.x_dim == 2) return kalman_terms<2, 2>(m, theta, series, t_end, out);
  kalman_terms<Eigen::Dynamic, Eigen::Dynamic>(m, theta, series, t_end, out);
}

MatrixXd simulate_obs(const LinearGaussianHmm& m, const VectorXd& theta, Index T,
                      const std::optional<MatrixXd>&, Rng& rng) {
  const Index zd = m.z_dim;
  MatrixXd A(zd, zd);
  for (Index i = 0; i < zd; ++i)
    for (Index j = 0; j < zd; ++j) A(i, j) = theta[i * zd + j];
  const double sz = std::sqrt(theta[zd * zd]);
  const double sx = std::sqrt(theta[zd * zd + 1]);
  const Eigen::LLT<MatrixXd> init(m.sigma0);
  if (init.info() != Eigen::Success) throw DomainError("Sigma0 is not positive definite");
  VectorXd z = m.mu0 + init.matrixL() * rng.normal_vector(zd);
  MatrixXd x(T, m.x_dim);
  for (Index t = 0; t < T; ++t) {
    z = A * z + m.c_z + sz * rng.normal_vector(zd);
    x.row(t) = (m.emission * z + m.c_x + sx * rng.normal_vector(m.x_dim)).transpose();
  }
  return x;
}

VectorXd default_truth(const LinearGaussianHmm& m) {
  VectorXd theta(m.z_dim * m.z_dim + 2);
  if (m.z_dim == 2) {
    theta.head(4) << 0.9, -0.3, 0.2, 1.0;
  } else {
    MatrixXd a = 0.5 * MatrixXd::Identity(m.z_dim, m.z_dim);
    for (Index i = 0; i < m.z_dim; ++i)
      for (Index j = 0; j < m.z_dim; ++j) theta[i * m.z_dim + j] = a(i, j);
  }
  theta[m.z_dim * m.z_dim] = 0.5;
  theta[m.z_dim * m.z_dim + 1] = 0.5;
  return theta;
}

}  // namespace dcbats::models::detail

namespace dcbats::models {

LinearGaussianHmm LinearGaussianHmm::standard(Index z_dim, Index x_dim) {
  if (z_dim < 1 || x_dim < 1) throw DomainError("HMM dimensions must be at least 1");
  return {z_dim,
          x_dim,
          VectorXd::Zero(z_dim),
          MatrixXd::Identity(z_dim, z_dim),
          MatrixXd::Identity(x_dim, z_dim),
          VectorXd::Zero(z_dim),
          VectorXd::Zero(x_dim)};
}

LinearGaussianHmm LinearGaussianHmm::experiment() {
  LinearGaussianHmm m = standard(2, 2);
  m.emission << -1.1, 0.5, -0.3, 0.8;
  return m;
}

}  // namespace dcbats::models
