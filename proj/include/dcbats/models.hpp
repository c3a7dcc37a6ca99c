#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "dcbats/core.hpp"

namespace dcbats {

namespace models {

/// x_t = alpha + beta^T z_t + eps_t with AR(2) errors; eps_1, eps_2 iid N(0, sigma2).
/// Blocks: alpha, beta (p_cov, omitted when 0), phi (2), sigma2 (positive).
struct ArErrorRegression {
  Index p_cov = 0;
};

/// x_t = z_t^T b + eps_t, eps_t ~ N(0, sigma_t^2),
/// sigma_t^2 = omega^2 + sum_i alpha_i eps_{t-i}^2 + sum_j beta_j sigma_{t-j}^2.
/// The first max(p_garch, q_arch) variances are pinned to 1.
/// Blocks: b (d_cov, omitted when 0), omega, alpha (q_arch), beta (p_garch); all but b positive.
struct GarchX {
  Index d_cov = 0;
  Index q_arch = 1;
  Index p_garch = 1;
};

/// Z_0 ~ N(mu0, Sigma0), Z_t = A Z_{t-1} + c_z + N(0, sigma2_z I),
/// X_t = emission Z_t + c_x + N(0, sigma2_x I), t = 1..T.
/// Blocks: A (z_dim^2, row-major), sigma2_z, sigma2_x. Everything else is fixed.
struct LinearGaussianHmm {
  Index z_dim = 1;
  Index x_dim = 1;
  VectorXd mu0;
  MatrixXd sigma0;
  MatrixXd emission;  // x_dim x z_dim
  VectorXd c_z;
  VectorXd c_x;

  /// mu0 = 0, Sigma0 = I, emission = I (padded), offsets zero.
  static LinearGaussianHmm standard(Index z_dim, Index x_dim);
  /// Two-dimensional experiment with the fixed emission matrix [[-1.1, 0.5], [-0.3, 0.8]].
  static LinearGaussianHmm experiment();
};

/// P(x_t = 1) = logistic(c + sum_i alpha_i x_{t-i} + z_t^T b), x_s = 0 for s <= 0.
/// Blocks: c, alpha (p_lag, omitted when 0), b (q_cov, omitted when 0).
struct BinaryAr {
  Index p_lag = 1;
  Index q_cov = 0;
};

/// Bivariate constant-conditional-correlation GARCH(1,1) around a constant mean.
/// Blocks: mu (2), w (2), a (2), b (2), r (interval(-1, 1)).
struct CccBivariateGarch {};

}  // namespace models

using ModelVariant = std::variant<models::ArErrorRegression, models::GarchX,
                                  models::LinearGaussianHmm, models::BinaryAr,
                                  models::CccBivariateGarch>;

/// A model variant plus optionally fixed parameter blocks.
///
/// Parameter vectors passed to the free functions below live in `space()`,
/// which omits fixed blocks; `expand` restores the full vector.
class Model {
 public:
  explicit Model(ModelVariant variant, std::map<std::string, VectorXd> fixed = {});

  const ModelVariant& variant() const { return variant_; }
  const std::map<std::string, VectorXd>& fixed() const { return fixed_; }
  const ParameterSpace& full_space() const { return full_space_; }
  const ParameterSpace& space() const { return space_; }

  VectorXd expand(const VectorXd& theta) const;
  VectorXd restrict_to_free(const VectorXd& full_theta) const;

  std::string name() const;
  Index obs_dim() const;
  Index cov_dim() const;
  bool needs_covariates() const { return cov_dim() > 0; }

  /// Throws DimensionError / CovariateError / DomainError if the series cannot feed this model.
  void check_series(const TimeSeries& series) const;

 private:
  ModelVariant variant_;
  std::map<std::string, VectorXd> fixed_;
  ParameterSpace full_space_;
  ParameterSpace space_;
};

/// log p_theta(x_t | x_{1:t-1}) with history taken as rows 1..t-1 of `series` (t is 1-based).
double conditional_log_density(const Model& model, const VectorXd& theta,
                               const TimeSeries& series, Index t);

/// Sum over t of the conditional log densities, accumulated in time order.
double log_likelihood(const Model& model, const VectorXd& theta, const TimeSeries& series);

/// Per-t conditional log densities for t = 1..T.
VectorXd log_density_terms(const Model& model, const VectorXd& theta, const TimeSeries& series);

/// Draw a length-T series from the model, with the same start-up conventions as the likelihood.
TimeSeries simulate(const Model& model, const VectorXd& theta, Index T,
                    const std::optional<MatrixXd>& covariates, std::uint64_t seed);

/// Free-space parameter values used for synthetic experiments.
VectorXd default_true_parameters(const Model& model);

}  // namespace dcbats
