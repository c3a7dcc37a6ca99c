#include <cmath>
#include <sstream>
#include <vector>

#include "variants.hpp"

namespace dcbats {

namespace models::detail {

void throw_bad_variance(const char* model, Index t, double value) {
  std::ostringstream msg;
  msg << model << ": conditional variance at t=" << t << " is not positive and finite (" << value
      << ")";
  throw NonPositiveVarianceError(msg.str());
}

}  // namespace models::detail

namespace {

ParameterSpace free_space(const ParameterSpace& full, const std::map<std::string, VectorXd>& fixed) {
  std::vector<ParameterBlock> blocks;
  for (const auto& b : full.blocks()) {
    if (!fixed.contains(b.name)) blocks.push_back(b);
  }
  if (blocks.empty()) throw DomainError("model has no free parameters");
  return ParameterSpace(std::move(blocks));
}

}  // namespace

Model::Model(ModelVariant variant, std::map<std::string, VectorXd> fixed)
    : variant_(std::move(variant)), fixed_(std::move(fixed)) {
  full_space_ = std::visit([](const auto& m) { return models::detail::parameter_space(m); }, variant_);
  for (const auto& [name, value] : fixed_) {
    const ParameterBlock& b = full_space_.block(name);
    if (value.size() != b.dim) {
      throw DimensionError("fixed value for '" + name + "' has wrong dimension");
    }
    for (Index i = 0; i < value.size(); ++i) {
      if (!b.support.contains(value[i])) {
        throw SupportError("fixed value for '" + name + "' outside support " + b.support.describe());
      }
    }
  }
  space_ = free_space(full_space_, fixed_);
}

VectorXd Model::expand(const VectorXd& theta) const {
  space_.require_dim(theta, "model parameter");
  if (fixed_.empty()) return theta;
  VectorXd full(full_space_.dim());
  Index src = 0;
  Index dst = 0;
  for (const auto& b : full_space_.blocks()) {
    auto it = fixed_.find(b.name);
    if (it != fixed_.end()) {
      full.segment(dst, b.dim) = it->second;
    } else {
      full.segment(dst, b.dim) = theta.segment(src, b.dim);
      src += b.dim;
    }
    dst += b.dim;
  }
  return full;
}

VectorXd Model::restrict_to_free(const VectorXd& full_theta) const {
  full_space_.require_dim(full_theta, "full model parameter");
  VectorXd out(space_.dim());
  Index src = 0;
  Index dst = 0;
  for (const auto& b : full_space_.blocks()) {
    if (!fixed_.contains(b.name)) {
      out.segment(dst, b.dim) = full_theta.segment(src, b.dim);
      dst += b.dim;
    }
    src += b.dim;
  }
  return out;
}

std::string Model::name() const {
  return std::visit(
      [](const auto& m) -> std::string {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, models::ArErrorRegression>) return "ar-error-regression";
        else if constexpr (std::is_same_v<M, models::GarchX>) return "garch-x";
        else if constexpr (std::is_same_v<M, models::LinearGaussianHmm>) return "linear-gaussian-hmm";
        else if constexpr (std::is_same_v<M, models::BinaryAr>) return "binary-ar";
        else return "ccc-bivariate-garch";
      },
      variant_);
}

Index Model::obs_dim() const {
  return std::visit(
      [](const auto& m) -> Index {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, models::LinearGaussianHmm>) return m.x_dim;
        else if constexpr (std::is_same_v<M, models::CccBivariateGarch>) return 2;
        else return 1;
      },
      variant_);
}

Index Model::cov_dim() const {
  return std::visit(
      [](const auto& m) -> Index {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, models::ArErrorRegression>) return m.p_cov;
        else if constexpr (std::is_same_v<M, models::GarchX>) return m.d_cov;
        else if constexpr (std::is_same_v<M, models::BinaryAr>) return m.q_cov;
        else return 0;
      },
      variant_);
}

void Model::check_series(const TimeSeries& series) const {
  if (series.obs_dim() != obs_dim()) {
    std::ostringstream msg;
    msg << name() << " expects " << obs_dim() << " observation column(s), got " << series.obs_dim();
    throw DimensionError(msg.str());
  }
  if (needs_covariates()) {
    if (!series.has_covariates() || series.cov_dim() != cov_dim()) {
      std::ostringstream msg;
      msg << name() << " expects " << cov_dim() << " covariate column(s), got " << series.cov_dim();
      throw CovariateError(msg.str());
    }
  }
  if (std::holds_alternative<models::BinaryAr>(variant_)) {
    const MatrixXd& x = series.obs();
    for (Index t = 0; t < x.rows(); ++t) {
      if (x(t, 0) != 0.0 && x(t, 0) != 1.0) {
        std::ostringstream msg;
        msg << "binary-ar observation at t=" << t + 1 << " is " << x(t, 0) << ", not 0 or 1";
        throw DomainError(msg.str());
      }
    }
  }
}

namespace {

// Positive blocks are closed at zero here: a zero ARCH or GARCH coefficient is a valid
// model, and any variance that collapses to zero is caught by the recursions.
bool in_model_domain(const ParameterSpace& space, const VectorXd& theta) {
  Index i = 0;
  for (const auto& b : space.blocks()) {
    for (Index j = 0; j < b.dim; ++j, ++i) {
      const double x = theta[i];
      const bool ok = b.support.kind == Support::Kind::Positive ? std::isfinite(x) && x >= 0.0
                                                                : b.support.contains(x);
      if (!ok) return false;
    }
  }
  return true;
}

VectorXd checked_full(const Model& model, const VectorXd& theta) {
  model.space().require_dim(theta, model.name().c_str());
  if (!in_model_domain(model.space(), theta)) {
    throw DomainError(model.name() + ": parameter outside its support");
  }
  return model.expand(theta);
}

void fill_terms(const Model& model, const VectorXd& full, const TimeSeries& series, Index t_end,
                double* out) {
  std::visit([&](const auto& m) { models::detail::log_density_terms(m, full, series, t_end, out); },
             model.variant());
}

}  // namespace

double conditional_log_density(const Model& model, const VectorXd& theta, const TimeSeries& series,
                               Index t) {
  if (t < 1 || t > series.length()) {
    std::ostringstream msg;
    msg << "time index " << t << " outside 1.." << series.length();
    throw IndexError(msg.str());
  }
  model.check_series(series);
  const VectorXd full = checked_full(model, theta);
  std::vector<double> terms(static_cast<std::size_t>(t));
  fill_terms(model, full, series, t, terms.data());
  return terms.back();
}

VectorXd log_density_terms(const Model& model, const VectorXd& theta, const TimeSeries& series) {
  model.check_series(series);
  const VectorXd full = checked_full(model, theta);
  VectorXd terms(series.length());
  fill_terms(model, full, series, series.length(), terms.data());
  return terms;
}

double log_likelihood(const Model& model, const VectorXd& theta, const TimeSeries& series) {
  const VectorXd terms = log_density_terms(model, theta, series);
  double total = 0.0;
  for (Index t = 0; t < terms.size(); ++t) total += terms[t];
  return total;
}

TimeSeries simulate(const Model& model, const VectorXd& theta, Index T,
                    const std::optional<MatrixXd>& covariates, std::uint64_t seed) {
  if (T < 1) throw DomainError("simulation length must be at least 1");
  const VectorXd full = checked_full(model, theta);
  if (model.needs_covariates()) {
    if (!covariates) throw CovariateError(model.name() + " requires covariates");
    if (covariates->rows() != T || covariates->cols() != model.cov_dim()) {
      std::ostringstream msg;
      msg << "covariates must be " << T << " x " << model.cov_dim() << ", got "
          << covariates->rows() << " x " << covariates->cols();
      throw CovariateError(msg.str());
    }
  } else if (covariates) {
    throw CovariateError(model.name() + " takes no covariates");
  }
  Rng rng(seed);
  MatrixXd obs = std::visit(
      [&](const auto& m) { return models::detail::simulate_obs(m, full, T, covariates, rng); },
      model.variant());
  return TimeSeries(std::move(obs), covariates);
}

VectorXd default_true_parameters(const Model& model) {
  const VectorXd full =
      std::visit([](const auto& m) { return models::detail::default_truth(m); }, model.variant());
  VectorXd with_fixed = full;
  Index off = 0;
  for (const auto& b : model.full_space().blocks()) {
    auto it = model.fixed().find(b.name);
    if (it != model.fixed().end()) with_fixed.segment(off, b.dim) = it->second;
    off += b.dim;
  }
  return model.restrict_to_free(with_fixed);
}

}  // namespace dcbats
