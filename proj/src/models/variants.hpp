#pragma once

// Per-variant building blocks behind the Model facade. Parameter vectors here are
// full (fixed blocks already expanded) and already checked against the support.

#include <optional>

#include "dcbats/models.hpp"
#include "dcbats/rng.hpp"

namespace dcbats::models::detail {

#define DCBATS_VARIANT_API(V)                                                            \
  ParameterSpace parameter_space(const V& m);                                             \
  void log_density_terms(const V& m, const VectorXd& theta, const TimeSeries& series,     \
                         Index t_end, double* out);                                       \
  MatrixXd simulate_obs(const V& m, const VectorXd& theta, Index T,                       \
                        const std::optional<MatrixXd>& covariates, Rng& rng);             \
  VectorXd default_truth(const V& m);

DCBATS_VARIANT_API(ArErrorRegression)
DCBATS_VARIANT_API(GarchX)
DCBATS_VARIANT_API(LinearGaussianHmm)
DCBATS_VARIANT_API(BinaryAr)
DCBATS_VARIANT_API(CccBivariateGarch)

#undef DCBATS_VARIANT_API

inline double row_dot(const MatrixXd& z, Index row, const double* coef, Index n) {
  double s = 0.0;
  for (Index j = 0; j < n; ++j) s += z(row, j) * coef[j];
  return s;
}

[[noreturn]] void throw_bad_variance(const char* model, Index t, double value);

}  // namespace dcbats::models::detail
