#include <cmath>
#include <numbers>

#include "variants.hpp"

namespace dcbats::models::detail {

ParameterSpace parameter_space(const CccBivariateGarch&) {
  return ParameterSpace({{"mu", 2, Support::real()},
                         {"w", 2, Support::positive()},
                         {"a", 2, Support::positive()},
                         {"b", 2, Support::positive()},
                         {"r", 1, Support::interval(-1.0, 1.0)}});
}

namespace {

struct CccState {
  double h[2] = {0.0, 0.0};
  double v[2] = {0.0, 0.0};
};

// H_{t,ii} for zero-based i; H_1 starts at the unconditional variance when it exists.
void advance(const VectorXd& theta, Index i, CccState& s) {
  for (int c = 0; c < 2; ++c) {
    const double w = theta[2 + c];
    const double a = theta[4 + c];
    const double b = theta[6 + c];
    if (i == 0) {
      s.h[c] = a + b < 1.0 ? w / (1.0 - a - b) : w;
    } else {
      s.h[c] = w + a * s.v[c] * s.v[c] + b * s.h[c];
    }
    if (!(s.h[c] > 0.0) || !std::isfinite(s.h[c])) throw_bad_variance("ccc-garch", i + 1, s.h[c]);
  }
}

}  // namespace

void log_density_terms(const CccBivariateGarch&, const VectorXd& theta, const TimeSeries& series,
                       Index t_end, double* out) {
  const double r = theta[8];
  const double one_minus_r2 = 1.0 - r * r;
  if (!(one_minus_r2 > 0.0)) throw_bad_variance("ccc-garch", 1, one_minus_r2);
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  const MatrixXd& x = series.obs();
  CccState s;
  for (Index i = 0; i < t_end; ++i) {
    advance(theta, i, s);
    const double y1 = x(i, 0) - theta[0];
    const double y2 = x(i, 1) - theta[1];
    const double sd1 = std::sqrt(s.h[0]);
    const double sd2 = std::sqrt(s.h[1]);
    const double u1 = y1 / sd1;
    const double u2 = y2 / sd2;
    const double quad = (u1 * u1 - 2.0 * r * u1 * u2 + u2 * u2) / one_minus_r2;
    const double log_det = std::log(s.h[0]) + std::log(s.h[1]) + std::log(one_minus_r2);
    out[i] = -log_two_pi - 0.5 * log_det - 0.5 * quad;
    s.v[0] = y1;
    s.v[1] = y2;
  }
}

MatrixXd simulate_obs(const CccBivariateGarch&, const VectorXd& theta, Index T,
                      const std::optional<MatrixXd>&, Rng& rng) {
  const double r = theta[8];
  const double r_perp = std::sqrt(1.0 - r * r);
  MatrixXd x(T, 2);
  CccState s;
  for (Index i = 0; i < T; ++i) {
    advance(theta, i, s);
    const double e1 = rng.normal();
    const double e2 = r * e1 + r_perp * rng.normal();
    s.v[0] = std::sqrt(s.h[0]) * e1;
    s.v[1] = std::sqrt(s.h[1]) * e2;
    x(i, 0) = theta[0] + s.v[0];
    x(i, 1) = theta[1] + s.v[1];
  }
  return x;
}

VectorXd default_truth(const CccBivariateGarch&) {
  VectorXd theta(9);
  theta << 3.2, 2.0,  // mu
      0.1, 0.1,       // w
      0.3, 0.4,       // a
      0.5, 0.4,       // b
      0.25;           // r
  return theta;
}

}  // namespace dcbats::models::detail
