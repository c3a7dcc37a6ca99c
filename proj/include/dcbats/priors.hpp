#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dcbats/core.hpp"

namespace dcbats {

namespace prior {

/// Normal(mu, sigma2). On a positive or interval block it is truncated to the
/// block support and renormalized.
struct Normal {
  double mu = 0.0;
  double sigma2 = 1.0;
};
/// |N(0, sigma2)|, density 2 phi(x; 0, sigma2) on x > 0.
struct HalfNormal {
  double sigma2 = 1.0;
};
struct InverseGamma {
  double shape = 1.0;
  double scale = 1.0;
};
struct Gamma {
  double shape = 1.0;
  double rate = 1.0;
};
struct LogNormal {
  double mu = 0.0;
  double sigma2 = 1.0;
};
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

}  // namespace prior

using PriorFamily = std::variant<prior::Normal, prior::HalfNormal, prior::InverseGamma,
                                 prior::Gamma, prior::LogNormal, prior::Uniform>;

std::string family_name(const PriorFamily& family);

/// Independent per-coordinate priors, one family per parameter block.
class PriorSpec {
 public:
  /// Every block of `space` needs an entry; extra entries are rejected.
  PriorSpec(ParameterSpace space, const std::map<std::string, PriorFamily>& families);

  const ParameterSpace& space() const { return space_; }
  const PriorFamily& family(const std::string& block) const;
  const std::vector<PriorFamily>& families() const { return families_; }

 private:
  ParameterSpace space_;
  std::vector<PriorFamily> families_;  // parallel to space_.blocks()
};

/// log pi_0(theta); -inf outside the prior support, never NaN.
double prior_log_density(const PriorSpec& prior, const VectorXd& theta);

/// Log density of one family on a block support, for a single coordinate.
double family_log_density(const PriorFamily& family, const Support& support, double x);

/// Space the sampler walks in: Uniform priors narrow their block support to (lo, hi).
ParameterSpace sampling_space(const PriorSpec& prior);

/// Coordinatewise prior mean, pulled inside the support when it is not finite.
VectorXd prior_mean(const PriorSpec& prior);

/// Identity on real blocks, log on positive blocks, scaled logit on intervals.
VectorXd to_unconstrained(const ParameterSpace& space, const VectorXd& theta);

struct ConstrainedPoint {
  VectorXd theta;
  double log_jacobian = 0.0;  // log |det d theta / d eta|
};

ConstrainedPoint from_unconstrained(const ParameterSpace& space, const VectorXd& eta);

}  // namespace dcbats
