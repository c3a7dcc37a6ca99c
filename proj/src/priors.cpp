#include "dcbats/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace dcbats {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Mass of N(mu, sigma2) on the support; 1 for the real line.
double normal_mass(const prior::Normal& n, const Support& s) {
  const double sd = std::sqrt(n.sigma2);
  switch (s.kind) {
    case Support::Kind::Real: return 1.0;
    case Support::Kind::Positive: return normal_cdf(n.mu / sd);
    case Support::Kind::Interval:
      return normal_cdf((s.hi - n.mu) / sd) - normal_cdf((s.lo - n.mu) / sd);
  }
  return 1.0;
}

void require_positive(double v, const char* what, const std::string& block) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "prior on '" << block << "': " << what << " must be finite and > 0, got " << v;
    throw DomainError(msg.str());
  }
}

void validate_family(const PriorFamily& family, const ParameterBlock& block) {
  const Support& s = block.support;
  const bool positive_block = s.kind == Support::Kind::Positive;
  auto mismatch = [&](const char* fam) {
    throw SupportError("prior family " + std::string(fam) + " does not match support " +
                       s.describe() + " of block '" + block.name + "'");
  };
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, prior::Normal>) {
          require_positive(f.sigma2, "sigma2", block.name);
          if (!std::isfinite(f.mu)) throw DomainError("normal prior mean must be finite");
          if (!(normal_mass(f, s) > 0.0)) mismatch("normal (no mass on support)");
        } else if constexpr (std::is_same_v<F, prior::HalfNormal>) {
          require_positive(f.sigma2, "sigma2", block.name);
          if (!positive_block) mismatch("half-normal");
        } else if constexpr (std::is_same_v<F, prior::InverseGamma>) {
          require_positive(f.shape, "shape", block.name);
          require_positive(f.scale, "scale", block.name);
          if (!positive_block) mismatch("inverse-gamma");
        } else if constexpr (std::is_same_v<F, prior::Gamma>) {
          require_positive(f.shape, "shape", block.name);
          require_positive(f.rate, "rate", block.name);
          if (!positive_block) mismatch("gamma");
        } else if constexpr (std::is_same_v<F, prior::LogNormal>) {
          require_positive(f.sigma2, "sigma2", block.name);
          if (!positive_block) mismatch("log-normal");
        } else if constexpr (std::is_same_v<F, prior::Uniform>) {
          if (!(f.lo < f.hi) || !std::isfinite(f.lo) || !std::isfinite(f.hi)) {
            throw DomainError("uniform prior on '" + block.name + "' needs finite lo < hi");
          }
          if (s.kind == Support::Kind::Positive && f.lo < 0.0) mismatch("uniform");
          if (s.kind == Support::Kind::Interval && (f.lo < s.lo || f.hi > s.hi)) {
            mismatch("uniform");
          }
        }
      },
      family);
}

}  // namespace

std::string family_name(const PriorFamily& family) {
  return std::visit(
      [](const auto& f) -> std::string {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, prior::Normal>) return "normal";
        else if constexpr (std::is_same_v<F, prior::HalfNormal>) return "half-normal";
        else if constexpr (std::is_same_v<F, prior::InverseGamma>) return "inverse-gamma";
        else if constexpr (std::is_same_v<F, prior::Gamma>) return "gamma";
        else if constexpr (std::is_same_v<F, prior::LogNormal>) return "log-normal";
        else return "uniform";
      },
      family);
}

PriorSpec::PriorSpec(ParameterSpace space, const std::map<std::string, PriorFamily>& families)
    : space_(std::move(space)) {
  for (const auto& [name, fam] : families) {
    if (!space_.has_block(name)) throw DomainError("prior given for unknown block '" + name + "'");
  }
  families_.reserve(space_.blocks().size());
  for (const auto& b : space_.blocks()) {
    auto it = families.find(b.name);
    if (it == families.end()) throw DomainError("no prior given for block '" + b.name + "'");
    validate_family(it->second, b);
    families_.push_back(it->second);
  }
}

const PriorFamily& PriorSpec::family(const std::string& block) const {
  const auto& blocks = space_.blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].name == block) return families_[i];
  }
  throw DomainError("no parameter block named '" + block + "'");
}

double family_log_density(const PriorFamily& family, const Support& support, double x) {
  if (std::isnan(x) || !support.contains(x)) return kNegInf;
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, prior::Normal>) {
          const double z2 = (x - f.mu) * (x - f.mu) / f.sigma2;
          return -0.5 * (kLogTwoPi + std::log(f.sigma2) + z2) - std::log(normal_mass(f, support));
        } else if constexpr (std::is_same_v<F, prior::HalfNormal>) {
          return std::log(2.0) - 0.5 * (kLogTwoPi + std::log(f.sigma2) + x * x / f.sigma2);
        } else if constexpr (std::is_same_v<F, prior::InverseGamma>) {
          return f.shape * std::log(f.scale) - std::lgamma(f.shape) -
                 (f.shape + 1.0) * std::log(x) - f.scale / x;
        } else if constexpr (std::is_same_v<F, prior::Gamma>) {
          return f.shape * std::log(f.rate) - std::lgamma(f.shape) +
                 (f.shape - 1.0) * std::log(x) - f.rate * x;
        } else if constexpr (std::is_same_v<F, prior::LogNormal>) {
          const double lx = std::log(x);
          return -lx - 0.5 * (kLogTwoPi + std::log(f.sigma2) + (lx - f.mu) * (lx - f.mu) / f.sigma2);
        } else {
          if (!(x > f.lo && x < f.hi)) return kNegInf;
          return -std::log(f.hi - f.lo);
        }
      },
      family);
}

double prior_log_density(const PriorSpec& prior, const VectorXd& theta) {
  const ParameterSpace& space = prior.space();
  space.require_dim(theta, "prior_log_density");
  double total = 0.0;
  Index i = 0;
  const auto& blocks = space.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (Index j = 0; j < blocks[b].dim; ++j, ++i) {
      const double lp = family_log_density(prior.families()[b], blocks[b].support, theta[i]);
      if (lp == kNegInf) return kNegInf;
      total += lp;
    }
  }
  return total;
}

ParameterSpace sampling_space(const PriorSpec& prior) {
  std::vector<ParameterBlock> blocks = prior.space().blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (const auto* u = std::get_if<prior::Uniform>(&prior.families()[b])) {
      blocks[b].support = Support::interval(u->lo, u->hi);
    }
  }
  return ParameterSpace(std::move(blocks));
}

VectorXd prior_mean(const PriorSpec& prior) {
  const ParameterSpace narrowed = sampling_space(prior);
  VectorXd mean(narrowed.dim());
  Index i = 0;
  const auto& blocks = narrowed.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Support& s = blocks[b].support;
    const double m = std::visit(
        [&](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, prior::Normal>) {
            const double sd = std::sqrt(f.sigma2);
            if (s.kind == Support::Kind::Real) return f.mu;
            const double alpha = s.kind == Support::Kind::Positive ? -f.mu / sd : (s.lo - f.mu) / sd;
            const double pdf_hi = s.kind == Support::Kind::Interval ? normal_pdf((s.hi - f.mu) / sd) : 0.0;
            return f.mu + sd * (normal_pdf(alpha) - pdf_hi) / normal_mass(f, s);
          } else if constexpr (std::is_same_v<F, prior::HalfNormal>) {
            return std::sqrt(f.sigma2 * 2.0 / std::numbers::pi);
          } else if constexpr (std::is_same_v<F, prior::InverseGamma>) {
            return f.shape > 1.0 ? f.scale / (f.shape - 1.0) : f.scale / (f.shape + 1.0);
          } else if constexpr (std::is_same_v<F, prior::Gamma>) {
            return f.shape / f.rate;
          } else if constexpr (std::is_same_v<F, prior::LogNormal>) {
            const double m = std::exp(f.mu + 0.5 * f.sigma2);
            return std::isfinite(m) ? m : std::exp(f.mu);
          } else {
            return 0.5 * (f.lo + f.hi);
          }
        },
        prior.families()[b]);
    for (Index j = 0; j < blocks[b].dim; ++j, ++i) {
      double v = m;
      if (!s.contains(v)) {
        // Truncated means can land on a boundary numerically; step back inside.
        if (s.kind == Support::Kind::Positive) v = std::max(v, std::numeric_limits<double>::min());
        if (s.kind == Support::Kind::Interval) v = 0.5 * (s.lo + s.hi);
      }
      mean[i] = v;
    }
  }
  return mean;
}

VectorXd to_unconstrained(const ParameterSpace& space, const VectorXd& theta) {
  space.require_dim(theta, "to_unconstrained");
  VectorXd eta(theta.size());
  Index i = 0;
  for (const auto& b : space.blocks()) {
    for (Index j = 0; j < b.dim; ++j, ++i) {
      const double x = theta[i];
      if (!b.support.contains(x)) {
        std::ostringstream msg;
        msg << "value " << x << " of '" << b.name << "' outside support " << b.support.describe();
        throw SupportError(msg.str());
      }
      switch (b.support.kind) {
        case Support::Kind::Real: eta[i] = x; break;
        case Support::Kind::Positive: eta[i] = std::log(x); break;
        case Support::Kind::Interval:
          eta[i] = std::log(x - b.support.lo) - std::log(b.support.hi - x);
          break;
      }
    }
  }
  return eta;
}

ConstrainedPoint from_unconstrained(const ParameterSpace& space, const VectorXd& eta) {
  space.require_dim(eta, "from_unconstrained");
  ConstrainedPoint out{VectorXd(eta.size()), 0.0};
  Index i = 0;
  for (const auto& b : space.blocks()) {
    for (Index j = 0; j < b.dim; ++j, ++i) {
      const double e = eta[i];
      switch (b.support.kind) {
        case Support::Kind::Real: out.theta[i] = e; break;
        case Support::Kind::Positive:
          out.theta[i] = std::exp(e);
          out.log_jacobian += e;
          break;
        case Support::Kind::Interval: {
          const double width = b.support.hi - b.support.lo;
          out.theta[i] = b.support.lo + width * logistic(e);
          out.log_jacobian += std::log(width) - softplus(-e) - softplus(e);
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace dcbats
