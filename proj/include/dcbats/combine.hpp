#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dcbats/core.hpp"

namespace dcbats {

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// What to do when sample sets differ in size.
enum class SizePolicy {
  Strict,        // throw LengthMismatchError
  QuantileGrid,  // evaluate each quantile function on u_i = (i - 1/2) / S_max
};

/// Sorted copy of a sample vector.
template <class Derived>
Vector<typename Derived::Scalar> sorted(const Eigen::DenseBase<Derived>& samples) {
  Vector<typename Derived::Scalar> out = samples;
  std::sort(out.data(), out.data() + out.size());
  return out;
}

/// One-based index i of the smallest order statistic with i / S >= u.
///
/// Levels within 1e-9 of an index boundary snap to that boundary, so that
/// e.g. u = (1 - 0.95) / 2 on 1000 samples selects the 25th order statistic.
Index quantile_rank(Index size, double u);

/// Generalized inverse of the empirical CDF on already-sorted samples.
template <class Derived>
typename Derived::Scalar quantile_of_sorted(const Eigen::DenseBase<Derived>& sorted_samples, double u) {
  return sorted_samples[quantile_rank(sorted_samples.size(), u) - 1];
}

/// inf{x : u <= F_S(x)} for the empirical CDF F_S; no interpolation.
template <class Derived>
typename Derived::Scalar empirical_quantile(const Eigen::DenseBase<Derived>& samples, double u) {
  if (samples.size() == 0) throw EmptyInputError("empirical_quantile of an empty sample");
  return quantile_of_sorted(sorted(samples), u);
}

/// Midpoint grid (i - 1/2) / S, i = 1..S.
VectorXd midpoint_grid(Index size);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Equal-tailed interval from the (1 - level) / 2 and (1 + level) / 2 empirical quantiles.
template <class Derived>
Interval credible_interval(const Eigen::DenseBase<Derived>& samples, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("credible level must lie in (0, 1)");
  if (samples.size() == 0) throw EmptyInputError("credible interval of an empty sample");
  const auto s = sorted(samples);
  return {static_cast<double>(quantile_of_sorted(s, (1.0 - level) / 2.0)),
          static_cast<double>(quantile_of_sorted(s, (1.0 + level) / 2.0))};
}

/// Exact W2 between two equal-size empirical measures: RMS gap of sorted samples.
/// With SizePolicy::QuantileGrid unequal sizes are compared on the midpoint grid.
template <class DerivedA, class DerivedB>
double w2_distance_1d(const Eigen::DenseBase<DerivedA>& a, const Eigen::DenseBase<DerivedB>& b,
                      SizePolicy policy = SizePolicy::Strict) {
  if (a.size() == 0 || b.size() == 0) throw EmptyInputError("w2_distance_1d of an empty sample");
  const auto sa = sorted(a);
  const auto sb = sorted(b);
  if (sa.size() == sb.size()) {
    return std::sqrt((sa - sb).squaredNorm() / static_cast<double>(sa.size()));
  }
  if (policy == SizePolicy::Strict) throw LengthMismatchError("w2_distance_1d: sample sizes differ");
  const Index s = std::max(sa.size(), sb.size());
  const VectorXd grid = midpoint_grid(s);
  double acc = 0.0;
  for (Index i = 0; i < s; ++i) {
    const double gap = quantile_of_sorted(sa, grid[i]) - quantile_of_sorted(sb, grid[i]);
    acc += gap * gap;
  }
  return std::sqrt(acc / static_cast<double>(s));
}

/// Averaged quantile function of K one-dimensional sample sets.
///
/// pseudo_draws[i] is the mean over sets of their i-th order statistic, which
/// is q_bar at u = (i - 1/2) / S; u_grid holds those midpoints.
struct BarycenterResult {
  VectorXd u_grid;
  VectorXd q_bar;
  VectorXd pseudo_draws;
  std::optional<LinearFunctional> functional;
};

BarycenterResult barycenter_1d(const std::vector<VectorXd>& sets,
                               SizePolicy policy = SizePolicy::Strict);

/// a^T theta_s + b for every draw.
VectorXd functional_draws(const DrawSet& draws, const LinearFunctional& f);

/// Fraction of intervals containing their truth. NaN truths are skipped.
double coverage_rate(const std::vector<Interval>& intervals, const VectorXd& truths);

struct MarginalCombination {
  std::vector<std::string> names;
  std::vector<BarycenterResult> barycenters;  // one per coordinate
  std::vector<Interval> intervals;            // credible_interval of each barycenter
};

/// Coordinatewise barycenter of K draw sets over the same parameter space.
MarginalCombination combine_marginals(const std::vector<DrawSet>& sets, double level,
                                      SizePolicy policy = SizePolicy::Strict);

/// Pseudo-draws of every coordinate as a DrawSet labelled "barycenter".
DrawSet barycenter_drawset(const MarginalCombination& combined);

}  // namespace dcbats
