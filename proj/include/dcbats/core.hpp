#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcbats/error.hpp"

namespace dcbats {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Observations (T x obs_dim) with optional covariates aligned by row.
///
/// Immutable once built; the constructor enforces T >= 1 and matching
/// covariate row counts.
class TimeSeries {
 public:
  explicit TimeSeries(MatrixXd obs, std::optional<MatrixXd> covariates = std::nullopt,
                      std::vector<std::string> obs_labels = {},
                      std::vector<std::string> covariate_labels = {});

  Index length() const { return obs_.rows(); }
  Index obs_dim() const { return obs_.cols(); }
  Index cov_dim() const { return covariates_ ? covariates_->cols() : 0; }
  bool has_covariates() const { return covariates_.has_value(); }

  const MatrixXd& obs() const { return obs_; }
  /// Throws CovariateError when the series carries no covariates.
  const MatrixXd& covariates() const;
  const std::vector<std::string>& obs_labels() const { return obs_labels_; }
  const std::vector<std::string>& covariate_labels() const { return covariate_labels_; }

  /// Rows [first, first + count), zero-based, covariates carried along.
  TimeSeries rows(Index first, Index count) const;

  bool operator==(const TimeSeries& other) const;

 private:
  MatrixXd obs_;
  std::optional<MatrixXd> covariates_;
  std::vector<std::string> obs_labels_;
  std::vector<std::string> covariate_labels_;
};

/// Half-open zero-based row range.
struct IndexRange {
  Index begin = 0;
  Index end = 0;
  Index size() const { return end - begin; }
  bool operator==(const IndexRange&) const = default;
};

/// K contiguous segments of equal length m covering 1..T.
struct Partition {
  Index T = 0;
  Index K = 0;
  Index m = 0;
  std::vector<IndexRange> ranges;
};

/// Splits 1..T into K equal contiguous ranges. Unequal splits are rejected.
Partition make_partition(Index T, Index K);

/// Segment k (1-based) of the series.
TimeSeries extract_segment(const TimeSeries& series, const Partition& partition, Index k);

/// Row-wise concatenation; all parts must agree on dimensions.
TimeSeries concatenate(const std::vector<TimeSeries>& parts);

struct Support {
  enum class Kind { Real, Positive, Interval };
  Kind kind = Kind::Real;
  double lo = 0.0;
  double hi = 0.0;

  static Support real() { return {Kind::Real, 0.0, 0.0}; }
  static Support positive() { return {Kind::Positive, 0.0, 0.0}; }
  static Support interval(double lo, double hi);

  /// Open-set membership; boundary values are outside.
  bool contains(double x) const;
  std::string describe() const;
  bool operator==(const Support&) const = default;
};

struct ParameterBlock {
  std::string name;
  Index dim = 1;
  Support support;
  bool operator==(const ParameterBlock&) const = default;
};

/// Ordered named blocks; a point is a flat vector of length dim().
class ParameterSpace {
 public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<ParameterBlock> blocks);

  Index dim() const { return dim_; }
  const std::vector<ParameterBlock>& blocks() const { return blocks_; }
  /// Offset of the named block in the flat vector; throws DomainError if absent.
  Index offset(const std::string& name) const;
  const ParameterBlock& block(const std::string& name) const;
  bool has_block(const std::string& name) const;

  /// Flattened coordinate names: "sigma2" for scalar blocks, "beta[1]".. otherwise.
  std::vector<std::string> coordinate_names() const;
  /// Support of each flat coordinate.
  std::vector<Support> coordinate_supports() const;

  bool contains(const VectorXd& theta) const;
  void require_dim(const VectorXd& theta, const char* what) const;

  bool operator==(const ParameterSpace& other) const { return blocks_ == other.blocks_; }

 private:
  std::vector<ParameterBlock> blocks_;
  Index dim_ = 0;
};

/// Post-burn-in draws in constrained space, one row per draw.
struct DrawSet {
  MatrixXd draws;
  std::vector<std::string> names;
  Index burn_in = 0;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  std::string target_label;

  Index size() const { return draws.rows(); }
  Index dim() const { return draws.cols(); }
  bool operator==(const DrawSet& other) const;
};

/// xi = a^T theta + b.
struct LinearFunctional {
  VectorXd a;
  double b = 0.0;

  LinearFunctional(VectorXd a, double b = 0.0);
  /// Projection on coordinate j (zero-based).
  static LinearFunctional coordinate(Index d, Index j);
};

}  // namespace dcbats
