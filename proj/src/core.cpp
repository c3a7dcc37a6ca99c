#include "dcbats/core.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace dcbats {

TimeSeries::TimeSeries(MatrixXd obs, std::optional<MatrixXd> covariates,
                       std::vector<std::string> obs_labels,
                       std::vector<std::string> covariate_labels)
    : obs_(std::move(obs)),
      covariates_(std::move(covariates)),
      obs_labels_(std::move(obs_labels)),
      covariate_labels_(std::move(covariate_labels)) {
  if (obs_.rows() < 1 || obs_.cols() < 1) {
    throw DomainError("time series needs at least one row and one column");
  }
  if (covariates_ && covariates_->rows() != obs_.rows()) {
    std::ostringstream msg;
    msg << "covariate rows (" << covariates_->rows() << ") differ from observation rows ("
        << obs_.rows() << ")";
    throw CovariateError(msg.str());
  }
  if (!obs_labels_.empty() && static_cast<Index>(obs_labels_.size()) != obs_.cols()) {
    throw DimensionError("observation label count differs from obs_dim");
  }
  if (!covariate_labels_.empty() &&
      (!covariates_ || static_cast<Index>(covariate_labels_.size()) != covariates_->cols())) {
    throw DimensionError("covariate label count differs from cov_dim");
  }
}

const MatrixXd& TimeSeries::covariates() const {
  if (!covariates_) throw CovariateError("series has no covariates");
  return *covariates_;
}

TimeSeries TimeSeries::rows(Index first, Index count) const {
  if (first < 0 || count < 1 || first + count > length()) {
    throw IndexError("row range out of bounds");
  }
  std::optional<MatrixXd> cov;
  if (covariates_) cov = covariates_->middleRows(first, count);
  return TimeSeries(obs_.middleRows(first, count), std::move(cov), obs_labels_,
                    covariate_labels_);
}

bool TimeSeries::operator==(const TimeSeries& other) const {
  if (obs_.rows() != other.obs_.rows() || obs_.cols() != other.obs_.cols()) return false;
  if (obs_ != other.obs_) return false;
  if (covariates_.has_value() != other.covariates_.has_value()) return false;
  if (covariates_) {
    if (covariates_->cols() != other.covariates_->cols()) return false;
    if (*covariates_ != *other.covariates_) return false;
  }
  return obs_labels_ == other.obs_labels_ && covariate_labels_ == other.covariate_labels_;
}

Partition make_partition(Index T, Index K) {
  if (K < 1) throw DomainError("number of subsequences K must be at least 1");
  if (T < 1) throw DomainError("series length T must be at least 1");
  if (K > T) {
    std::ostringstream msg;
    msg << "K=" << K << " exceeds T=" << T;
    throw DomainError(msg.str());
  }
  if (T % K != 0) {
    std::ostringstream msg;
    msg << "K=" << K << " does not divide T=" << T;
    throw DivisibilityError(msg.str());
  }
  Partition p{T, K, T / K, {}};
  p.ranges.reserve(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) p.ranges.push_back({k * p.m, (k + 1) * p.m});
  return p;
}

TimeSeries extract_segment(const TimeSeries& series, const Partition& partition, Index k) {
  if (k < 1 || k > partition.K) {
    std::ostringstream msg;
    msg << "segment index " << k << " outside 1.." << partition.K;
    throw IndexError(msg.str());
  }
  if (series.length() != partition.T) {
    throw DimensionError("partition length differs from series length");
  }
  const IndexRange& r = partition.ranges[static_cast<std::size_t>(k - 1)];
  return series.rows(r.begin, r.size());
}

TimeSeries concatenate(const std::vector<TimeSeries>& parts) {
  if (parts.empty()) throw EmptyInputError("nothing to concatenate");
  Index total = 0;
  for (const auto& p : parts) {
    if (p.obs_dim() != parts.front().obs_dim() || p.cov_dim() != parts.front().cov_dim() ||
        p.has_covariates() != parts.front().has_covariates()) {
      throw DimensionError("series parts disagree on dimensions");
    }
    total += p.length();
  }
  MatrixXd obs(total, parts.front().obs_dim());
  std::optional<MatrixXd> cov;
  if (parts.front().has_covariates()) cov = MatrixXd(total, parts.front().cov_dim());
  Index row = 0;
  for (const auto& p : parts) {
    obs.middleRows(row, p.length()) = p.obs();
    if (cov) cov->middleRows(row, p.length()) = p.covariates();
    row += p.length();
  }
  return TimeSeries(std::move(obs), std::move(cov), parts.front().obs_labels(),
                    parts.front().covariate_labels());
}

Support Support::interval(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("interval support needs finite lo < hi");
  }
  return {Kind::Interval, lo, hi};
}

bool Support::contains(double x) const {
  switch (kind) {
    case Kind::Real: return std::isfinite(x);
    case Kind::Positive: return std::isfinite(x) && x > 0.0;
    case Kind::Interval: return x > lo && x < hi;
  }
  return false;
}

std::string Support::describe() const {
  switch (kind) {
    case Kind::Real: return "real";
    case Kind::Positive: return "positive";
    case Kind::Interval: {
      std::ostringstream s;
      s << "interval(" << lo << "," << hi << ")";
      return s.str();
    }
  }
  return "?";
}

ParameterSpace::ParameterSpace(std::vector<ParameterBlock> blocks) : blocks_(std::move(blocks)) {
  std::set<std::string> seen;
  for (const auto& b : blocks_) {
    if (b.dim < 1) throw DimensionError("parameter block '" + b.name + "' has dimension < 1");
    if (!seen.insert(b.name).second) {
      throw DomainError("duplicate parameter block name '" + b.name + "'");
    }
    dim_ += b.dim;
  }
}

Index ParameterSpace::offset(const std::string& name) const {
  Index off = 0;
  for (const auto& b : blocks_) {
    if (b.name == name) return off;
    off += b.dim;
  }
  throw DomainError("no parameter block named '" + name + "'");
}

const ParameterBlock& ParameterSpace::block(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw DomainError("no parameter block named '" + name + "'");
}

bool ParameterSpace::has_block(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return true;
  }
  return false;
}

std::vector<std::string> ParameterSpace::coordinate_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(dim_));
  for (const auto& b : blocks_) {
    if (b.dim == 1) {
      names.push_back(b.name);
      continue;
    }
    for (Index i = 1; i <= b.dim; ++i) names.push_back(b.name + "[" + std::to_string(i) + "]");
  }
  return names;
}

std::vector<Support> ParameterSpace::coordinate_supports() const {
  std::vector<Support> out;
  out.reserve(static_cast<std::size_t>(dim_));
  for (const auto& b : blocks_) {
    for (Index i = 0; i < b.dim; ++i) out.push_back(b.support);
  }
  return out;
}

void ParameterSpace::require_dim(const VectorXd& theta, const char* what) const {
  if (theta.size() != dim_) {
    std::ostringstream msg;
    msg << what << ": expected dimension " << dim_ << ", got " << theta.size();
    throw DimensionError(msg.str());
  }
}

bool ParameterSpace::contains(const VectorXd& theta) const {
  if (theta.size() != dim_) return false;
  Index i = 0;
  for (const auto& b : blocks_) {
    for (Index j = 0; j < b.dim; ++j, ++i) {
      if (!b.support.contains(theta[i])) return false;
    }
  }
  return true;
}

bool DrawSet::operator==(const DrawSet& other) const {
  return draws.rows() == other.draws.rows() && draws.cols() == other.draws.cols() &&
         draws == other.draws && names == other.names && burn_in == other.burn_in &&
         acceptance_rate == other.acceptance_rate && seed == other.seed &&
         target_label == other.target_label;
}

LinearFunctional::LinearFunctional(VectorXd a_, double b_) : a(std::move(a_)), b(b_) {
  if (a.size() == 0 || (a.array() == 0.0).all()) {
    throw DomainError("linear functional needs a nonzero coefficient vector");
  }
}

LinearFunctional LinearFunctional::coordinate(Index d, Index j) {
  if (j < 0 || j >= d) throw IndexError("coordinate index out of range");
  return LinearFunctional(VectorXd::Unit(d, j), 0.0);
}

}  // namespace dcbats
