#include "dcbats/combine.hpp"

#include <sstream>

namespace dcbats {

Index quantile_rank(Index size, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    std::ostringstream msg;
    msg << "quantile level " << u << " outside (0, 1)";
    throw DomainError(msg.str());
  }
  if (size < 1) throw EmptyInputError("quantile of an empty sample");
  const double scaled = u * static_cast<double>(size);
  const auto rank = static_cast<Index>(std::ceil(scaled - 1e-9));
  return std::clamp<Index>(rank, 1, size);
}

VectorXd midpoint_grid(Index size) {
  VectorXd u(size);
  for (Index i = 0; i < size; ++i) u[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(size);
  return u;
}

BarycenterResult barycenter_1d(const std::vector<VectorXd>& sets, SizePolicy policy) {
  if (sets.empty()) throw EmptyInputError("barycenter of zero sample sets");
  Index s_max = 0;
  bool equal = true;
  for (const auto& set : sets) {
    if (set.size() == 0) throw EmptyInputError("barycenter input contains an empty sample set");
    if (set.size() != sets.front().size()) equal = false;
    s_max = std::max(s_max, set.size());
  }
  if (!equal && policy == SizePolicy::Strict) {
    throw LengthMismatchError("barycenter inputs differ in size");
  }
  const double inv_k = 1.0 / static_cast<double>(sets.size());
  BarycenterResult out;
  out.u_grid = midpoint_grid(s_max);
  out.q_bar = VectorXd::Zero(s_max);
  for (const auto& set : sets) {
    const VectorXd s = sorted(set);
    if (equal) {
      out.q_bar += s;
    } else {
      for (Index i = 0; i < s_max; ++i) out.q_bar[i] += quantile_of_sorted(s, out.u_grid[i]);
    }
  }
  out.q_bar *= inv_k;
  out.pseudo_draws = out.q_bar;
  return out;
}

VectorXd functional_draws(const DrawSet& draws, const LinearFunctional& f) {
  if (f.a.size() != draws.dim()) {
    std::ostringstream msg;
    msg << "functional has dimension " << f.a.size() << ", draws have " << draws.dim();
    throw DimensionError(msg.str());
  }
  return (draws.draws * f.a).array() + f.b;
}

double coverage_rate(const std::vector<Interval>& intervals, const VectorXd& truths) {
  if (static_cast<Index>(intervals.size()) != truths.size()) {
    throw LengthMismatchError("coverage_rate: interval and truth counts differ");
  }
  Index covered = 0;
  Index counted = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const double t = truths[static_cast<Index>(i)];
    if (std::isnan(t)) continue;
    ++counted;
    covered += intervals[i].contains(t) ? 1 : 0;
  }
  if (counted == 0) throw EmptyInputError("coverage_rate: no intervals with known truth");
  return static_cast<double>(covered) / static_cast<double>(counted);
}

MarginalCombination combine_marginals(const std::vector<DrawSet>& sets, double level,
                                      SizePolicy policy) {
  if (sets.empty()) throw EmptyInputError("combine_marginals of zero draw sets");
  const DrawSet& first = sets.front();
  for (const auto& s : sets) {
    if (s.dim() != first.dim() || s.names != first.names) {
      throw SpaceMismatchError("draw sets do not share one parameter space");
    }
  }
  MarginalCombination out;
  out.names = first.names;
  const Index d = first.dim();
  for (Index j = 0; j < d; ++j) {
    const LinearFunctional f = LinearFunctional::coordinate(d, j);
    std::vector<VectorXd> columns;
    columns.reserve(sets.size());
    for (const auto& s : sets) columns.push_back(s.draws.col(j));
    BarycenterResult bary = barycenter_1d(columns, policy);
    bary.functional = f;
    out.intervals.push_back(credible_interval(bary.pseudo_draws, level));
    out.barycenters.push_back(std::move(bary));
  }
  return out;
}

DrawSet barycenter_drawset(const MarginalCombination& combined) {
  if (combined.barycenters.empty()) throw EmptyInputError("empty combination");
  DrawSet out;
  const Index s = combined.barycenters.front().pseudo_draws.size();
  out.draws.resize(s, static_cast<Index>(combined.barycenters.size()));
  for (std::size_t j = 0; j < combined.barycenters.size(); ++j) {
    out.draws.col(static_cast<Index>(j)) = combined.barycenters[j].pseudo_draws;
  }
  out.names = combined.names;
  out.target_label = "barycenter";
  return out;
}

}  // namespace dcbats
