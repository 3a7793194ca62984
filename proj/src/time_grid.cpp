#include "survscore/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "survscore/dataset.hpp"

namespace survscore {

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("quantile: q must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::min(std::max<std::size_t>(rank, 1), values.size());
  return values[rank - 1];
}

TimeGrid make_grid(double tau_star, int intervals) {
  if (!(tau_star > 0.0)) throw std::invalid_argument("grid: tau_star must be > 0");
  if (intervals < 1) throw std::invalid_argument("grid: need at least one interval");
  TimeGrid g;
  g.cut_points.resize(static_cast<std::size_t>(intervals) + 1);
  for (int j = 0; j <= intervals; ++j) {
    g.cut_points[static_cast<std::size_t>(j)] = tau_star * j / intervals;
  }
  g.cut_points.back() = tau_star;  // exact endpoint
  return g;
}

TimeGrid make_grid(const SurvivalDataset& data, int intervals, double cutoff_quantile) {
  return make_grid(nearest_rank_quantile(data.observed_times(), cutoff_quantile), intervals);
}

}  // namespace survscore
