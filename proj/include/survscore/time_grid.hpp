#pragma once

#include <vector>

namespace survscore {

class SurvivalDataset;

// Equidistant evaluation grid 0 = tau_0 < tau_1 < ... < tau_J = tau_star.
// Scores integrate over the J interior/terminal points tau_1..tau_J.
struct TimeGrid {
  std::vector<double> cut_points;

  int intervals() const { return static_cast<int>(cut_points.size()) - 1; }
  double tau_star() const { return cut_points.back(); }
  double spacing() const { return cut_points[1] - cut_points[0]; }

  // tau_j for j in [0, J]
  double operator[](int j) const { return cut_points[j]; }
};

TimeGrid make_grid(double tau_star, int intervals);

// tau_star = nearest-rank cutoff_quantile of the observed times.
TimeGrid make_grid(const SurvivalDataset& data, int intervals, double cutoff_quantile = 0.9);

// Nearest-rank (inverted-cdf) sample quantile: the ceil(q*n)-th order
// statistic, q in (0, 1].
double nearest_rank_quantile(std::vector<double> values, double q);

}  // namespace survscore
