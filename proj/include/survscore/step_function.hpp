#pragma once

#include <vector>

namespace survscore {

// Right-continuous piecewise-constant function on [0, inf). The value at t is
// the value attached to the largest knot <= t, and pre_value before the first
// knot. Knots must be strictly increasing.
struct StepFunction {
  std::vector<double> knots;
  std::vector<double> values;
  double pre_value = 1.0;

  static StepFunction make(std::vector<double> knots, std::vector<double> values,
                           double pre_value);

  double operator()(double t) const;

  // Left limit: value attached to the largest knot strictly below t.
  double left_limit(double t) const;

  bool empty() const { return knots.empty(); }
};

}  // namespace survscore
