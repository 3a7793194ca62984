#include "survscore/step_function.hpp"

#include <algorithm>
#include <stdexcept>

namespace survscore {

StepFunction StepFunction::make(std::vector<double> knots, std::vector<double> values,
                                double pre_value) {
  if (knots.size() != values.size()) {
    throw std::invalid_argument("step function: knots and values differ in length");
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1])) {
      throw std::invalid_argument("step function: knots must be strictly increasing");
    }
  }
  StepFunction f;
  f.knots = std::move(knots);
  f.values = std::move(values);
  f.pre_value = pre_value;
  return f;
}

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return pre_value;
  return values[static_cast<std::size_t>(it - knots.begin()) - 1];
}

double StepFunction::left_limit(double t) const {
  auto it = std::lower_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return pre_value;
  return values[static_cast<std::size_t>(it - knots.begin()) - 1];
}

}  // namespace survscore
