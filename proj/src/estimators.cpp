#include "survscore/estimators.hpp"

#include <algorithm>
#include <stdexcept>

namespace survscore {

namespace {

struct TimePoint {
  double time;
  int n_event = 0;      // all-cause events at this time
  int n_censored = 0;
  std::vector<int> cause_events;  // per cause, sized lazily
};

std::vector<TimePoint> group_by_time(const SurvivalDataset& data) {
  std::vector<std::pair<double, const SurvivalRecord*>> rows;
  rows.reserve(static_cast<std::size_t>(data.n()));
  for (const auto& r : data.records()) rows.push_back({r.time, &r});
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<TimePoint> points;
  for (const auto& [t, r] : rows) {
    if (points.empty() || points.back().time != t) {
      points.push_back({t, 0, 0, std::vector<int>(static_cast<std::size_t>(data.num_causes()), 0)});
    }
    auto& pt = points.back();
    if (r->status == 1) {
      ++pt.n_event;
      ++pt.cause_events[static_cast<std::size_t>(r->cause - 1)];
    } else {
      ++pt.n_censored;
    }
  }
  return points;
}

}  // namespace

StepFunction kaplan_meier(const SurvivalDataset& data, KmTarget target) {
  const auto points = group_by_time(data);
  int at_risk = data.n();
  double s = 1.0;
  std::vector<double> knots, values;
  for (const auto& pt : points) {
    if (target == KmTarget::event) {
      if (pt.n_event > 0) {
        s *= 1.0 - static_cast<double>(pt.n_event) / at_risk;
        knots.push_back(pt.time);
        values.push_back(s);
      }
    } else {
      // Events precede censorings at tied times, so they leave the censoring
      // risk set before the censoring "event" is evaluated.
      const int risk = at_risk - pt.n_event;
      if (pt.n_censored > 0 && risk > 0) {
        s *= 1.0 - static_cast<double>(pt.n_censored) / risk;
        knots.push_back(pt.time);
        values.push_back(s);
      }
    }
    at_risk -= pt.n_event + pt.n_censored;
  }
  return StepFunction::make(std::move(knots), std::move(values), 1.0);
}

double censoring_weight(const StepFunction& censoring_survival, double t, double floor) {
  if (!(floor > 0.0)) throw std::invalid_argument("censoring_weight: floor must be > 0");
  return std::max(censoring_survival.left_limit(t), floor);
}

std::vector<StepFunction> aalen_johansen(const SurvivalDataset& data) {
  const int k = data.num_causes();
  if (k == 1) {
    // Exact complement of the product-limit curve.
    StepFunction km = kaplan_meier(data, KmTarget::event);
    StepFunction cif;
    cif.knots = km.knots;
    cif.pre_value = 0.0;
    cif.values.reserve(km.values.size());
    for (double s : km.values) cif.values.push_back(1.0 - s);
    return {cif};
  }

  const auto points = group_by_time(data);
  int at_risk = data.n();
  double overall_survival = 1.0;
  std::vector<double> cif(static_cast<std::size_t>(k), 0.0);
  std::vector<double> knots;
  std::vector<std::vector<double>> values(static_cast<std::size_t>(k));
  for (const auto& pt : points) {
    if (pt.n_event > 0) {
      for (int c = 0; c < k; ++c) {
        cif[static_cast<std::size_t>(c)] +=
            overall_survival * pt.cause_events[static_cast<std::size_t>(c)] / at_risk;
      }
      overall_survival *= 1.0 - static_cast<double>(pt.n_event) / at_risk;
      knots.push_back(pt.time);
      for (int c = 0; c < k; ++c) {
        values[static_cast<std::size_t>(c)].push_back(cif[static_cast<std::size_t>(c)]);
      }
    }
    at_risk -= pt.n_event + pt.n_censored;
  }

  std::vector<StepFunction> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    out.push_back(StepFunction::make(knots, values[static_cast<std::size_t>(c)], 0.0));
  }
  return out;
}

}  // namespace survscore
