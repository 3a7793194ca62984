#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "survscore/distributions.hpp"
#include "survscore/models.hpp"
#include "survscore/tape.hpp"
#include "survscore/time_grid.hpp"

// Tape-side curve adapters shared by the scoring-rule fit builders. They
// satisfy the Curve requirements of score_record for T = ad::Var.

namespace survscore::detail {

inline constexpr double kCurveInf = std::numeric_limits<double>::infinity();

// Distribution quantity as a tape node with analytic partials, so the error
// laws never need tape primitives. Probability floors inside eval_with_grad
// report to the clamp signature.
inline ad::Var dist_node(ad::Tape& tape, const DistributionSpec& spec, ad::Var mu, ad::Var s,
                         double t, DistQuantity q) {
  const ParamVector theta{tape.value(mu), tape.value(s)};
  const DistEval e = eval_with_grad(spec, theta, t, q);
  tape.note_clamp(e.clamped);
  return tape.custom_binary(mu, s, e.value, e.d_location, e.d_log_scale);
}

struct ParametricVarCurve {
  ad::Tape* tape;
  const DistributionSpec* spec;
  ad::Var mu, s;
  const TimeGrid* grid;

  ad::Var lift(double c) const { return tape->constant(c); }
  ad::Var F(int j) const { return at((*grid)[j], DistQuantity::cdf); }
  ad::Var S(int j) const { return at((*grid)[j], DistQuantity::sf); }
  ad::Var log_F(int j) const { return at((*grid)[j], DistQuantity::log_cdf); }
  ad::Var log_S(int j) const { return at((*grid)[j], DistQuantity::log_sf); }
  ad::Var log_density(double t) const {
    return ad::clamp(at(t, DistQuantity::log_pdf), kLogProbFloor, kCurveInf);
  }
  ad::Var log_survival_at(double t) const { return at(t, DistQuantity::log_sf); }

  ad::Var at(double t, DistQuantity q) const { return dist_node(*tape, *spec, mu, s, t, q); }
};

// Curve over grid-sampled survival Vars (increment, cox_sr, competing risks):
// S_0 = 1 is implicit, surv holds S_1..S_J.
struct GridVarCurve {
  ad::Tape* tape;
  const TimeGrid* grid;
  Interp interp = Interp::linear;
  std::vector<ad::Var> surv;

  ad::Var lift(double c) const { return tape->constant(c); }
  ad::Var S(int j) const { return surv[static_cast<std::size_t>(j - 1)]; }
  ad::Var F(int j) const { return 1.0 - S(j); }
  ad::Var log_F(int j) const { return ad::log(ad::clamp(F(j), kProbFloor, kCurveInf)); }
  ad::Var log_S(int j) const { return ad::log(ad::clamp(S(j), kProbFloor, kCurveInf)); }

  int interval_index(double t) const {
    const auto& cuts = grid->cut_points;
    auto it = std::lower_bound(cuts.begin() + 1, cuts.end(), t);
    const int j = static_cast<int>(it - cuts.begin());
    return std::min(std::max(j, 1), grid->intervals());
  }

  ad::Var survival_value_at(double t) const {
    if (t <= 0.0) return lift(1.0);
    if (t >= grid->tau_star()) return S(grid->intervals());
    const int j = interval_index(t);
    const ad::Var prev = j >= 2 ? S(j - 1) : lift(1.0);
    if (interp == Interp::step) return t >= (*grid)[j] ? S(j) : prev;
    const double w = (t - (*grid)[j - 1]) / ((*grid)[j] - (*grid)[j - 1]);
    return prev + (S(j) - prev) * w;
  }

  ad::Var log_survival_at(double t) const {
    return ad::log(ad::clamp(survival_value_at(t), kProbFloor, kCurveInf));
  }

  ad::Var log_density(double t) const {
    const int j = interval_index(t);
    const ad::Var prev = j >= 2 ? S(j - 1) : lift(1.0);
    const ad::Var dens = (prev - S(j)) * (1.0 / ((*grid)[j] - (*grid)[j - 1]));
    return ad::log(ad::clamp(dens, kProbFloor, kCurveInf));
  }
};

}  // namespace survscore::detail
