#pragma once

#include <vector>

#include "survscore/dataset.hpp"
#include "survscore/step_function.hpp"

namespace survscore {

enum class KmTarget { event, censoring };

// Product-limit estimator. With target = censoring the roles are flipped
// (reverse Kaplan-Meier, G-hat); ties resolve events-before-censorings, so a
// censoring at t competes against the risk set with same-time events removed.
StepFunction kaplan_meier(const SurvivalDataset& data, KmTarget target = KmTarget::event);

// IPCW denominator: max(G(t-), floor). Left limit, so a subject censored at t
// still carries positive mass.
double censoring_weight(const StepFunction& censoring_survival, double t, double floor = 1e-3);

// Aalen-Johansen cumulative incidence, one nondecreasing step function per
// cause (pre_value 0). K = 1 reduces to 1 - KM exactly.
std::vector<StepFunction> aalen_johansen(const SurvivalDataset& data);

}  // namespace survscore
