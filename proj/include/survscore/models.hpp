#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "survscore/cox.hpp"
#include "survscore/dataset.hpp"
#include "survscore/distributions.hpp"
#include "survscore/estimators.hpp"
#include "survscore/mlp.hpp"
#include "survscore/optimizer.hpp"
#include "survscore/scoring.hpp"
#include "survscore/time_grid.hpp"

namespace survscore {

enum class Interp { step, linear };

Interp interp_from_string(std::string_view name);
std::string to_string(Interp interp);

// Increment squashing gamma_1 into [0, 1].
enum class Squash { logistic, trunc_relu };

Squash squash_from_string(std::string_view name);
std::string to_string(Squash squash);

// A survival curve sampled on a grid, optionally backed by exact closed
// forms. Interpolation applies between grid times, constant extrapolation
// beyond the last one.
struct SurvivalPrediction {
  std::vector<double> times;     // starts at 0
  std::vector<double> survival;  // S(times), survival[0] = 1
  Interp interp = Interp::linear;
  std::function<double(double)> exact_sf;
  std::function<double(double)> exact_cdf;
  std::function<double(double)> density_fn;

  double survival_at(double t) const;
  double cdf_at(double t) const;
  bool has_density() const { return static_cast<bool>(density_fn); }
  double density_at(double t) const;

  PredictionAccessor accessor() const;
};

// Piecewise-linear (or step) value of a grid-sampled curve; shared by the
// prediction types and the tape-side builders.
double interpolate_curve(std::span<const double> times, std::span<const double> values,
                         Interp interp, double t);

// ---- model families ----

// AFT with an MLP trunk mapping features to (mu, log sigma); constant_scale
// replaces the second output by one shared log_scale parameter. The working
// log-scale is clamped to [-10, 10] at both fit and predict time.
struct ParametricSurvivalModel {
  DistributionSpec spec;
  MlpSpec trunk;
  bool constant_scale = false;
  ParameterStore params;

  ParamVector theta_at(std::span<const double> x) const;
};

inline constexpr double kLogScaleBound = 10.0;

SurvivalPrediction predict_parametric(const ParametricSurvivalModel& model,
                                      std::span<const double> x, const TimeGrid& grid);

// Distribution-free monotone curve: trunk emits one raw increment per grid
// interval, gamma_1 squashes it into [0, 1], and the running sum is removed
// from 1 with a final clamp to [0, 1].
struct IncrementSurvivalModel {
  MlpSpec trunk;  // output_dim = grid.intervals()
  TimeGrid grid;
  Squash squash = Squash::logistic;
  Interp interp = Interp::linear;
  ParameterStore params;
};

SurvivalPrediction predict_increment(const IncrementSurvivalModel& model,
                                     std::span<const double> x);

// S_1..S_J from raw trunk outputs; identical arithmetic for double and Var.
template <typename T>
std::vector<T> increment_survival(std::span<const T> raw, Squash squash) {
  using ad::clamp;
  using ad::logistic;
  std::vector<T> s;
  s.reserve(raw.size());
  bool first = true;
  T total = raw.empty() ? T() : raw[0];  // placeholder until first term
  for (const T& g : raw) {
    const T inc = squash == Squash::logistic ? logistic(g) : clamp(g, 0.0, 1.0);
    total = first ? inc : total + inc;
    first = false;
    s.push_back(clamp(1.0 - total, 0.0, 1.0));
  }
  return s;
}

// Proportional-hazards scoring model on the grid: cumulative hazard
// Lambda_j = sum_{l<=j} exp(h_l), S(tau_j | x) = exp(-Lambda_j * exp(x beta)).
struct CoxSrModel {
  TimeGrid grid;
  int p = 0;
  Interp interp = Interp::linear;
  ParameterStore params;  // "baseline.h" (J) and "beta.W" (p, penalized)
};

SurvivalPrediction predict_cox_sr(const CoxSrModel& model, std::span<const double> x);

SurvivalPrediction predict_cox(const CoxModel& model, std::span<const double> x,
                               const TimeGrid& grid);

// Feature-blind reference: the training Kaplan-Meier curve for every subject.
struct KmModel {
  StepFunction curve;
};

KmModel km_model(const SurvivalDataset& train);
SurvivalPrediction predict_km(const KmModel& model);

// ---- scoring-rule fits ----

struct ScoringFitOptions {
  ScoringRule rule;
  FitConfig fit;
  std::vector<int> hidden = {32, 32};
  Activation activation = Activation::tanh;
  bool constant_scale = false;       // parametric only
  Squash squash = Squash::logistic;  // increment only
  Interp interp = Interp::linear;    // increment / cox_sr predictions
  double g_floor = 1e-3;
};

// Discretized training objectives as reusable batch builders, shared by the
// fitters and by gradient checking so both see the same arithmetic. The
// dataset must outlive the returned builder; everything else is captured by
// value (the censoring estimate is recomputed from the dataset).
ObjectiveBuilder parametric_objective(const SurvivalDataset& train, const DistributionSpec& spec,
                                      const TimeGrid& grid, const MlpSpec& trunk,
                                      const ScoringFitOptions& options);
ObjectiveBuilder increment_objective(const SurvivalDataset& train, const TimeGrid& grid,
                                     const MlpSpec& trunk, const ScoringFitOptions& options);
ObjectiveBuilder cox_sr_objective(const SurvivalDataset& train, const TimeGrid& grid,
                                  const ScoringFitOptions& options);

std::pair<ParametricSurvivalModel, FitResult> fit_parametric_scoring(
    const SurvivalDataset& train, const DistributionSpec& spec, const TimeGrid& grid,
    const ScoringFitOptions& options);

std::pair<IncrementSurvivalModel, FitResult> fit_increment_scoring(
    const SurvivalDataset& train, const TimeGrid& grid, const ScoringFitOptions& options);

std::pair<CoxSrModel, FitResult> fit_cox_scoring(const SurvivalDataset& train,
                                                 const TimeGrid& grid,
                                                 const ScoringFitOptions& options);

// Final-layer bias for increment-style trunks: start each interval's squashed
// increment near 0.7 / J so the initial curve keeps most of its mass over the
// whole grid regardless of J (and, for trunc_relu, stays off the dead zero
// branch).
double increment_bias_init(int intervals, Squash squash);

// ---- persistence ----

nlohmann::json grid_to_json(const TimeGrid& grid);
TimeGrid grid_from_json(const nlohmann::json& j);

using AnyModel =
    std::variant<ParametricSurvivalModel, IncrementSurvivalModel, CoxSrModel, CoxModel, KmModel>;

nlohmann::json model_to_json(const AnyModel& model);
AnyModel model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const AnyModel& model);
AnyModel load_model(const std::filesystem::path& path);

// Prediction for any model kind; parametric and Cox curves are sampled on the
// supplied grid, grid-native models use their own.
SurvivalPrediction predict_any(const AnyModel& model, std::span<const double> x,
                               const TimeGrid& grid);

}  // namespace survscore
