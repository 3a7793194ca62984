#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "survscore/models.hpp"

namespace survscore {

// d_i * 1(e_i = k): the other causes' events count as censored for cause k.
int cause_indicator(const SurvivalRecord& record, int cause);

enum class CrVariant { parametric, increment };

CrVariant cr_variant_from_string(std::string_view name);
std::string to_string(CrVariant variant);

enum class CrNormalize { rescale, none };

CrNormalize cr_normalize_from_string(std::string_view name);
std::string to_string(CrNormalize mode);

// One model for all causes. With a joint trunk the network emits every
// cause's head at once: parametric heads are laid out [mu_1..mu_K] then
// [log sigma_1..log sigma_K] (locations only under constant_scale, which adds
// a "log_scale" slice of length K); increment heads are cause-major blocks of
// J raw increments. Separate trunks repeat the single-cause layout under
// prefixes "cause<k>.trunk". K = 1 always uses the joint layout, which
// coincides with the single-risk models.
struct CompetingRisksModel {
  int k = 1;
  CrVariant variant = CrVariant::parametric;
  CrNormalize normalize = CrNormalize::rescale;
  bool joint_trunk = true;
  DistributionSpec spec;             // parametric
  bool constant_scale = false;       // parametric
  Squash squash = Squash::logistic;  // increment
  Interp interp = Interp::linear;
  MlpSpec trunk;
  TimeGrid grid;
  ParameterStore params;
};

// CIF normalization. Grid points where the raw curves sum above 1 are
// rescaled by 1/sum, a running maximum restores per-cause monotonicity, and a
// capped-increment repair (inert while the summed curves stay within 1)
// enforces the bound exactly: outputs are nondecreasing per cause with
// cause-order left-fold sums <= 1, and equal the inputs whenever those
// already comply. Rows are cause-major, one value per grid point tau_1..tau_J
// (tau_0 = 0 implicit); raw rows must be nondecreasing and nonnegative.
// Branch decisions report to the tape's clamp signature for T = ad::Var.
template <typename T>
std::vector<std::vector<T>> normalize_cif(const std::vector<std::vector<T>>& raw);

struct CifSet {
  std::vector<double> times;             // grid cut points, starting at 0
  std::vector<std::vector<double>> cif;  // [cause][same length as times]
  Interp interp = Interp::linear;

  // Accessors for cause k (1-based): cif, survival = 1 - cif, and the
  // discrete sub-density over the grid.
  CifAccessor accessor(int cause) const;
  std::vector<CifAccessor> accessors() const;
};

CifSet predict_cif(const CompetingRisksModel& model, std::span<const double> x);

struct CrFitOptions {
  ScoringRule rule;
  FitConfig fit;
  CrVariant variant = CrVariant::parametric;
  CrNormalize normalize = CrNormalize::rescale;
  bool joint_trunk = true;
  DistributionSpec spec;             // parametric
  bool constant_scale = false;       // parametric
  Squash squash = Squash::logistic;  // increment
  std::vector<int> hidden = {32, 32};
  Activation activation = Activation::tanh;
  Interp interp = Interp::linear;
  double g_floor = 1e-3;
};

// Competing-risks fit: the objective sums the per-cause objectives with
// cause-specific indicators over a joint parameter store. Every declared
// cause needs at least one training event. K = 1 reduces to the matching
// single-risk fit (same tape, same trace, same parameters).
std::pair<CompetingRisksModel, FitResult> fit_cr(const SurvivalDataset& train,
                                                 const TimeGrid& grid,
                                                 const CrFitOptions& options);

// Per-cause score at a quantile cutoff, mirroring evaluate_at_quantile;
// predictions indexed per record, for the scored cause. Throws
// NoEventsBeforeCutoff when that cause has no event at or before tau*.
double evaluate_cif_at_quantile(const ScoringRule& rule, const SurvivalDataset& data,
                                const std::vector<CifAccessor>& predictions,
                                const StepFunction& censoring_survival, double quantile,
                                int cause, const EvalOptions& options = {},
                                double* tau_star_out = nullptr);

// Long-format CIF export: subject,cause,time,cif.
void write_cif_csv(const std::filesystem::path& path, const std::vector<CifSet>& per_subject);

nlohmann::json cr_model_to_json(const CompetingRisksModel& model);
CompetingRisksModel cr_model_from_json(const nlohmann::json& j);
void save_cr_model(const std::filesystem::path& path, const CompetingRisksModel& model);
CompetingRisksModel load_cr_model(const std::filesystem::path& path);

}  // namespace survscore
