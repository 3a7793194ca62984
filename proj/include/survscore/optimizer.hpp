#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "survscore/tape.hpp"

namespace survscore {

struct SliceInfo {
  std::string name;
  int offset = 0;
  int size = 0;
  bool l2_penalized = false;
};

// Flat parameter vector with named slices. Slice order is registration order,
// which also fixes the tape's parameter order.
class ParameterStore {
 public:
  int add_slice(const std::string& name, int size, bool l2_penalized = false);

  bool has_slice(std::string_view name) const;
  const SliceInfo& slice_info(std::string_view name) const;
  std::span<double> slice(std::string_view name);
  std::span<const double> slice(std::string_view name) const;

  std::vector<double>& flat() { return values_; }
  const std::vector<double>& flat() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  const std::vector<SliceInfo>& slices() const { return slices_; }

  nlohmann::json to_json() const;
  static ParameterStore from_json(const nlohmann::json& j);

 private:
  std::vector<SliceInfo> slices_;
  std::vector<double> values_;
};

// Tape leaves for every stored parameter, in flat order.
struct ParamVars {
  const ParameterStore* store = nullptr;
  std::vector<ad::Var> vars;

  ad::Var operator[](int i) const { return vars[static_cast<std::size_t>(i)]; }
  std::span<const ad::Var> slice(std::string_view name) const {
    const SliceInfo& info = store->slice_info(name);
    return {vars.data() + info.offset, static_cast<std::size_t>(info.size)};
  }
};

ParamVars make_param_vars(ad::Tape& tape, const ParameterStore& store);

struct FitConfig {
  double learning_rate = 1e-2;
  int batch_size = 128;
  int max_epochs = 200;
  double l2 = 0.0;  // applied to slices registered as penalized
  int patience = 10;
  double validation_fraction = 0.2;
  std::uint64_t seed = 1;

  // Plateau schedule: multiply the learning rate by lr_decay_factor when the
  // validation objective has not improved for lr_decay_patience evaluations
  // (0 = max(2, patience / 2)), never below min_learning_rate.
  double lr_decay_factor = 0.5;
  int lr_decay_patience = 0;
  double min_learning_rate = 1e-5;

  void validate() const;
};

struct EpochStat {
  int epoch = 0;
  double train_objective = 0.0;
  double val_objective = 0.0;
};

struct FitResult {
  std::vector<EpochStat> trace;
  int best_epoch = 0;
  double best_val_objective = std::numeric_limits<double>::infinity();
  std::vector<int> train_indices;  // inner split actually optimized on
  std::vector<int> val_indices;
};

// Builds the mean objective of one mini-batch on the tape. Indices refer to
// the caller's record ordering [0, n_records).
using ObjectiveBuilder =
    std::function<ad::Var(ad::Tape&, const ParamVars&, std::span<const int>)>;

using Initializer = std::function<void(ParameterStore&, std::uint64_t)>;

// Mini-batch Adam with an internal train/validation split, early stopping on
// the raw validation objective, and best-validation parameters written back.
// A non-finite objective at initialization triggers up to 3 re-seeds.
FitResult fit(const ObjectiveBuilder& builder, ParameterStore& params, const Initializer& init,
              int n_records, const FitConfig& config);

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int worst_coordinate = -1;
  int skipped_coordinates = 0;  // perturbation crossed a clamp kink
  bool clamp_active = false;
  int coordinates = 0;
};

// Central finite differences against the tape gradient for the full parameter
// vector. Coordinates whose +/-h rebuilds change the clamp saturation pattern
// are skipped (the subgradient convention makes those incomparable).
GradCheckResult finite_diff_check(
    const std::function<ad::Var(ad::Tape&, const ParamVars&)>& builder, ParameterStore& params,
    double h = 1e-5);

}  // namespace survscore
