#include "survscore/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>

#include "survscore/detail/curves.hpp"
#include "survscore/util.hpp"

namespace survscore {

Interp interp_from_string(std::string_view name) {
  if (name == "step") return Interp::step;
  if (name == "linear") return Interp::linear;
  throw std::invalid_argument("unknown interpolation mode: " + std::string(name));
}

std::string to_string(Interp interp) { return interp == Interp::step ? "step" : "linear"; }

Squash squash_from_string(std::string_view name) {
  if (name == "logistic") return Squash::logistic;
  if (name == "trunc_relu") return Squash::trunc_relu;
  throw std::invalid_argument("unknown squash: " + std::string(name));
}

std::string to_string(Squash squash) {
  return squash == Squash::logistic ? "logistic" : "trunc_relu";
}

double interpolate_curve(std::span<const double> times, std::span<const double> values,
                         Interp interp, double t) {
  if (times.empty() || times.size() != values.size()) {
    throw std::invalid_argument("interpolate: malformed curve");
  }
  if (t <= times.front()) return values.front();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto idx = static_cast<std::size_t>(it - times.begin()) - 1;
  if (idx + 1 >= times.size()) return values.back();
  if (interp == Interp::step) return values[idx];
  const double w = (t - times[idx]) / (times[idx + 1] - times[idx]);
  return values[idx] + (values[idx + 1] - values[idx]) * w;
}

double SurvivalPrediction::survival_at(double t) const {
  if (exact_sf) return exact_sf(t);
  return interpolate_curve(times, survival, interp, t);
}

double SurvivalPrediction::cdf_at(double t) const {
  if (exact_cdf) return exact_cdf(t);
  return 1.0 - survival_at(t);
}

double SurvivalPrediction::density_at(double t) const {
  if (!density_fn) throw std::logic_error("prediction carries no density");
  return density_fn(t);
}

PredictionAccessor SurvivalPrediction::accessor() const {
  auto self = std::make_shared<const SurvivalPrediction>(*this);
  PredictionAccessor acc;
  acc.cdf = [self](double t) { return self->cdf_at(t); };
  acc.survival = [self](double t) { return self->survival_at(t); };
  if (self->has_density()) {
    acc.density = [self](double t) { return self->density_at(t); };
  }
  return acc;
}

// ---- parametric ----

ParamVector ParametricSurvivalModel::theta_at(std::span<const double> x) const {
  const MlpWeights<double> w = mlp_weights(trunk, params, "trunk");
  const std::vector<double> out = mlp_forward(w, x);
  ParamVector theta;
  theta.location = out[0];
  const double raw = constant_scale ? params.slice("log_scale")[0] : out[1];
  theta.log_scale = ad::clamp(raw, -kLogScaleBound, kLogScaleBound);
  return theta;
}

SurvivalPrediction predict_parametric(const ParametricSurvivalModel& model,
                                      std::span<const double> x, const TimeGrid& grid) {
  const ParamVector theta = model.theta_at(x);
  const DistributionSpec spec = model.spec;
  SurvivalPrediction pred;
  pred.times = grid.cut_points;
  pred.survival.reserve(pred.times.size());
  pred.survival.push_back(1.0);
  for (int j = 1; j <= grid.intervals(); ++j) pred.survival.push_back(sf(spec, theta, grid[j]));
  pred.interp = Interp::linear;
  pred.exact_sf = [spec, theta](double t) { return sf(spec, theta, t); };
  pred.exact_cdf = [spec, theta](double t) { return cdf(spec, theta, t); };
  pred.density_fn = [spec, theta](double t) { return pdf(spec, theta, t); };
  return pred;
}

// ---- grid-native predictions ----

namespace {

// Discrete density over the grid: increment of the cdf across the interval
// containing t divided by the spacing; t beyond the grid uses the last
// interval.
double grid_density(const std::vector<double>& times, const std::vector<double>& surv, double t) {
  const auto j_end = static_cast<std::size_t>(times.size() - 1);
  auto it = std::lower_bound(times.begin() + 1, times.end(), t);
  std::size_t j = static_cast<std::size_t>(it - times.begin());
  j = std::min(std::max<std::size_t>(j, 1), j_end);
  return (surv[j - 1] - surv[j]) / (times[j] - times[j - 1]);
}

SurvivalPrediction grid_prediction(std::vector<double> times, std::vector<double> surv,
                                   Interp interp) {
  SurvivalPrediction pred;
  pred.times = std::move(times);
  pred.survival = std::move(surv);
  pred.interp = interp;
  auto t_copy = std::make_shared<const std::vector<double>>(pred.times);
  auto s_copy = std::make_shared<const std::vector<double>>(pred.survival);
  pred.density_fn = [t_copy, s_copy](double t) { return grid_density(*t_copy, *s_copy, t); };
  return pred;
}

}  // namespace

SurvivalPrediction predict_increment(const IncrementSurvivalModel& model,
                                     std::span<const double> x) {
  const MlpWeights<double> w = mlp_weights(model.trunk, model.params, "trunk");
  const std::vector<double> raw = mlp_forward(w, x);
  const std::vector<double> s =
      increment_survival<double>(std::span<const double>(raw), model.squash);
  std::vector<double> surv;
  surv.reserve(s.size() + 1);
  surv.push_back(1.0);
  surv.insert(surv.end(), s.begin(), s.end());
  return grid_prediction(model.grid.cut_points, std::move(surv), model.interp);
}

SurvivalPrediction predict_cox_sr(const CoxSrModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.p) {
    throw std::invalid_argument("cox_sr: feature vector has wrong length");
  }
  const auto h = model.params.slice("baseline.h");
  const auto beta = model.params.slice("beta.W");
  double lp = 0.0;
  for (int k = 0; k < model.p; ++k) lp = lp + beta[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
  const double r = std::exp(lp);
  std::vector<double> surv;
  surv.reserve(h.size() + 1);
  surv.push_back(1.0);
  double lambda = 0.0;
  for (double hl : h) {
    lambda += std::exp(hl);
    surv.push_back(std::exp(-(lambda * r)));
  }
  return grid_prediction(model.grid.cut_points, std::move(surv), model.interp);
}

SurvivalPrediction predict_cox(const CoxModel& model, std::span<const double> x,
                               const TimeGrid& grid) {
  if (x.size() != model.beta.size()) {
    throw std::invalid_argument("cox: feature vector has wrong length");
  }
  double lp = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) lp += model.beta[k] * x[k];
  const double r = std::exp(lp);
  const StepFunction s0 = model.baseline_survival;
  SurvivalPrediction pred;
  pred.times = grid.cut_points;
  pred.survival.reserve(pred.times.size());
  pred.interp = Interp::step;
  pred.exact_sf = [s0, r](double t) { return std::pow(s0(t), r); };
  for (double t : pred.times) pred.survival.push_back(pred.exact_sf(t));
  return pred;
}

KmModel km_model(const SurvivalDataset& train) {
  return KmModel{kaplan_meier(train, KmTarget::event)};
}

SurvivalPrediction predict_km(const KmModel& model) {
  SurvivalPrediction pred;
  pred.times.reserve(model.curve.knots.size() + 1);
  pred.survival.reserve(model.curve.knots.size() + 1);
  pred.times.push_back(0.0);
  pred.survival.push_back(1.0);
  for (std::size_t i = 0; i < model.curve.knots.size(); ++i) {
    pred.times.push_back(model.curve.knots[i]);
    pred.survival.push_back(model.curve.values[i]);
  }
  pred.interp = Interp::step;
  const StepFunction curve = model.curve;
  pred.exact_sf = [curve](double t) { return curve(t); };
  return pred;
}

// ---- scoring-rule fits ----

using detail::GridVarCurve;
using detail::ParametricVarCurve;

ObjectiveBuilder parametric_objective(const SurvivalDataset& train, const DistributionSpec& spec,
                                      const TimeGrid& grid, const MlpSpec& trunk,
                                      const ScoringFitOptions& options) {
  const StepFunction g_hat = kaplan_meier(train, KmTarget::censoring);
  return [&train, spec, grid, trunk, rule = options.rule,
          constant_scale = options.constant_scale,
          ctx = make_score_context(train, grid, g_hat, options.g_floor)](
             ad::Tape& tape, const ParamVars& vars, std::span<const int> batch) {
    const MlpWeights<ad::Var> w = mlp_weights(trunk, vars, "trunk");
    std::vector<ad::Var> terms;
    terms.reserve(batch.size());
    for (int i : batch) {
      const auto out = mlp_forward(w, train[i].features);
      const ad::Var mu = out[0];
      const ad::Var s_raw = constant_scale ? vars.slice("log_scale")[0] : out[1];
      const ad::Var s = ad::clamp(s_raw, -kLogScaleBound, kLogScaleBound);
      ParametricVarCurve curve{&tape, &spec, mu, s, &grid};
      terms.push_back(score_record<ad::Var>(rule, ctx, i, curve));
    }
    return pairwise_sum(terms) * (1.0 / static_cast<double>(terms.size()));
  };
}

std::pair<ParametricSurvivalModel, FitResult> fit_parametric_scoring(
    const SurvivalDataset& train, const DistributionSpec& spec, const TimeGrid& grid,
    const ScoringFitOptions& options) {
  ParametricSurvivalModel model;
  model.spec = spec;
  model.constant_scale = options.constant_scale;
  model.trunk = MlpSpec{train.p(), options.hidden, options.constant_scale ? 1 : 2,
                        options.activation};
  register_mlp_params(model.trunk, model.params, "trunk");
  if (options.constant_scale) model.params.add_slice("log_scale", 1, false);

  const MlpSpec& trunk = model.trunk;
  const bool constant_scale = options.constant_scale;

  Initializer init = [&trunk, constant_scale](ParameterStore& p, std::uint64_t seed) {
    init_mlp_params(trunk, p, "trunk", seed);
    if (constant_scale) p.slice("log_scale")[0] = 0.0;
  };

  const ObjectiveBuilder builder = parametric_objective(train, spec, grid, model.trunk, options);
  FitResult result = fit(builder, model.params, init, train.n(), options.fit);
  return {std::move(model), std::move(result)};
}

ObjectiveBuilder increment_objective(const SurvivalDataset& train, const TimeGrid& grid,
                                     const MlpSpec& trunk, const ScoringFitOptions& options) {
  const StepFunction g_hat = kaplan_meier(train, KmTarget::censoring);
  return [&train, grid, trunk, rule = options.rule, squash = options.squash,
          interp = options.interp,
          ctx = make_score_context(train, grid, g_hat, options.g_floor)](
             ad::Tape& tape, const ParamVars& vars, std::span<const int> batch) {
    const MlpWeights<ad::Var> w = mlp_weights(trunk, vars, "trunk");
    std::vector<ad::Var> terms;
    terms.reserve(batch.size());
    for (int i : batch) {
      const auto raw = mlp_forward(w, train[i].features);
      GridVarCurve curve{&tape, &grid, interp,
                         increment_survival<ad::Var>(std::span<const ad::Var>(raw), squash)};
      terms.push_back(score_record<ad::Var>(rule, ctx, i, curve));
    }
    return pairwise_sum(terms) * (1.0 / static_cast<double>(terms.size()));
  };
}

std::pair<IncrementSurvivalModel, FitResult> fit_increment_scoring(
    const SurvivalDataset& train, const TimeGrid& grid, const ScoringFitOptions& options) {
  IncrementSurvivalModel model;
  model.grid = grid;
  model.squash = options.squash;
  model.interp = options.interp;
  model.trunk = MlpSpec{train.p(), options.hidden, grid.intervals(), options.activation};
  register_mlp_params(model.trunk, model.params, "trunk");

  const MlpSpec& trunk = model.trunk;
  const std::string final_bias = "trunk.b" + std::to_string(trunk.hidden.size());
  const double bias0 = increment_bias_init(grid.intervals(), options.squash);

  Initializer init = [&trunk, final_bias, bias0](ParameterStore& p, std::uint64_t seed) {
    init_mlp_params(trunk, p, "trunk", seed);
    for (double& b : p.slice(final_bias)) b = bias0;
  };

  const ObjectiveBuilder builder = increment_objective(train, grid, model.trunk, options);
  FitResult result = fit(builder, model.params, init, train.n(), options.fit);
  return {std::move(model), std::move(result)};
}

ObjectiveBuilder cox_sr_objective(const SurvivalDataset& train, const TimeGrid& grid,
                                  const ScoringFitOptions& options) {
  const StepFunction g_hat = kaplan_meier(train, KmTarget::censoring);
  return [&train, grid, rule = options.rule, interp = options.interp,
          ctx = make_score_context(train, grid, g_hat, options.g_floor)](
             ad::Tape& tape, const ParamVars& vars, std::span<const int> batch) {
    const auto h = vars.slice("baseline.h");
    const auto beta = vars.slice("beta.W");
    std::vector<ad::Var> lambda;  // cumulative hazard at tau_1..tau_J
    lambda.reserve(h.size());
    for (std::size_t l = 0; l < h.size(); ++l) {
      const ad::Var eh = ad::exp(h[l]);
      lambda.push_back(l == 0 ? eh : lambda[l - 1] + eh);
    }
    std::vector<ad::Var> terms;
    terms.reserve(batch.size());
    for (int i : batch) {
      const auto& x = train[i].features;
      ad::Var lp = tape.constant(0.0);
      for (int k = 0; k < static_cast<int>(x.size()); ++k) {
        lp = lp + beta[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
      }
      const ad::Var r = ad::exp(lp);
      GridVarCurve curve{&tape, &grid, interp, {}};
      curve.surv.reserve(lambda.size());
      for (const ad::Var& lam : lambda) curve.surv.push_back(ad::exp(-(lam * r)));
      terms.push_back(score_record<ad::Var>(rule, ctx, i, curve));
    }
    return pairwise_sum(terms) * (1.0 / static_cast<double>(terms.size()));
  };
}

std::pair<CoxSrModel, FitResult> fit_cox_scoring(const SurvivalDataset& train,
                                                 const TimeGrid& grid,
                                                 const ScoringFitOptions& options) {
  CoxSrModel model;
  model.grid = grid;
  model.p = train.p();
  model.interp = options.interp;
  const int J = grid.intervals();
  model.params.add_slice("baseline.h", J, false);
  model.params.add_slice("beta.W", model.p, true);

  // Flat baseline with unit cumulative hazard at tau_star, zero coefficients.
  Initializer init = [J](ParameterStore& p, std::uint64_t) {
    for (double& h : p.slice("baseline.h")) h = -std::log(static_cast<double>(J));
    for (double& b : p.slice("beta.W")) b = 0.0;
  };

  const ObjectiveBuilder builder = cox_sr_objective(train, grid, options);
  FitResult result = fit(builder, model.params, init, train.n(), options.fit);
  return {std::move(model), std::move(result)};
}

double increment_bias_init(int intervals, Squash squash) {
  const double p = 0.7 / std::max(intervals, 1);
  if (squash == Squash::trunc_relu) return p;
  return std::log(p) - std::log1p(-p);
}

// ---- persistence ----

nlohmann::json grid_to_json(const TimeGrid& grid) {
  return {{"tau_star", grid.tau_star()}, {"intervals", grid.intervals()}};
}

TimeGrid grid_from_json(const nlohmann::json& j) {
  return make_grid(j.at("tau_star").get<double>(), j.at("intervals").get<int>());
}

namespace {

nlohmann::json step_to_json(const StepFunction& f) {
  return {{"knots", f.knots}, {"values", f.values}, {"pre_value", f.pre_value}};
}

StepFunction step_from_json(const nlohmann::json& j) {
  return StepFunction::make(j.at("knots").get<std::vector<double>>(),
                            j.at("values").get<std::vector<double>>(),
                            j.at("pre_value").get<double>());
}

}  // namespace

nlohmann::json model_to_json(const AnyModel& model) {
  nlohmann::json j;
  if (const auto* m = std::get_if<ParametricSurvivalModel>(&model)) {
    j["kind"] = "parametric";
    j["family"] = to_string(m->spec.family);
    j["constant_scale"] = m->constant_scale;
    j["trunk"] = m->trunk.to_json();
    j["params"] = m->params.to_json();
  } else if (const auto* m = std::get_if<IncrementSurvivalModel>(&model)) {
    j["kind"] = "increment";
    j["grid"] = grid_to_json(m->grid);
    j["squash"] = to_string(m->squash);
    j["interp"] = to_string(m->interp);
    j["trunk"] = m->trunk.to_json();
    j["params"] = m->params.to_json();
  } else if (const auto* m = std::get_if<CoxSrModel>(&model)) {
    j["kind"] = "cox_sr";
    j["grid"] = grid_to_json(m->grid);
    j["p"] = m->p;
    j["interp"] = to_string(m->interp);
    j["params"] = m->params.to_json();
  } else if (const auto* m = std::get_if<CoxModel>(&model)) {
    j["kind"] = "cox_mle";
    j["beta"] = m->beta;
    j["baseline"] = step_to_json(m->baseline_survival);
  } else if (const auto* m = std::get_if<KmModel>(&model)) {
    j["kind"] = "km";
    j["curve"] = step_to_json(m->curve);
  } else {
    throw std::logic_error("unknown model kind");
  }
  return j;
}

AnyModel model_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "parametric") {
    ParametricSurvivalModel m;
    m.spec.family = family_from_string(j.at("family").get<std::string>());
    m.constant_scale = j.at("constant_scale").get<bool>();
    m.trunk = MlpSpec::from_json(j.at("trunk"));
    m.params = ParameterStore::from_json(j.at("params"));
    return m;
  }
  if (kind == "increment") {
    IncrementSurvivalModel m;
    m.grid = grid_from_json(j.at("grid"));
    m.squash = squash_from_string(j.at("squash").get<std::string>());
    m.interp = interp_from_string(j.at("interp").get<std::string>());
    m.trunk = MlpSpec::from_json(j.at("trunk"));
    m.params = ParameterStore::from_json(j.at("params"));
    return m;
  }
  if (kind == "cox_sr") {
    CoxSrModel m;
    m.grid = grid_from_json(j.at("grid"));
    m.p = j.at("p").get<int>();
    m.interp = interp_from_string(j.at("interp").get<std::string>());
    m.params = ParameterStore::from_json(j.at("params"));
    return m;
  }
  if (kind == "cox_mle") {
    CoxModel m;
    m.beta = j.at("beta").get<std::vector<double>>();
    m.baseline_survival = step_from_json(j.at("baseline"));
    return m;
  }
  if (kind == "km") {
    return KmModel{step_from_json(j.at("curve"))};
  }
  throw std::runtime_error("unknown model kind in file: " + kind);
}

void save_model(const std::filesystem::path& path, const AnyModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path.string());
  out << model_to_json(model).dump(2) << "\n";
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path.string());
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

SurvivalPrediction predict_any(const AnyModel& model, std::span<const double> x,
                               const TimeGrid& grid) {
  if (const auto* m = std::get_if<ParametricSurvivalModel>(&model)) {
    return predict_parametric(*m, x, grid);
  }
  if (const auto* m = std::get_if<IncrementSurvivalModel>(&model)) {
    return predict_increment(*m, x);
  }
  if (const auto* m = std::get_if<CoxSrModel>(&model)) return predict_cox_sr(*m, x);
  if (const auto* m = std::get_if<CoxModel>(&model)) return predict_cox(*m, x, grid);
  if (const auto* m = std::get_if<KmModel>(&model)) return predict_km(*m);
  throw std::logic_error("unknown model kind");
}

}  // namespace survscore
