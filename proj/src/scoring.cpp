#include "survscore/scoring.hpp"

#include <algorithm>

namespace survscore {

ScoringRuleKind rule_from_string(std::string_view name) {
  if (name == "isbs") return ScoringRuleKind::isbs;
  if (name == "scrps") return ScoringRuleKind::scrps;
  if (name == "risbs") return ScoringRuleKind::risbs;
  if (name == "risll") return ScoringRuleKind::risll;
  if (name == "rcll") return ScoringRuleKind::rcll;
  throw std::invalid_argument("unknown scoring rule: " + std::string(name));
}

std::string to_string(ScoringRuleKind kind) {
  switch (kind) {
    case ScoringRuleKind::isbs: return "isbs";
    case ScoringRuleKind::scrps: return "scrps";
    case ScoringRuleKind::risbs: return "risbs";
    case ScoringRuleKind::risll: return "risll";
    case ScoringRuleKind::rcll: return "rcll";
  }
  throw std::logic_error("unknown scoring rule");
}

ScoreContext make_score_context(const SurvivalDataset& data, const TimeGrid& grid,
                                const StepFunction& censoring_survival, double g_floor,
                                int cause) {
  if (cause < 0 || cause > data.num_causes()) {
    throw std::invalid_argument("score context: cause out of range");
  }
  ScoreContext ctx;
  ctx.grid = &grid;
  const int J = grid.intervals();
  ctx.inv_g_tau.resize(static_cast<std::size_t>(J));
  for (int j = 1; j <= J; ++j) {
    ctx.inv_g_tau[static_cast<std::size_t>(j - 1)] =
        1.0 / censoring_weight(censoring_survival, grid[j], g_floor);
  }
  ctx.records.reserve(static_cast<std::size_t>(data.n()));
  for (const auto& rec : data.records()) {
    RecordTerm term;
    term.time = rec.time;
    term.indicator =
        cause == 0 ? rec.status : ((rec.status == 1 && rec.cause == cause) ? 1 : 0);
    term.ipcw = term.indicator / censoring_weight(censoring_survival, rec.time, g_floor);
    const auto& cuts = grid.cut_points;
    term.first_ge = static_cast<int>(
        std::lower_bound(cuts.begin() + 1, cuts.end(), rec.time) - cuts.begin());
    ctx.records.push_back(term);
  }
  return ctx;
}

namespace {

double floored_log(double p) { return std::log(std::max(p, kProbFloor)); }

// Double-typed curve over a PredictionAccessor; the grid log forms and the
// density share the probability floor with the tape-side curves.
struct AccessorCurve {
  const PredictionAccessor* acc;
  const TimeGrid* grid;

  double lift(double c) const { return c; }
  double F(int j) const { return acc->cdf((*grid)[j]); }
  double S(int j) const { return acc->survival((*grid)[j]); }
  double log_F(int j) const { return floored_log(F(j)); }
  double log_S(int j) const { return floored_log(S(j)); }
  double log_density(double t) const { return floored_log(acc->density(t)); }
  double log_survival_at(double t) const { return floored_log(acc->survival(t)); }
};

struct CifCurve {
  const CifAccessor* acc;
  const TimeGrid* grid;

  double lift(double c) const { return c; }
  double F(int j) const { return acc->cif((*grid)[j]); }
  double S(int j) const { return survival_at((*grid)[j]); }
  double log_F(int j) const { return floored_log(F(j)); }
  double log_S(int j) const { return floored_log(S(j)); }
  double log_density(double t) const { return floored_log(acc->density(t)); }
  double log_survival_at(double t) const { return floored_log(survival_at(t)); }

  double survival_at(double t) const {
    return acc->survival ? acc->survival(t) : 1.0 - acc->cif(t);
  }
};

void require_density(const std::function<double(double)>& density) {
  if (!density) {
    throw std::invalid_argument("rcll requires a density accessor");
  }
}

}  // namespace

double pointwise(const ScoringRule& rule, double time, int status, double tau,
                 const PredictionAccessor& prediction, const StepFunction& censoring_survival,
                 double g_floor) {
  if (!(time > 0.0)) throw std::invalid_argument("pointwise: time must be > 0");
  if (status != 0 && status != 1) throw std::invalid_argument("pointwise: status must be 0 or 1");
  const double w = status / censoring_weight(censoring_survival, time, g_floor);
  const bool before = tau < time;
  switch (rule.kind) {
    case ScoringRuleKind::isbs: {
      if (before) {
        const double f = prediction.cdf(tau);
        return f * f / censoring_weight(censoring_survival, tau, g_floor);
      }
      const double s = prediction.survival(tau);
      return w * (s * s);
    }
    case ScoringRuleKind::scrps: {
      if (before) {
        const double f = prediction.cdf(tau);
        return f * f;
      }
      const double s = prediction.survival(tau);
      return status * (s * s);
    }
    case ScoringRuleKind::risbs: {
      if (status == 0) return 0.0;
      const double v = before ? prediction.cdf(tau) : prediction.survival(tau);
      return w * (v * v);
    }
    case ScoringRuleKind::risll: {
      if (status == 0) return 0.0;
      const bool verbatim = rule.risll_orientation == RisllOrientation::paper_verbatim;
      const double p = (before == verbatim) ? prediction.cdf(tau) : prediction.survival(tau);
      return -w * floored_log(p);
    }
    case ScoringRuleKind::rcll: {
      if (status == 1) {
        require_density(prediction.density);
        return -floored_log(prediction.density(time));
      }
      return -floored_log(prediction.survival(time));
    }
  }
  throw std::logic_error("unknown scoring rule");
}

double objective(const ScoringRule& rule, const SurvivalDataset& data, const TimeGrid& grid,
                 const std::vector<PredictionAccessor>& predictions,
                 const StepFunction& censoring_survival, double g_floor) {
  if (static_cast<int>(predictions.size()) != data.n()) {
    throw std::invalid_argument("objective: one prediction per record required");
  }
  if (rule.kind == ScoringRuleKind::rcll) {
    for (const auto& p : predictions) require_density(p.density);
  }
  const ScoreContext ctx = make_score_context(data, grid, censoring_survival, g_floor);
  std::vector<double> terms(static_cast<std::size_t>(data.n()));
  for (int i = 0; i < data.n(); ++i) {
    AccessorCurve curve{&predictions[static_cast<std::size_t>(i)], &grid};
    terms[static_cast<std::size_t>(i)] = score_record<double>(rule, ctx, i, curve);
  }
  return pairwise_sum(terms) / data.n();
}

double cause_objective(const ScoringRule& rule, const SurvivalDataset& data, const TimeGrid& grid,
                       const std::vector<CifAccessor>& predictions,
                       const StepFunction& censoring_survival, int cause, double g_floor) {
  if (static_cast<int>(predictions.size()) != data.n()) {
    throw std::invalid_argument("cause_objective: one prediction per record required");
  }
  if (cause < 1 || cause > data.num_causes()) {
    throw std::invalid_argument("cause_objective: cause out of range");
  }
  if (rule.kind == ScoringRuleKind::rcll) {
    for (const auto& p : predictions) require_density(p.density);
  }
  const ScoreContext ctx = make_score_context(data, grid, censoring_survival, g_floor, cause);
  std::vector<double> terms(static_cast<std::size_t>(data.n()));
  for (int i = 0; i < data.n(); ++i) {
    CifCurve curve{&predictions[static_cast<std::size_t>(i)], &grid};
    terms[static_cast<std::size_t>(i)] = score_record<double>(rule, ctx, i, curve);
  }
  return pairwise_sum(terms) / data.n();
}

double cr_objective(const ScoringRule& rule, const SurvivalDataset& data, const TimeGrid& grid,
                    const std::vector<std::vector<CifAccessor>>& predictions,
                    const StepFunction& censoring_survival, double g_floor) {
  if (static_cast<int>(predictions.size()) != data.n()) {
    throw std::invalid_argument("cr_objective: one prediction set per record required");
  }
  const int k = data.num_causes();
  for (const auto& per_record : predictions) {
    if (static_cast<int>(per_record.size()) != k) {
      throw std::invalid_argument("cr_objective: one prediction per cause required");
    }
  }
  std::vector<CifAccessor> cause_preds(static_cast<std::size_t>(data.n()));
  double total = 0.0;
  for (int cause = 1; cause <= k; ++cause) {
    for (int i = 0; i < data.n(); ++i) {
      cause_preds[static_cast<std::size_t>(i)] =
          predictions[static_cast<std::size_t>(i)][static_cast<std::size_t>(cause - 1)];
    }
    total += cause_objective(rule, data, grid, cause_preds, censoring_survival, cause, g_floor);
  }
  return total;
}

double evaluate_at_quantile(const ScoringRule& rule, const SurvivalDataset& data,
                            const std::vector<PredictionAccessor>& predictions,
                            const StepFunction& censoring_survival, double quantile,
                            const EvalOptions& options, double* tau_star_out) {
  const double tau_star = nearest_rank_quantile(data.observed_times(), quantile);
  if (tau_star_out != nullptr) *tau_star_out = tau_star;
  bool event_before = false;
  for (const auto& r : data.records()) {
    if (r.status == 1 && r.time <= tau_star) {
      event_before = true;
      break;
    }
  }
  if (!event_before) {
    throw NoEventsBeforeCutoff("no events at or before the evaluation cutoff tau* = " +
                               format_double(tau_star));
  }
  const TimeGrid grid = make_grid(tau_star, options.grid_intervals);
  return objective(rule, data, grid, predictions, censoring_survival, options.g_floor);
}

}  // namespace survscore
