#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "survscore/dataset.hpp"
#include "survscore/distributions.hpp"
#include "survscore/estimators.hpp"
#include "survscore/tape.hpp"
#include "survscore/time_grid.hpp"
#include "survscore/util.hpp"

namespace survscore {

enum class ScoringRuleKind { isbs, scrps, risbs, risll, rcll };

ScoringRuleKind rule_from_string(std::string_view name);
std::string to_string(ScoringRuleKind kind);

// The integrated log-likelihood as printed integrates log F before the event
// and log S after it; the conventional orientation swaps the two. Evaluation
// defaults to the printed form, training drivers use the conventional one.
enum class RisllOrientation { paper_verbatim, conventional };

struct ScoringRule {
  ScoringRuleKind kind = ScoringRuleKind::risbs;
  RisllOrientation risll_orientation = RisllOrientation::paper_verbatim;
};

// Everything score evaluation needs besides the predictions: IPCW weights at
// the records' times (left limit, floored), inverse censoring survival along
// the grid, and each record's first grid index with tau_j >= t_i.
struct RecordTerm {
  double time = 0.0;
  int indicator = 0;  // d_i, or d_i * 1(e_i = cause) in the competing setting
  double ipcw = 0.0;  // indicator / max(G(t-), floor)
  int first_ge = 0;
};

struct ScoreContext {
  const TimeGrid* grid = nullptr;
  std::vector<double> inv_g_tau;  // index j-1 holds 1 / max(G(tau_j -), floor)
  std::vector<RecordTerm> records;
};

// cause = 0 scores all-cause events; cause k >= 1 uses d_i * 1(e_i = k).
ScoreContext make_score_context(const SurvivalDataset& data, const TimeGrid& grid,
                                const StepFunction& censoring_survival, double g_floor = 1e-3,
                                int cause = 0);

// One record's score, averaged over the grid (single value for RCLL).
//
// Curve requirements, for j in [1, J] and t > 0:
//   T F(j), T S(j)                  cdf / survival at tau_j
//   T log_F(j), T log_S(j)          floored at log(1e-12)
//   T log_density(t)                floored at log(1e-12)
//   T log_survival_at(t)            floored at log(1e-12)
//   T lift(double)                  constant of scalar type T
// The branch structure mirrors the pointwise definitions; with an identity
// censoring estimate the SCRPS and ISBS paths produce identical floats.
template <typename T, typename Curve>
T score_record(const ScoringRule& rule, const ScoreContext& ctx, int i, Curve&& curve) {
  using ad::square;
  const RecordTerm& r = ctx.records[static_cast<std::size_t>(i)];
  const int J = ctx.grid->intervals();
  switch (rule.kind) {
    case ScoringRuleKind::rcll: {
      if (r.indicator == 1) return -curve.log_density(r.time);
      return -curve.log_survival_at(r.time);
    }
    case ScoringRuleKind::risbs: {
      if (r.indicator == 0) return curve.lift(0.0);
      T acc = curve.lift(0.0);
      for (int j = 1; j <= J; ++j) {
        acc = acc + (j < r.first_ge ? square(curve.F(j)) : square(curve.S(j)));
      }
      return acc * (r.ipcw / J);
    }
    case ScoringRuleKind::risll: {
      if (r.indicator == 0) return curve.lift(0.0);
      const bool verbatim = rule.risll_orientation == RisllOrientation::paper_verbatim;
      T acc = curve.lift(0.0);
      for (int j = 1; j <= J; ++j) {
        const bool before = j < r.first_ge;
        acc = acc + (before == verbatim ? curve.log_F(j) : curve.log_S(j));
      }
      return acc * (-r.ipcw / J);
    }
    case ScoringRuleKind::scrps: {
      T acc = curve.lift(0.0);
      for (int j = 1; j <= J; ++j) {
        if (j < r.first_ge) {
          acc = acc + square(curve.F(j));
        } else if (r.indicator == 1) {
          acc = acc + square(curve.S(j));
        }
      }
      return acc * (1.0 / J);
    }
    case ScoringRuleKind::isbs: {
      T acc = curve.lift(0.0);
      for (int j = 1; j <= J; ++j) {
        if (j < r.first_ge) {
          acc = acc + ctx.inv_g_tau[static_cast<std::size_t>(j - 1)] * square(curve.F(j));
        } else if (r.indicator == 1) {
          acc = acc + r.ipcw * square(curve.S(j));
        }
      }
      return acc * (1.0 / J);
    }
  }
  throw std::logic_error("unknown scoring rule");
}

// Survival predictions for scoring: cdf and survival are required, density
// only for RCLL.
struct PredictionAccessor {
  std::function<double(double)> cdf;
  std::function<double(double)> survival;
  std::function<double(double)> density;
};

// Competing-risks predictions: cif is required; survival defaults to
// 1 - cif(t) when absent, density (sub-density) only for RCLL.
struct CifAccessor {
  std::function<double(double)> cif;
  std::function<double(double)> survival;
  std::function<double(double)> density;
};

// Single-tau integrand of the discretized objective, exactly as defined.
double pointwise(const ScoringRule& rule, double time, int status, double tau,
                 const PredictionAccessor& prediction, const StepFunction& censoring_survival,
                 double g_floor = 1e-3);

// (1/N) sum_i (1/J) sum_j of the pointwise scores (RCLL: no grid average).
double objective(const ScoringRule& rule, const SurvivalDataset& data, const TimeGrid& grid,
                 const std::vector<PredictionAccessor>& predictions,
                 const StepFunction& censoring_survival, double g_floor = 1e-3);

// One cause's contribution to the competing-risks objective: the usual
// average with d_i * 1(e_i = cause) indicators, scored on that cause's CIF.
double cause_objective(const ScoringRule& rule, const SurvivalDataset& data, const TimeGrid& grid,
                       const std::vector<CifAccessor>& predictions,
                       const StepFunction& censoring_survival, int cause, double g_floor = 1e-3);

// Competing-risks objective: sum over causes of the per-cause objective with
// cause-specific indicators (predictions indexed [record][cause]).
double cr_objective(const ScoringRule& rule, const SurvivalDataset& data, const TimeGrid& grid,
                    const std::vector<std::vector<CifAccessor>>& predictions,
                    const StepFunction& censoring_survival, double g_floor = 1e-3);

struct NoEventsBeforeCutoff : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalOptions {
  int grid_intervals = 100;
  double g_floor = 1e-3;
};

// Scores on a fresh grid up to the nearest-rank q-quantile of the data's
// observed times. Throws NoEventsBeforeCutoff when no event lands at or
// before the cutoff. tau_star_out reports the cutoff actually used.
double evaluate_at_quantile(const ScoringRule& rule, const SurvivalDataset& data,
                            const std::vector<PredictionAccessor>& predictions,
                            const StepFunction& censoring_survival, double quantile,
                            const EvalOptions& options = {}, double* tau_star_out = nullptr);

}  // namespace survscore
