// End-to-end acceptance checks, one PASS/FAIL line each. Runs the full
// desk-scale experiment stack, so expect several minutes of wall time.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "survscore/competing.hpp"
#include "survscore/dataset.hpp"
#include "survscore/estimators.hpp"
#include "survscore/experiments.hpp"
#include "survscore/gradcheck.hpp"
#include "survscore/mlp.hpp"
#include "survscore/models.hpp"
#include "survscore/optimizer.hpp"
#include "survscore/scoring.hpp"
#include "survscore/simulate.hpp"
#include "survscore/time_grid.hpp"
#include "survscore/util.hpp"

namespace {

using namespace survscore;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

SurvivalRecord rec(double time, int status, int cause = 1) {
  return {time, status, cause, {0.0}};
}

// ---- 1: reverse-mode gradients vs central finite differences ----

Outcome check_gradients() {
  const auto t0 = Clock::now();
  const GradCheckSuiteReport report = run_gradcheck(50, 42, 1e-5, 1e-4);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool pass = report.pass && secs <= 120.0;
  return {pass, fmt("%zu configs, worst rel err %.2e, %.2f s", report.cases.size(),
                    report.worst_rel_err, secs)};
}

// ---- 2: product-limit / Aalen-Johansen hand oracles ----
//
// Every expected value is written as the same chain of (1 - d/r) factors and
// (s * d) / r increments the estimators accumulate, so comparisons are exact.

Outcome check_estimator_oracles() {
  int failed = 0;
  std::string first;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) {
      ++failed;
      if (first.empty()) first = what;
    }
  };

  {  // 1: mixed events and censorings
    const SurvivalDataset d =
        SurvivalDataset::make({rec(1, 1), rec(2, 0), rec(3, 1), rec(4, 0), rec(5, 1)});
    const StepFunction km = kaplan_meier(d);
    const double s1 = 1.0 - 1.0 / 5.0;
    const double s3 = s1 * (1.0 - 1.0 / 3.0);
    const double s5 = s3 * (1.0 - 1.0 / 1.0);
    expect(km(0.5) == 1.0 && km(1.0) == s1 && km(2.9) == s1 && km(3.0) == s3 && km(5.0) == s5 &&
               km(9.0) == 0.0,
           "toy 1 km");
    const auto aj = aalen_johansen(d);
    expect(aj.size() == 1 && aj[0](1.0) == 1.0 - s1 && aj[0](3.0) == 1.0 - s3 &&
               aj[0](5.0) == 1.0 - s5 && aj[0](0.5) == 0.0,
           "toy 1 aj complement");
  }
  {  // 2: all events, distinct times
    const SurvivalDataset d = SurvivalDataset::make({rec(1, 1), rec(2, 1), rec(3, 1), rec(4, 1)});
    const StepFunction km = kaplan_meier(d);
    const double s1 = 1.0 - 1.0 / 4.0;
    const double s2 = s1 * (1.0 - 1.0 / 3.0);
    const double s3 = s2 * (1.0 - 1.0 / 2.0);
    expect(km(1.0) == s1 && km(2.0) == s2 && km(3.5) == s3 && km(4.0) == 0.0, "toy 2 km");
  }
  {  // 3: heavy censoring before a final event
    const SurvivalDataset d =
        SurvivalDataset::make({rec(1, 0), rec(2, 0), rec(3, 0), rec(5, 1)});
    const StepFunction km = kaplan_meier(d);
    expect(km(4.99) == 1.0 && km(5.0) == 0.0, "toy 3 km");
    const StepFunction g = kaplan_meier(d, KmTarget::censoring);
    const double g1 = 1.0 - 1.0 / 4.0;
    const double g2 = g1 * (1.0 - 1.0 / 3.0);
    const double g3 = g2 * (1.0 - 1.0 / 2.0);
    expect(g(1.0) == g1 && g(2.0) == g2 && g(3.0) == g3 && g(10.0) == g3 &&
               g.left_limit(5.0) == g3,
           "toy 3 reverse km");
  }
  {  // 4: tied events with a same-time censoring
    const SurvivalDataset d = SurvivalDataset::make(
        {rec(2, 1), rec(2, 1), rec(2, 0), rec(3, 1), rec(4, 0), rec(5, 1)});
    const StepFunction km = kaplan_meier(d);
    const double s2 = 1.0 - 2.0 / 6.0;
    const double s3 = s2 * (1.0 - 1.0 / 3.0);
    expect(km(2.0) == s2 && km(3.0) == s3 && km(5.0) == 0.0, "toy 4 km ties");
    // the tied censoring competes against the risk set minus same-time events
    const StepFunction g = kaplan_meier(d, KmTarget::censoring);
    const double g2 = 1.0 - 1.0 / 4.0;
    const double g4 = g2 * (1.0 - 1.0 / 2.0);
    expect(g(2.0) == g2 && g(3.9) == g2 && g(4.0) == g4, "toy 4 reverse km");
  }
  {  // 5: event first, censorings after
    const SurvivalDataset d = SurvivalDataset::make({rec(1, 1), rec(2, 0), rec(3, 0)});
    const StepFunction km = kaplan_meier(d);
    expect(km(1.0) == 1.0 - 1.0 / 3.0 && km(100.0) == 1.0 - 1.0 / 3.0, "toy 5 km");
  }
  {  // 6: single event
    const SurvivalDataset d = SurvivalDataset::make({rec(2, 1)});
    const StepFunction km = kaplan_meier(d);
    expect(km(1.9) == 1.0 && km(2.0) == 0.0, "toy 6 km");
  }
  {  // 7: one event, one censoring
    const SurvivalDataset d = SurvivalDataset::make({rec(1, 1), rec(2, 0)});
    const StepFunction km = kaplan_meier(d);
    const StepFunction g = kaplan_meier(d, KmTarget::censoring);
    expect(km(1.0) == 1.0 - 1.0 / 2.0 && g(2.0) == 0.0 && g.left_limit(2.0) == 1.0,
           "toy 7 km + reverse");
  }
  {  // 8: censoring tied with an event on the censoring curve
    const SurvivalDataset d =
        SurvivalDataset::make({rec(1, 0), rec(2, 1), rec(2, 0), rec(3, 0)});
    const StepFunction g = kaplan_meier(d, KmTarget::censoring);
    const double g1 = 1.0 - 1.0 / 4.0;
    const double g2 = g1 * (1.0 - 1.0 / 2.0);
    expect(g(1.0) == g1 && g(2.0) == g2 && g(3.0) == 0.0, "toy 8 reverse km tie");
    const StepFunction km = kaplan_meier(d);
    expect(km(2.0) == 1.0 - 1.0 / 3.0, "toy 8 km");
  }
  {  // 9: two causes
    const SurvivalDataset d =
        SurvivalDataset::make({rec(1, 1, 1), rec(2, 0), rec(3, 1, 2), rec(4, 1, 1)});
    const auto aj = aalen_johansen(d);
    double s = 1.0;
    double c1 = s * 1.0 / 4.0;  // cause 1 at t=1
    s *= 1.0 - 1.0 / 4.0;
    const double c2 = s * 1.0 / 2.0;  // cause 2 at t=3
    s *= 1.0 - 1.0 / 2.0;
    c1 += s * 1.0 / 1.0;  // cause 1 at t=4
    expect(aj.size() == 2 && aj[0](1.0) == 1.0 / 4.0 && aj[0](3.9) == 1.0 / 4.0 &&
               aj[0](4.0) == c1 && aj[1](2.9) == 0.0 && aj[1](3.0) == c2 && aj[1](9.0) == c2,
           "toy 9 two-cause aj");
    expect(aj[0](4.0) + aj[1](4.0) == 1.0, "toy 9 cif sum");
  }
  {  // 10: three causes with a tied event time
    const SurvivalDataset d = SurvivalDataset::make({rec(1, 1, 1), rec(1, 1, 2), rec(2, 0),
                                                     rec(3, 1, 3), rec(4, 1, 1), rec(5, 0)});
    const auto aj = aalen_johansen(d);
    double s = 1.0;
    double c1 = s * 1.0 / 6.0;
    const double c2 = s * 1.0 / 6.0;
    s *= 1.0 - 2.0 / 6.0;
    const double c3 = s * 1.0 / 3.0;
    s *= 1.0 - 1.0 / 3.0;
    c1 += s * 1.0 / 2.0;
    expect(aj.size() == 3 && aj[0](1.0) == 1.0 / 6.0 && aj[1](1.0) == c2 && aj[2](1.0) == 0.0 &&
               aj[2](3.0) == c3 && aj[0](4.0) == c1 && aj[1](10.0) == c2,
           "toy 10 three-cause aj");
  }

  return {failed == 0, failed == 0 ? "10 toy datasets, all exact"
                                   : fmt("%d failures, first: %s", failed, first.c_str())};
}

// ---- 3: log-loss scoring fit vs the Newton MLE on the same rows ----

Outcome check_mle_equivalence() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    DgpConfig dgp;
    dgp.seed = seed;
    const SurvivalDataset data = simulate(dgp);
    const TimeGrid grid = make_grid(data, 30, 0.9);
    const DistributionSpec spec{Family::lognormal};

    ScoringFitOptions options;
    options.rule = ScoringRule{ScoringRuleKind::rcll};
    options.fit = recovery_fit_defaults();
    options.fit.seed = derive_seed(seed, 7);
    options.hidden = {};
    options.constant_scale = true;
    auto [model, result] = fit_parametric_scoring(data, spec, grid, options);

    // the likelihood fit sees exactly the rows the scoring fit trained on
    const ParametricSurvivalModel mle = fit_aft_mle(data.subset(result.train_indices), spec);

    worst = std::max(worst, std::fabs(model.params.slice("trunk.b0")[0] -
                                      mle.params.slice("trunk.b0")[0]));
    const auto w_sr = model.params.slice("trunk.W0");
    const auto w_ml = mle.params.slice("trunk.W0");
    for (std::size_t j = 0; j < w_sr.size(); ++j) {
      worst = std::max(worst, std::fabs(w_sr[j] - w_ml[j]));
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool pass = worst <= 2e-2 && secs <= 300.0;
  return {pass, fmt("worst |coef diff| %.4f over 5 seeds (tol 0.02), %.0f s", worst, secs)};
}

// ---- 4: linear AFT coefficient recovery across families ----

Outcome check_recovery() {
  const auto t0 = Clock::now();
  const Family fams[] = {Family::lognormal, Family::loglogistic, Family::weibull};
  double worst_beta = 0.0, worst_sigma = 0.0;
  int bad_rows = 0;
  for (Family fam : fams) {
    RecoveryConfig cfg;
    cfg.family = fam;
    cfg.repetitions = 10;
    cfg.arms = {"aft_sr:risbs"};
    cfg.seed = 11;
    const RecoveryReport report = run_recovery(cfg);
    double mean_abs[4] = {0.0, 0.0, 0.0, 0.0};
    double mean_sigma = 0.0;
    int count = 0;
    for (const auto& row : report.rows) {
      if (!row.ok) {
        ++bad_rows;
        continue;
      }
      for (int j = 0; j < 4; ++j) mean_abs[j] += std::fabs(row.beta_diff[j]);
      mean_sigma += std::fabs(row.sigma_diff);
      ++count;
    }
    for (int j = 0; j < 4; ++j) worst_beta = std::max(worst_beta, mean_abs[j] / count);
    worst_sigma = std::max(worst_sigma, mean_sigma / count);
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool pass = bad_rows == 0 && worst_beta <= 0.1 && worst_sigma <= 0.05 && secs <= 1200.0;
  return {pass, fmt("worst mean |beta err| %.3f (tol 0.1), |sigma err| %.3f (tol 0.05), %.0f s",
                    worst_beta, worst_sigma, secs)};
}

// ---- 5: benchmark score magnitudes on the nonlinear DGP ----

Outcome check_benchmark_magnitudes() {
  const auto t0 = Clock::now();
  BenchmarkConfig cfg;
  cfg.dgp.kind = DgpKind::complex_nonlinear;
  cfg.repetitions = 5;
  cfg.methods = {"km", "aft_sr:risbs"};
  cfg.quantiles = {0.5};
  cfg.seed = 1;
  const BenchmarkReport report = run_benchmark(cfg);
  for (const auto& row : report.rows) {
    if (!row.ok) return {false, "failed repetition: " + row.error};
  }
  const double km = benchmark_aggregate(report, "km", 0.5).mean * 100.0;
  const double aft = benchmark_aggregate(report, "aft_sr:risbs", 0.5).mean * 100.0;
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool pass = km >= 12.4 && km <= 15.4 && aft >= 5.4 && aft <= 7.4 && aft <= 0.6 * km &&
                    secs <= 900.0;
  return {pass, fmt("km %.2f in [12.4,15.4], model %.2f in [5.4,7.4], ratio %.2f <= 0.6, %.0f s",
                    km, aft, aft / km, secs)};
}

// ---- 6: competing-risks fit vs the Aalen-Johansen baseline ----

Outcome check_cr_ordering() {
  const auto t0 = Clock::now();
  CrBenchmarkConfig cfg;
  cfg.dgp.kind = DgpKind::competing;
  cfg.repetitions = 5;
  cfg.quantiles = {0.5};
  cfg.cr.rule = ScoringRule{ScoringRuleKind::isbs};
  cfg.seed = 1;
  const CrBenchmarkReport report = run_cr_benchmark(cfg);
  for (const auto& row : report.rows) {
    if (!row.ok) return {false, "failed repetition: " + row.error};
  }
  const double aj = cr_benchmark_aggregate(report, "aj", 1, 0.5).mean * 100.0;
  const double fitted = cr_benchmark_aggregate(report, "cr_sr", 1, 0.5).mean * 100.0;
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool pass = fitted <= 0.7 * aj && secs <= 900.0;
  return {pass,
          fmt("cause-1 model %.2f vs aj %.2f, ratio %.2f <= 0.7, %.0f s", fitted, aj,
              fitted / aj, secs)};
}

// ---- 7: structural constraints under parameter fuzz ----
//
// 1000 random (model seed, x) pairs per model family; every check is exact.

Outcome check_constraints() {
  std::mt19937_64 rng(20260818);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const Family fams[] = {Family::lognormal, Family::loglogistic, Family::weibull};

  int failed = 0;
  std::string first;
  auto expect = [&](bool ok, const char* what, int trial) {
    if (!ok) {
      ++failed;
      if (first.empty()) first = fmt("%s (trial %d)", what, trial);
    }
  };
  auto monotone_01 = [](const std::vector<double>& s) {
    if (s.empty() || s.front() != 1.0) return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!(s[i] >= 0.0 && s[i] <= 1.0)) return false;
      if (i > 0 && s[i] > s[i - 1]) return false;
    }
    return true;
  };

  for (int trial = 0; trial < 1000; ++trial) {
    const int p = 1 + trial % 4;
    std::vector<double> x(static_cast<std::size_t>(p));
    for (double& xi : x) xi = unif(rng);
    std::vector<int> hidden;
    if (trial % 5 == 1) hidden = {4};
    if (trial % 5 == 3) hidden = {6, 3};
    const TimeGrid grid = make_grid(0.3 + 6.0 * u01(rng), 2 + trial % 14);
    const int J = grid.intervals();

    {  // parametric: S in [0, 1], nonincreasing
      ParametricSurvivalModel m;
      m.spec = DistributionSpec{fams[trial % 3]};
      m.constant_scale = trial % 2 == 0;
      m.trunk = MlpSpec{p, hidden, m.constant_scale ? 1 : 2, Activation::tanh};
      register_mlp_params(m.trunk, m.params, "trunk");
      if (m.constant_scale) m.params.add_slice("log_scale", 1, false);
      for (double& v : m.params.flat()) v = unif(rng);
      expect(monotone_01(predict_parametric(m, x, grid).survival), "parametric curve", trial);
    }
    {  // increment: squashed increments alpha in [-1, 0] on top of the curve bounds
      IncrementSurvivalModel m;
      m.trunk = MlpSpec{p, hidden, J, Activation::tanh};
      m.grid = grid;
      m.squash = trial % 2 == 0 ? Squash::logistic : Squash::trunc_relu;
      register_mlp_params(m.trunk, m.params, "trunk");
      for (double& v : m.params.flat()) v = unif(rng);
      const SurvivalPrediction pred = predict_increment(m, x);
      expect(monotone_01(pred.survival), "increment curve", trial);
      for (std::size_t i = 1; i < pred.survival.size(); ++i) {
        const double alpha = pred.survival[i] - pred.survival[i - 1];
        expect(alpha >= -1.0 && alpha <= 0.0, "increment alpha", trial);
      }
    }
    {  // proportional hazards on the grid
      CoxSrModel m;
      m.grid = grid;
      m.p = p;
      m.params.add_slice("baseline.h", J, false);
      m.params.add_slice("beta.W", p, true);
      for (double& v : m.params.flat()) v = unif(rng);
      expect(monotone_01(predict_cox_sr(m, x).survival), "cox_sr curve", trial);
    }
    {  // competing risks: per-cause CIFs nondecreasing, left-fold sums <= 1
      CompetingRisksModel m;
      m.k = 2 + trial % 2;
      m.variant = trial % 2 == 0 ? CrVariant::parametric : CrVariant::increment;
      m.spec = DistributionSpec{fams[trial % 3]};
      m.constant_scale = (trial / 2) % 2 == 0;
      m.squash = trial % 3 == 0 ? Squash::trunc_relu : Squash::logistic;
      m.grid = grid;
      const bool parametric = m.variant == CrVariant::parametric;
      const int out_dim =
          parametric ? (m.constant_scale ? m.k : 2 * m.k) : m.k * J;
      m.trunk = MlpSpec{p, hidden, out_dim, Activation::tanh};
      register_mlp_params(m.trunk, m.params, "trunk");
      if (parametric && m.constant_scale) m.params.add_slice("log_scale", m.k, false);
      for (double& v : m.params.flat()) v = unif(rng);
      const CifSet cs = predict_cif(m, x);
      for (const auto& row : cs.cif) {
        expect(row.front() == 0.0, "cif starts at zero", trial);
        for (std::size_t i = 0; i < row.size(); ++i) {
          expect(row[i] >= 0.0 && row[i] <= 1.0, "cif range", trial);
          if (i > 0) expect(row[i] >= row[i - 1], "cif monotone", trial);
        }
      }
      for (std::size_t i = 0; i < cs.times.size(); ++i) {
        double acc = 0.0;
        for (const auto& row : cs.cif) acc += row[i];
        expect(acc <= 1.0, "cif sum bound", trial);
      }
    }
  }
  return {failed == 0, failed == 0 ? "1000 fuzzed (seed, x) pairs per family, all exact"
                                   : fmt("%d failures, first: %s", failed, first.c_str())};
}

// ---- 8: exact scoring identities on randomized inputs ----

struct ExpCurve {
  const TimeGrid* grid = nullptr;
  double lam = 1.0;

  double lift(double v) const { return v; }
  double S(int j) const { return std::exp(-lam * (*grid)[j]); }
  double F(int j) const { return 1.0 - S(j); }
  double log_F(int j) const { return std::log(std::max(F(j), 1e-12)); }
  double log_S(int j) const { return std::log(std::max(S(j), 1e-12)); }
  double log_density(double t) const {
    return std::log(std::max(lam * std::exp(-lam * t), 1e-12));
  }
  double log_survival_at(double t) const {
    return std::log(std::max(std::exp(-lam * t), 1e-12));
  }
};

SurvivalDataset random_data(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> ut(0.05, 5.0);
  std::bernoulli_distribution event(0.6);
  std::vector<SurvivalRecord> rows;
  rows.reserve(static_cast<std::size_t>(n));
  bool any_event = false;
  for (int i = 0; i < n; ++i) {
    const int status = event(rng) ? 1 : 0;
    any_event = any_event || status == 1;
    rows.push_back(rec(ut(rng), status));
  }
  if (!any_event) rows.front().status = 1;
  return SurvivalDataset::make(std::move(rows));
}

std::vector<PredictionAccessor> random_exp_predictions(std::mt19937_64& rng, int n,
                                                       std::vector<double>* hazards = nullptr) {
  std::uniform_real_distribution<double> ul(0.2, 2.5);
  std::vector<PredictionAccessor> preds;
  preds.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double lam = ul(rng);
    if (hazards != nullptr) hazards->push_back(lam);
    preds.push_back(PredictionAccessor{
        [lam](double t) { return 1.0 - std::exp(-lam * t); },
        [lam](double t) { return std::exp(-lam * t); },
        [lam](double t) { return lam * std::exp(-lam * t); },
    });
  }
  return preds;
}

Outcome check_scoring_identities() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int failed = 0;
  std::string first;
  auto expect = [&](bool ok, const char* what, int trial) {
    if (!ok) {
      ++failed;
      if (first.empty()) first = fmt("%s (trial %d)", what, trial);
    }
  };

  for (int trial = 0; trial < 120; ++trial) {
    const int n = 3 + trial % 20;
    const SurvivalDataset data = random_data(rng, n);
    const TimeGrid grid = make_grid(0.5 + 4.0 * u01(rng), 2 + trial % 12);
    const auto preds = random_exp_predictions(rng, n);

    // identity censoring estimate collapses the weighted rule onto the
    // unweighted one, bitwise
    const StepFunction g_one = StepFunction::make({}, {}, 1.0);
    const double scrps =
        objective(ScoringRule{ScoringRuleKind::scrps}, data, grid, preds, g_one);
    const double isbs = objective(ScoringRule{ScoringRuleKind::isbs}, data, grid, preds, g_one);
    expect(scrps == isbs, "scrps == isbs under identity censoring", trial);

    // censored records contribute exactly zero to the reweighted rules
    const StepFunction g_hat = kaplan_meier(data, KmTarget::censoring);
    const ScoreContext ctx = make_score_context(data, grid, g_hat);
    std::uniform_real_distribution<double> ul(0.2, 2.5);
    for (int i = 0; i < n; ++i) {
      if (data.records()[static_cast<std::size_t>(i)].status != 0) continue;
      const ExpCurve curve{&grid, ul(rng)};
      ScoringRule risll{ScoringRuleKind::risll};
      expect(score_record<double>(ScoringRule{ScoringRuleKind::risbs}, ctx, i, curve) == 0.0,
             "censored risbs term", trial);
      expect(score_record<double>(risll, ctx, i, curve) == 0.0, "censored risll term", trial);
      risll.risll_orientation = RisllOrientation::conventional;
      expect(score_record<double>(risll, ctx, i, curve) == 0.0, "censored risll term", trial);
    }

    // the one-cause competing objective is the single-risk objective, bitwise
    std::vector<double> hazards;
    const auto shared = random_exp_predictions(rng, n, &hazards);
    std::vector<std::vector<CifAccessor>> cif_preds;
    cif_preds.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const auto& p = shared[static_cast<std::size_t>(i)];
      cif_preds.push_back({CifAccessor{p.cdf, p.survival, p.density}});
    }
    for (ScoringRuleKind kind : {ScoringRuleKind::isbs, ScoringRuleKind::scrps,
                                 ScoringRuleKind::risbs, ScoringRuleKind::risll,
                                 ScoringRuleKind::rcll}) {
      const ScoringRule rule{kind};
      expect(cr_objective(rule, data, grid, cif_preds, g_hat) ==
                 objective(rule, data, grid, shared, g_hat),
             "one-cause cr objective", trial);
    }
  }
  return {failed == 0, failed == 0 ? "120 randomized trials, all identities exact"
                                   : fmt("%d failures, first: %s", failed, first.c_str())};
}

// ---- 9: training-rule ablation stability ----

Outcome check_ablation_stability() {
  const auto t0 = Clock::now();
  AblationConfig cfg;
  cfg.repetitions = 5;
  cfg.train_rules = {ScoringRuleKind::risbs, ScoringRuleKind::risll, ScoringRuleKind::rcll};
  cfg.eval_rules = {ScoringRuleKind::risbs};
  cfg.seed = 1;
  const AblationReport report = run_ablation(cfg);
  for (const auto& row : report.rows) {
    if (!row.ok) return {false, "failed repetition: " + row.error};
  }
  double lo = 0.0, hi = 0.0;
  std::string summary;
  for (std::size_t i = 0; i < cfg.train_rules.size(); ++i) {
    const Aggregate agg =
        ablation_aggregate(report, cfg.train_rules[i], ScoringRuleKind::risbs);
    summary += fmt("%s%s %.2f", i == 0 ? "" : ", ",
                   to_string(cfg.train_rules[i]).c_str(), agg.mean * 100.0);
    lo = i == 0 ? agg.mean : std::min(lo, agg.mean);
    hi = i == 0 ? agg.mean : std::max(hi, agg.mean);
  }
  const double spread = (hi - lo) / lo;
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool pass = spread <= 0.15;
  return {pass, fmt("%s (x100); spread %.1f%% <= 15%%, %.0f s", summary.c_str(),
                    spread * 100.0, secs)};
}

}  // namespace

int main() {
  struct Check {
    const char* name;
    Outcome (*run)();
  };
  const Check checks[] = {
      {"reverse-mode gradients vs finite differences", check_gradients},
      {"product-limit and Aalen-Johansen hand oracles", check_estimator_oracles},
      {"log-loss scoring fit matches the Newton MLE", check_mle_equivalence},
      {"linear AFT coefficient recovery", check_recovery},
      {"benchmark score magnitudes", check_benchmark_magnitudes},
      {"competing-risks fit beats Aalen-Johansen", check_cr_ordering},
      {"structural constraints under parameter fuzz", check_constraints},
      {"exact scoring identities", check_scoring_identities},
      {"training-rule ablation stability", check_ablation_stability},
  };

  int failures = 0;
  const int total = static_cast<int>(std::size(checks));
  for (int i = 0; i < total; ++i) {
    Outcome outcome;
    try {
      outcome = checks[i].run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("[%d/%d] %-46s %s  (%s)\n", i + 1, total, checks[i].name,
                outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str());
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("acceptance: all %d checks passed\n", total);
  } else {
    std::printf("acceptance: %d of %d checks FAILED\n", failures, total);
  }
  return failures;
}
