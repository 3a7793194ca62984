#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "survscore/aft_mle.hpp"
#include "survscore/competing.hpp"
#include "survscore/models.hpp"
#include "survscore/simulate.hpp"

namespace survscore {

// Experiment drivers. All of them are seed-deterministic end to end:
// repetition r works from derive_seed(config.seed, r) regardless of scheduling,
// rows are assembled in repetition order, and rendering recomputes every
// aggregate from the raw rows.

// ---- parameter recovery ----

// Optimizer settings tight enough for coefficient recovery on linear heads;
// looser defaults would leave visible Adam dither in the comparisons.
FitConfig recovery_fit_defaults();

// Arms: "aft_mle", "cox_mle", "aft_sr:<rule>", "cox_sr:<rule>", "np_sr:<rule>",
// and "dgp" (oracle parameters, no fit). SR arms on the AFT side use a linear
// trunk with a shared scale so coefficients are identified.
struct RecoveryConfig {
  Family family = Family::lognormal;
  int repetitions = 100;
  int n = 1500;
  std::vector<double> beta = {2.0, 0.5, 0.2, 0.0};
  double sigma = 0.4;
  double censoring_rate = 0.28;
  std::vector<std::string> arms = {"dgp",         "aft_mle",      "cox_mle",
                                   "aft_sr:risbs", "aft_sr:rcll",  "cox_sr:isbs",
                                   "np_sr:risbs",  "np_sr:risll"};
  int grid_intervals = 30;
  double eval_quantile = 0.5;
  double train_fraction = 0.8;
  FitConfig fit = recovery_fit_defaults();
  std::uint64_t seed = 1;
};

struct RecoveryRow {
  int repetition = 0;
  std::string arm;
  bool ok = true;
  std::string error;
  // beta_hat - beta per coefficient (NaN where the arm does not estimate it;
  // Cox arms cover beta_1..beta_3 on the AFT scale, Weibull family only).
  std::vector<double> beta_diff;
  double sigma_diff = std::numeric_limits<double>::quiet_NaN();
  // test-set scores at the evaluation quantile (raw scale, not x100)
  double risbs = std::numeric_limits<double>::quiet_NaN();
  double risll = std::numeric_limits<double>::quiet_NaN();
  double isbs = std::numeric_limits<double>::quiet_NaN();
};

struct RecoveryReport {
  RecoveryConfig config;
  std::vector<RecoveryRow> rows;
};

RecoveryReport run_recovery(const RecoveryConfig& config);
void write_recovery_csv(const std::filesystem::path& path, const RecoveryReport& report);
std::string render_recovery_table(const RecoveryReport& report);

// ---- benchmark ----

// Methods: "km", "cox_mle", "aft_mle", "aft_sr:<rule>", "np_sr:<rule>",
// "cox_sr:<rule>". Each repetition draws a fresh dataset from the DGP (or
// re-splits the CSV dataset) with its derived seed.
struct BenchmarkConfig {
  DgpConfig dgp;  // used unless csv is set
  std::optional<std::filesystem::path> csv;
  int repetitions = 25;
  double train_fraction = 0.8;
  std::vector<std::string> methods = {"km", "cox_mle", "aft_sr:scrps", "aft_sr:risbs",
                                      "np_sr:risbs"};
  std::vector<double> quantiles = {0.25, 0.5, 0.75};
  ScoringRuleKind eval_rule = ScoringRuleKind::risbs;
  Family family = Family::lognormal;  // parametric arms
  int grid_intervals = 30;
  std::vector<int> hidden = {32, 32};
  FitConfig fit;
  bool tune = false;  // random search on the train split before the final fit
  int tune_budget = 25;
  std::uint64_t seed = 1;
};

struct BenchmarkRow {
  int repetition = 0;
  std::string method;
  double quantile = 0.0;
  bool ok = true;
  std::string error;
  double score = std::numeric_limits<double>::quiet_NaN();  // raw scale
  double tau_star = std::numeric_limits<double>::quiet_NaN();
  double fit_ms = 0.0;  // per (repetition, method), repeated on its rows
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<BenchmarkRow> rows;
  double total_wall_ms = 0.0;
};

struct Aggregate {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  int count = 0;
};

Aggregate aggregate_scores(const std::vector<double>& scores);

BenchmarkReport run_benchmark(const BenchmarkConfig& config);
Aggregate benchmark_aggregate(const BenchmarkReport& report, const std::string& method,
                              double quantile);
void write_benchmark_csv(const std::filesystem::path& path, const BenchmarkReport& report);
std::string render_benchmark_table(const BenchmarkReport& report);  // mean (sd), x100

// ---- competing-risks benchmark ----

// Methods: "aj" and "cr_sr". Scores are per cause; the evaluation rule is
// applied to each cause's CIF with cause-specific indicators.
struct CrBenchmarkConfig {
  DgpConfig dgp;  // kind = competing
  int repetitions = 25;
  double train_fraction = 0.8;
  std::vector<std::string> methods = {"aj", "cr_sr"};
  std::vector<double> quantiles = {0.25, 0.5, 0.75};
  ScoringRuleKind eval_rule = ScoringRuleKind::isbs;
  CrFitOptions cr;
  int grid_intervals = 30;
  std::uint64_t seed = 1;
};

struct CrBenchmarkRow {
  int repetition = 0;
  std::string method;
  int cause = 1;
  double quantile = 0.0;
  bool ok = true;
  std::string error;
  double score = std::numeric_limits<double>::quiet_NaN();
  double tau_star = std::numeric_limits<double>::quiet_NaN();
  double fit_ms = 0.0;
};

struct CrBenchmarkReport {
  CrBenchmarkConfig config;
  std::vector<CrBenchmarkRow> rows;
  double total_wall_ms = 0.0;
};

CrBenchmarkReport run_cr_benchmark(const CrBenchmarkConfig& config);
Aggregate cr_benchmark_aggregate(const CrBenchmarkReport& report, const std::string& method,
                                 int cause, double quantile);
void write_cr_benchmark_csv(const std::filesystem::path& path, const CrBenchmarkReport& report);
std::string render_cr_benchmark_table(const CrBenchmarkReport& report);

// ---- scoring-rule ablation ----

// Trains the parametric model under each training rule, evaluates every fit
// under every evaluation rule at the evaluation quantile.
struct AblationConfig {
  DgpConfig dgp;  // default: the complex DGP
  int repetitions = 25;
  double train_fraction = 0.8;
  std::vector<ScoringRuleKind> train_rules = {ScoringRuleKind::risbs, ScoringRuleKind::risll,
                                              ScoringRuleKind::rcll, ScoringRuleKind::isbs};
  std::vector<ScoringRuleKind> eval_rules = {ScoringRuleKind::risbs, ScoringRuleKind::risll,
                                             ScoringRuleKind::rcll, ScoringRuleKind::isbs};
  double eval_quantile = 0.75;
  Family family = Family::lognormal;
  int grid_intervals = 30;
  std::vector<int> hidden = {32, 32};
  FitConfig fit;
  std::uint64_t seed = 1;

  // Cross-rule comparisons need every arm trained to convergence; the log-loss
  // validation traces are noisy enough that the optimizer's stock patience
  // stops some fits early and inflates the spread.
  AblationConfig() {
    dgp.kind = DgpKind::complex_nonlinear;
    fit.patience = 30;
  }
};

struct AblationRow {
  int repetition = 0;
  ScoringRuleKind train_rule = ScoringRuleKind::risbs;
  ScoringRuleKind eval_rule = ScoringRuleKind::risbs;
  bool ok = true;
  std::string error;
  double score = std::numeric_limits<double>::quiet_NaN();  // raw; RCLL can be negative
};

struct AblationReport {
  AblationConfig config;
  std::vector<AblationRow> rows;
};

AblationReport run_ablation(const AblationConfig& config);
Aggregate ablation_aggregate(const AblationReport& report, ScoringRuleKind train_rule,
                             ScoringRuleKind eval_rule);
void write_ablation_csv(const std::filesystem::path& path, const AblationReport& report);
// Matrix of mean (sd): evaluation rules down, training rules across. Scores
// x100 except the RCLL row, which is reported raw (mean negative
// log-likelihood, no sign flip).
std::string render_ablation_table(const AblationReport& report);

// ---- random search ----

struct SearchSpace {
  double lr_lo = 1e-3, lr_hi = 1e-1;  // log-uniform
  double l2_lo = 1e-6, l2_hi = 1e-2;  // log-uniform
  std::vector<int> widths = {16, 32, 64};
  std::vector<int> depths = {1, 2};
  std::vector<int> grid_choices = {10, 20, 30, 50};
};

struct SearchTrial {
  double lr = 0.0;
  double l2 = 0.0;
  int width = 0;
  int depth = 0;
  int grid_intervals = 0;
  bool ok = true;
  std::string error;
  double val_score = std::numeric_limits<double>::quiet_NaN();  // validation RISBS at Q50
};

struct SearchResult {
  SearchTrial best;
  std::vector<SearchTrial> trials;  // evaluated configurations, sample order
};

// Samples `budget` configurations (duplicates are skipped without a refit),
// fits `method` ("aft_sr", "np_sr", "cox_sr") with `rule` on an inner 80/20
// split of train, and returns the trial minimizing validation RISBS at Q50.
SearchResult random_search(const SurvivalDataset& train, const std::string& method,
                           const ScoringRule& rule, Family family, const SearchSpace& space,
                           int budget, std::uint64_t seed, const FitConfig& base);

}  // namespace survscore
