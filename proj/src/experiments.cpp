#include "survscore/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "survscore/util.hpp"

namespace survscore {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

ScoringRule make_rule(ScoringRuleKind kind) {
  ScoringRule rule;
  rule.kind = kind;
  rule.risll_orientation = RisllOrientation::conventional;
  return rule;
}

// "aft_sr:rcll" -> {"aft_sr", rcll}; a bare name keeps the method default.
std::pair<std::string, ScoringRuleKind> parse_method(const std::string& name,
                                                     ScoringRuleKind fallback) {
  const auto colon = name.find(':');
  if (colon == std::string::npos) return {name, fallback};
  return {name.substr(0, colon), rule_from_string(name.substr(colon + 1))};
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

// Repetition jobs run as independent threads; rows are stitched back together
// in repetition order, so scheduling cannot affect the report.
template <typename Row, typename Job>
std::vector<Row> run_reps(int repetitions, Job&& job) {
  std::vector<std::future<std::vector<Row>>> futures;
  futures.reserve(static_cast<std::size_t>(std::max(repetitions, 0)));
  for (int r = 0; r < repetitions; ++r) {
    futures.push_back(std::async(std::launch::async, job, r));
  }
  std::vector<Row> rows;
  for (auto& f : futures) {
    auto part = f.get();
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

using PredictFn = std::function<SurvivalPrediction(std::span<const double>)>;

std::vector<PredictionAccessor> accessors_on(const SurvivalDataset& data,
                                             const PredictFn& predict) {
  std::vector<PredictionAccessor> preds;
  preds.reserve(static_cast<std::size_t>(data.n()));
  for (const auto& rec : data.records()) preds.push_back(predict(rec.features).accessor());
  return preds;
}

struct MethodSettings {
  Family family = Family::lognormal;
  std::vector<int> hidden = {32, 32};
  int grid_intervals = 30;
  FitConfig fit;
};

// Fits one named method on the train split and returns its predictor.
PredictFn fit_method(const std::string& base, ScoringRuleKind rule_kind,
                     const SurvivalDataset& train, const MethodSettings& settings) {
  const TimeGrid grid = make_grid(train, settings.grid_intervals, 0.9);
  const DistributionSpec spec{settings.family};

  if (base == "km") {
    const KmModel model = km_model(train);
    return [model](std::span<const double>) { return predict_km(model); };
  }
  if (base == "cox_mle") {
    const CoxModel model = fit_cox_mle(train);
    return [model, grid](std::span<const double> x) { return predict_cox(model, x, grid); };
  }
  if (base == "aft_mle") {
    const ParametricSurvivalModel model = fit_aft_mle(train, spec);
    return [model, grid](std::span<const double> x) {
      return predict_parametric(model, x, grid);
    };
  }

  ScoringFitOptions options;
  options.rule = make_rule(rule_kind);
  options.fit = settings.fit;
  options.hidden = settings.hidden;
  if (base == "aft_sr") {
    auto [model, result] = fit_parametric_scoring(train, spec, grid, options);
    return [model = std::move(model), grid](std::span<const double> x) {
      return predict_parametric(model, x, grid);
    };
  }
  if (base == "np_sr") {
    auto [model, result] = fit_increment_scoring(train, grid, options);
    return [model = std::move(model)](std::span<const double> x) {
      return predict_increment(model, x);
    };
  }
  if (base == "cox_sr") {
    auto [model, result] = fit_cox_scoring(train, grid, options);
    return [model = std::move(model)](std::span<const double> x) {
      return predict_cox_sr(model, x);
    };
  }
  throw std::invalid_argument("unknown method: " + base);
}

std::string csv_cell(double v) { return std::isnan(v) ? std::string("nan") : format_double(v); }

}  // namespace

Aggregate aggregate_scores(const std::vector<double>& scores) {
  Aggregate agg;
  agg.count = static_cast<int>(scores.size());
  if (agg.count == 0) return agg;
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= agg.count;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  agg.mean = mean;
  agg.sd = agg.count > 1 ? std::sqrt(ss / (agg.count - 1)) : 0.0;
  return agg;
}

// ---- parameter recovery ----

FitConfig recovery_fit_defaults() {
  FitConfig fit;
  fit.learning_rate = 0.05;
  fit.batch_size = 256;
  fit.max_epochs = 500;
  fit.patience = 30;
  return fit;
}

namespace {

// Truth model on the simple DGP: linear trunk, shared scale.
ParametricSurvivalModel oracle_model(const RecoveryConfig& cfg) {
  ParametricSurvivalModel model;
  model.spec = DistributionSpec{cfg.family};
  model.trunk = MlpSpec{3, {}, 1, Activation::tanh};
  model.constant_scale = true;
  register_mlp_params(model.trunk, model.params, "trunk");
  model.params.add_slice("log_scale", 1, false);
  auto w = model.params.slice("trunk.W0");
  for (std::size_t j = 0; j < 3; ++j) w[j] = cfg.beta[j + 1];
  model.params.slice("trunk.b0")[0] = cfg.beta[0];
  model.params.slice("log_scale")[0] = std::log(cfg.sigma);
  return model;
}

// beta_hat - beta and sigma_hat - sigma from a linear parametric model in the
// shared layout.
void fill_aft_diffs(const ParametricSurvivalModel& model, const RecoveryConfig& cfg,
                    RecoveryRow& row) {
  const auto w = model.params.slice("trunk.W0");
  row.beta_diff.assign(4, kNan);
  row.beta_diff[0] = model.params.slice("trunk.b0")[0] - cfg.beta[0];
  for (std::size_t j = 0; j < 3; ++j) row.beta_diff[j + 1] = w[j] - cfg.beta[j + 1];
  row.sigma_diff = std::exp(model.params.slice("log_scale")[0]) - cfg.sigma;
}

// Cox coefficients mapped to the AFT scale (-sigma * beta_cox); only valid
// under the Weibull family, where proportional hazards holds exactly.
void fill_cox_diffs(std::span<const double> beta_cox, const RecoveryConfig& cfg,
                    RecoveryRow& row) {
  if (cfg.family != Family::weibull) return;
  row.beta_diff.assign(4, kNan);
  for (std::size_t j = 0; j < 3; ++j) {
    row.beta_diff[j + 1] = -cfg.sigma * beta_cox[j] - cfg.beta[j + 1];
  }
}

std::vector<RecoveryRow> recovery_rep(const RecoveryConfig& cfg, int rep) {
  const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
  DgpConfig dgp;
  dgp.kind = DgpKind::aft_simple;
  dgp.family = cfg.family;
  dgp.n = cfg.n;
  dgp.beta = cfg.beta;
  dgp.sigma = cfg.sigma;
  dgp.censoring_rate = cfg.censoring_rate;
  dgp.seed = rep_seed;
  const SurvivalDataset data = simulate(dgp);
  const SplitResult parts = split(data, cfg.train_fraction, derive_seed(rep_seed, 101));
  const StepFunction g_test = kaplan_meier(parts.test, KmTarget::censoring);
  const TimeGrid grid = make_grid(parts.train, cfg.grid_intervals, 0.9);
  const DistributionSpec spec{cfg.family};

  std::vector<RecoveryRow> rows;
  for (const auto& arm : cfg.arms) {
    RecoveryRow row;
    row.repetition = rep;
    row.arm = arm;
    try {
      const auto [base, rule_kind] = parse_method(arm, ScoringRuleKind::risbs);
      PredictFn predict;
      FitConfig fit_cfg = cfg.fit;
      fit_cfg.seed = derive_seed(rep_seed, 17 + std::hash<std::string>{}(arm) % 1000);

      if (base == "dgp") {
        const ParametricSurvivalModel truth = oracle_model(cfg);
        row.beta_diff.assign(4, 0.0);
        row.sigma_diff = 0.0;
        predict = [truth, grid](std::span<const double> x) {
          return predict_parametric(truth, x, grid);
        };
      } else if (base == "aft_mle") {
        const ParametricSurvivalModel model = fit_aft_mle(parts.train, spec);
        fill_aft_diffs(model, cfg, row);
        predict = [model, grid](std::span<const double> x) {
          return predict_parametric(model, x, grid);
        };
      } else if (base == "aft_sr") {
        ScoringFitOptions options;
        options.rule = make_rule(rule_kind);
        options.fit = fit_cfg;
        options.hidden = {};  // linear trunk: coefficients are the weights
        options.constant_scale = true;
        auto [model, result] = fit_parametric_scoring(parts.train, spec, grid, options);
        fill_aft_diffs(model, cfg, row);
        predict = [model = std::move(model), grid](std::span<const double> x) {
          return predict_parametric(model, x, grid);
        };
      } else if (base == "cox_mle") {
        const CoxModel model = fit_cox_mle(parts.train);
        fill_cox_diffs(model.beta, cfg, row);
        predict = [model, grid](std::span<const double> x) {
          return predict_cox(model, x, grid);
        };
      } else if (base == "cox_sr") {
        ScoringFitOptions options;
        options.rule = make_rule(rule_kind == ScoringRuleKind::rcll ? ScoringRuleKind::isbs
                                                                    : rule_kind);
        options.fit = fit_cfg;
        auto [model, result] = fit_cox_scoring(parts.train, grid, options);
        fill_cox_diffs(model.params.slice("beta.W"), cfg, row);
        predict = [model = std::move(model)](std::span<const double> x) {
          return predict_cox_sr(model, x);
        };
      } else if (base == "np_sr") {
        ScoringFitOptions options;
        options.rule = make_rule(rule_kind);
        options.fit = fit_cfg;
        auto [model, result] = fit_increment_scoring(parts.train, grid, options);
        predict = [model = std::move(model)](std::span<const double> x) {
          return predict_increment(model, x);
        };
      } else {
        throw std::invalid_argument("unknown recovery arm: " + arm);
      }

      const auto preds = accessors_on(parts.test, predict);
      row.risbs = evaluate_at_quantile(make_rule(ScoringRuleKind::risbs), parts.test, preds,
                                       g_test, cfg.eval_quantile);
      row.risll = evaluate_at_quantile(make_rule(ScoringRuleKind::risll), parts.test, preds,
                                       g_test, cfg.eval_quantile);
      row.isbs = evaluate_at_quantile(make_rule(ScoringRuleKind::isbs), parts.test, preds,
                                      g_test, cfg.eval_quantile);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

RecoveryReport run_recovery(const RecoveryConfig& config) {
  RecoveryReport report;
  report.config = config;
  report.rows = run_reps<RecoveryRow>(
      config.repetitions, [&config](int rep) { return recovery_rep(config, rep); });
  return report;
}

void write_recovery_csv(const std::filesystem::path& path, const RecoveryReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  out << "repetition,arm,ok,error,beta0_diff,beta1_diff,beta2_diff,beta3_diff,sigma_diff,"
         "risbs,risll,isbs\n";
  for (const auto& row : report.rows) {
    out << row.repetition << ',' << row.arm << ',' << (row.ok ? 1 : 0) << ',' << '"'
        << row.error << '"';
    for (std::size_t j = 0; j < 4; ++j) {
      out << ',' << (j < row.beta_diff.size() ? csv_cell(row.beta_diff[j]) : std::string("nan"));
    }
    out << ',' << csv_cell(row.sigma_diff) << ',' << csv_cell(row.risbs) << ','
        << csv_cell(row.risll) << ',' << csv_cell(row.isbs) << '\n';
  }
}

std::string render_recovery_table(const RecoveryReport& report) {
  std::ostringstream out;
  out << "parameter recovery: " << to_string(report.config.family) << ", "
      << report.config.repetitions << " repetitions, n = " << report.config.n << "\n";
  out << "arm              mean|b0-b0*| mean|b1-b1*| mean|b2-b2*| mean|b3-b3*| mean|s-s*|  "
         "RISBSx100  RISLLx100  ISBSx100\n";
  for (const auto& arm : report.config.arms) {
    std::vector<std::vector<double>> beta_abs(4);
    std::vector<double> sigma_abs, risbs, risll, isbs;
    for (const auto& row : report.rows) {
      if (row.arm != arm || !row.ok) continue;
      for (std::size_t j = 0; j < 4 && j < row.beta_diff.size(); ++j) {
        if (!std::isnan(row.beta_diff[j])) beta_abs[j].push_back(std::abs(row.beta_diff[j]));
      }
      if (!std::isnan(row.sigma_diff)) sigma_abs.push_back(std::abs(row.sigma_diff));
      if (!std::isnan(row.risbs)) risbs.push_back(row.risbs);
      if (!std::isnan(row.risll)) risll.push_back(row.risll);
      if (!std::isnan(row.isbs)) isbs.push_back(row.isbs);
    }
    out << arm;
    for (std::size_t pad = arm.size(); pad < 17; ++pad) out << ' ';
    const auto cell = [&](const std::vector<double>& xs, double scale, int decimals) {
      const Aggregate agg = aggregate_scores(xs);
      return agg.count == 0 ? std::string("     --") : format_fixed(agg.mean * scale, decimals);
    };
    out << cell(beta_abs[0], 1, 4) << "       " << cell(beta_abs[1], 1, 4) << "       "
        << cell(beta_abs[2], 1, 4) << "       " << cell(beta_abs[3], 1, 4) << "       "
        << cell(sigma_abs, 1, 4) << "      " << cell(risbs, 100, 2) << "      "
        << cell(risll, 100, 2) << "      " << cell(isbs, 100, 2) << "\n";
  }
  return out.str();
}

// ---- benchmark ----

namespace {

std::vector<BenchmarkRow> benchmark_rep(const BenchmarkConfig& cfg,
                                        const SurvivalDataset* fixed_data, int rep) {
  const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
  SurvivalDataset data;
  if (fixed_data != nullptr) {
    data = *fixed_data;
  } else {
    DgpConfig dgp = cfg.dgp;
    dgp.seed = rep_seed;
    data = simulate(dgp);
  }
  const SplitResult parts = split(data, cfg.train_fraction, derive_seed(rep_seed, 101));
  const StepFunction g_test = kaplan_meier(parts.test, KmTarget::censoring);

  std::vector<BenchmarkRow> rows;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    const std::string& method = cfg.methods[m];
    const auto start = std::chrono::steady_clock::now();
    PredictFn predict;
    std::string fit_error;
    try {
      const auto [base, rule_kind] = parse_method(method, ScoringRuleKind::risbs);
      MethodSettings settings;
      settings.family = cfg.family;
      settings.hidden = cfg.hidden;
      settings.grid_intervals = cfg.grid_intervals;
      settings.fit = cfg.fit;
      settings.fit.seed = derive_seed(rep_seed, 17 + m);

      if (cfg.tune && (base == "aft_sr" || base == "np_sr" || base == "cox_sr")) {
        const SearchResult search =
            random_search(parts.train, base, make_rule(rule_kind), cfg.family, SearchSpace{},
                          cfg.tune_budget, derive_seed(rep_seed, 7000 + m), settings.fit);
        if (search.best.ok) {
          settings.fit.learning_rate = search.best.lr;
          settings.fit.l2 = search.best.l2;
          settings.hidden.assign(static_cast<std::size_t>(search.best.depth),
                                 search.best.width);
          settings.grid_intervals = search.best.grid_intervals;
        }
      }
      predict = fit_method(base, rule_kind, parts.train, settings);
    } catch (const std::exception& e) {
      fit_error = e.what();
    }
    const double fit_ms = elapsed_ms(start);

    std::vector<PredictionAccessor> preds;
    if (fit_error.empty()) preds = accessors_on(parts.test, predict);
    for (double q : cfg.quantiles) {
      BenchmarkRow row;
      row.repetition = rep;
      row.method = method;
      row.quantile = q;
      row.fit_ms = fit_ms;
      if (!fit_error.empty()) {
        row.ok = false;
        row.error = fit_error;
      } else {
        try {
          row.score = evaluate_at_quantile(make_rule(cfg.eval_rule), parts.test, preds, g_test,
                                           q, EvalOptions{}, &row.tau_star);
        } catch (const std::exception& e) {
          row.ok = false;
          row.error = e.what();
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  BenchmarkReport report;
  report.config = config;
  SurvivalDataset fixed;
  const SurvivalDataset* fixed_ptr = nullptr;
  if (config.csv) {
    fixed = load_csv(*config.csv);
    fixed_ptr = &fixed;
  }
  report.rows = run_reps<BenchmarkRow>(config.repetitions, [&config, fixed_ptr](int rep) {
    return benchmark_rep(config, fixed_ptr, rep);
  });
  report.total_wall_ms = elapsed_ms(start);
  return report;
}

Aggregate benchmark_aggregate(const BenchmarkReport& report, const std::string& method,
                              double quantile) {
  std::vector<double> scores;
  for (const auto& row : report.rows) {
    if (row.ok && row.method == method && row.quantile == quantile) scores.push_back(row.score);
  }
  return aggregate_scores(scores);
}

void write_benchmark_csv(const std::filesystem::path& path, const BenchmarkReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  // Timing stays out of the file so reports are seed-deterministic bytes.
  out << "repetition,method,quantile,ok,error,score,tau_star\n";
  for (const auto& row : report.rows) {
    out << row.repetition << ',' << row.method << ',' << format_double(row.quantile) << ','
        << (row.ok ? 1 : 0) << ',' << '"' << row.error << '"' << ',' << csv_cell(row.score)
        << ',' << csv_cell(row.tau_star) << '\n';
  }
}

std::string render_benchmark_table(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "benchmark (" << to_string(report.config.eval_rule) << " x100, mean (sd) over "
      << report.config.repetitions << " splits)\n";
  out << "method           ";
  for (double q : report.config.quantiles) out << "Q" << static_cast<int>(q * 100) << "            ";
  out << "\n";
  for (const auto& method : report.config.methods) {
    out << method;
    for (std::size_t pad = method.size(); pad < 17; ++pad) out << ' ';
    for (double q : report.config.quantiles) {
      const Aggregate agg = benchmark_aggregate(report, method, q);
      if (agg.count == 0) {
        out << "--             ";
      } else {
        out << format_fixed(agg.mean * 100, 1) << " (" << format_fixed(agg.sd * 100, 2) << ")    ";
      }
    }
    out << "\n";
  }
  return out.str();
}

// ---- competing-risks benchmark ----

namespace {

std::vector<CrBenchmarkRow> cr_benchmark_rep(const CrBenchmarkConfig& cfg, int rep) {
  const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
  DgpConfig dgp = cfg.dgp;
  dgp.seed = rep_seed;
  const SurvivalDataset data = simulate(dgp);
  const SplitResult parts = split(data, cfg.train_fraction, derive_seed(rep_seed, 101));
  const StepFunction g_test = kaplan_meier(parts.test, KmTarget::censoring);
  const TimeGrid grid = make_grid(parts.train, cfg.grid_intervals, 0.9);
  const int num_causes = data.num_causes();

  std::vector<CrBenchmarkRow> rows;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    const std::string& method = cfg.methods[m];
    const auto start = std::chrono::steady_clock::now();
    std::string fit_error;
    // per-record accessors, indexed [record][cause]
    std::vector<std::vector<CifAccessor>> preds;
    try {
      if (method == "aj") {
        const std::vector<StepFunction> cifs = aalen_johansen(parts.train);
        std::vector<CifAccessor> shared;
        for (const auto& cif : cifs) {
          CifAccessor acc;
          acc.cif = [cif](double t) { return cif(t); };
          shared.push_back(std::move(acc));
        }
        preds.assign(static_cast<std::size_t>(parts.test.n()), shared);
      } else if (method == "cr_sr") {
        CrFitOptions options = cfg.cr;
        options.fit.seed = derive_seed(rep_seed, 17 + m);
        auto [model, result] = fit_cr(parts.train, grid, options);
        preds.reserve(static_cast<std::size_t>(parts.test.n()));
        for (const auto& rec : parts.test.records()) {
          preds.push_back(predict_cif(model, rec.features).accessors());
        }
      } else {
        throw std::invalid_argument("unknown competing-risks method: " + method);
      }
    } catch (const std::exception& e) {
      fit_error = e.what();
    }
    const double fit_ms = elapsed_ms(start);

    for (int cause = 1; cause <= num_causes; ++cause) {
      std::vector<CifAccessor> cause_preds;
      if (fit_error.empty()) {
        cause_preds.reserve(preds.size());
        for (const auto& per_record : preds) {
          cause_preds.push_back(per_record[static_cast<std::size_t>(cause - 1)]);
        }
      }
      for (double q : cfg.quantiles) {
        CrBenchmarkRow row;
        row.repetition = rep;
        row.method = method;
        row.cause = cause;
        row.quantile = q;
        row.fit_ms = fit_ms;
        if (!fit_error.empty()) {
          row.ok = false;
          row.error = fit_error;
        } else {
          try {
            row.score = evaluate_cif_at_quantile(make_rule(cfg.eval_rule), parts.test,
                                                 cause_preds, g_test, q, cause, EvalOptions{},
                                                 &row.tau_star);
          } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
          }
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace

CrBenchmarkReport run_cr_benchmark(const CrBenchmarkConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  CrBenchmarkReport report;
  report.config = config;
  report.rows = run_reps<CrBenchmarkRow>(
      config.repetitions, [&config](int rep) { return cr_benchmark_rep(config, rep); });
  report.total_wall_ms = elapsed_ms(start);
  return report;
}

Aggregate cr_benchmark_aggregate(const CrBenchmarkReport& report, const std::string& method,
                                 int cause, double quantile) {
  std::vector<double> scores;
  for (const auto& row : report.rows) {
    if (row.ok && row.method == method && row.cause == cause && row.quantile == quantile) {
      scores.push_back(row.score);
    }
  }
  return aggregate_scores(scores);
}

void write_cr_benchmark_csv(const std::filesystem::path& path, const CrBenchmarkReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  out << "repetition,method,cause,quantile,ok,error,score,tau_star\n";
  for (const auto& row : report.rows) {
    out << row.repetition << ',' << row.method << ',' << row.cause << ','
        << format_double(row.quantile) << ',' << (row.ok ? 1 : 0) << ',' << '"' << row.error
        << '"' << ',' << csv_cell(row.score) << ',' << csv_cell(row.tau_star) << '\n';
  }
}

std::string render_cr_benchmark_table(const CrBenchmarkReport& report) {
  std::ostringstream out;
  out << "competing-risks benchmark (" << to_string(report.config.eval_rule)
      << " x100, mean (sd) over " << report.config.repetitions << " splits)\n";
  int num_causes = 1;
  for (const auto& row : report.rows) num_causes = std::max(num_causes, row.cause);
  out << "method / cause      ";
  for (double q : report.config.quantiles) out << "Q" << static_cast<int>(q * 100) << "            ";
  out << "\n";
  for (const auto& method : report.config.methods) {
    for (int cause = 1; cause <= num_causes; ++cause) {
      const std::string label = method + " (cause " + std::to_string(cause) + ")";
      out << label;
      for (std::size_t pad = label.size(); pad < 20; ++pad) out << ' ';
      for (double q : report.config.quantiles) {
        const Aggregate agg = cr_benchmark_aggregate(report, method, cause, q);
        if (agg.count == 0) {
          out << "--             ";
        } else {
          out << format_fixed(agg.mean * 100, 1) << " (" << format_fixed(agg.sd * 100, 2)
              << ")    ";
        }
      }
      out << "\n";
    }
  }
  return out.str();
}

// ---- ablation ----

namespace {

std::vector<AblationRow> ablation_rep(const AblationConfig& cfg, int rep) {
  const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
  DgpConfig dgp = cfg.dgp;
  dgp.seed = rep_seed;
  const SurvivalDataset data = simulate(dgp);
  const SplitResult parts = split(data, cfg.train_fraction, derive_seed(rep_seed, 101));
  const StepFunction g_test = kaplan_meier(parts.test, KmTarget::censoring);
  const TimeGrid grid = make_grid(parts.train, cfg.grid_intervals, 0.9);
  const DistributionSpec spec{cfg.family};

  std::vector<AblationRow> rows;
  for (std::size_t tr = 0; tr < cfg.train_rules.size(); ++tr) {
    const ScoringRuleKind train_rule = cfg.train_rules[tr];
    std::string fit_error;
    std::vector<PredictionAccessor> preds;
    try {
      ScoringFitOptions options;
      options.rule = make_rule(train_rule);
      options.fit = cfg.fit;
      options.fit.seed = derive_seed(rep_seed, 17 + tr);
      options.hidden = cfg.hidden;
      auto [model, result] = fit_parametric_scoring(parts.train, spec, grid, options);
      const ParametricSurvivalModel fitted = std::move(model);
      preds = accessors_on(parts.test, [&fitted, &grid](std::span<const double> x) {
        return predict_parametric(fitted, x, grid);
      });
    } catch (const std::exception& e) {
      fit_error = e.what();
    }
    for (ScoringRuleKind eval_rule : cfg.eval_rules) {
      AblationRow row;
      row.repetition = rep;
      row.train_rule = train_rule;
      row.eval_rule = eval_rule;
      if (!fit_error.empty()) {
        row.ok = false;
        row.error = fit_error;
      } else {
        try {
          row.score = evaluate_at_quantile(make_rule(eval_rule), parts.test, preds, g_test,
                                           cfg.eval_quantile);
        } catch (const std::exception& e) {
          row.ok = false;
          row.error = e.what();
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

AblationReport run_ablation(const AblationConfig& config) {
  AblationReport report;
  report.config = config;
  report.rows = run_reps<AblationRow>(
      config.repetitions, [&config](int rep) { return ablation_rep(config, rep); });
  return report;
}

Aggregate ablation_aggregate(const AblationReport& report, ScoringRuleKind train_rule,
                             ScoringRuleKind eval_rule) {
  std::vector<double> scores;
  for (const auto& row : report.rows) {
    if (row.ok && row.train_rule == train_rule && row.eval_rule == eval_rule) {
      scores.push_back(row.score);
    }
  }
  return aggregate_scores(scores);
}

void write_ablation_csv(const std::filesystem::path& path, const AblationReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  out << "repetition,train_rule,eval_rule,ok,error,score\n";
  for (const auto& row : report.rows) {
    out << row.repetition << ',' << to_string(row.train_rule) << ',' << to_string(row.eval_rule)
        << ',' << (row.ok ? 1 : 0) << ',' << '"' << row.error << '"' << ','
        << csv_cell(row.score) << '\n';
  }
}

std::string render_ablation_table(const AblationReport& report) {
  std::ostringstream out;
  out << "ablation (train rule across, evaluation rule down; mean (sd) over "
      << report.config.repetitions << " splits; x100 except raw RCLL)\n";
  out << "eval \\ train   ";
  for (ScoringRuleKind tr : report.config.train_rules) {
    std::string label = to_string(tr);
    out << label;
    for (std::size_t pad = label.size(); pad < 15; ++pad) out << ' ';
  }
  out << "\n";
  for (ScoringRuleKind ev : report.config.eval_rules) {
    std::string label = to_string(ev);
    out << label;
    for (std::size_t pad = label.size(); pad < 15; ++pad) out << ' ';
    const bool raw = ev == ScoringRuleKind::rcll;
    for (ScoringRuleKind tr : report.config.train_rules) {
      const Aggregate agg = ablation_aggregate(report, tr, ev);
      if (agg.count == 0) {
        out << "--             ";
      } else {
        const double scale = raw ? 1.0 : 100.0;
        out << format_fixed(agg.mean * scale, 2) << " (" << format_fixed(agg.sd * scale, 2)
            << ")   ";
      }
    }
    out << "\n";
  }
  return out.str();
}

// ---- random search ----

namespace {

double sample_log_uniform(double lo, double hi, std::mt19937_64& rng) {
  if (!(hi > lo)) return lo;
  std::uniform_real_distribution<double> unif(std::log(lo), std::log(hi));
  return std::exp(unif(rng));
}

int pick(const std::vector<int>& choices, std::mt19937_64& rng) {
  if (choices.empty()) throw std::invalid_argument("random search: empty choice list");
  if (choices.size() == 1) return choices[0];
  std::uniform_int_distribution<std::size_t> unif(0, choices.size() - 1);
  return choices[unif(rng)];
}

}  // namespace

SearchResult random_search(const SurvivalDataset& train, const std::string& method,
                           const ScoringRule& rule, Family family, const SearchSpace& space,
                           int budget, std::uint64_t seed, const FitConfig& base) {
  if (budget < 1) throw std::invalid_argument("random search: budget must be >= 1");
  std::mt19937_64 rng(seed);
  const SplitResult inner = split(train, 0.8, derive_seed(seed, 1));
  const StepFunction g_val = kaplan_meier(inner.test, KmTarget::censoring);

  SearchResult result;
  for (int i = 0; i < budget; ++i) {
    SearchTrial trial;
    trial.lr = sample_log_uniform(space.lr_lo, space.lr_hi, rng);
    trial.l2 = sample_log_uniform(space.l2_lo, space.l2_hi, rng);
    trial.width = pick(space.widths, rng);
    trial.depth = pick(space.depths, rng);
    trial.grid_intervals = pick(space.grid_choices, rng);

    bool seen = false;
    for (const auto& done : result.trials) {
      if (done.lr == trial.lr && done.l2 == trial.l2 && done.width == trial.width &&
          done.depth == trial.depth && done.grid_intervals == trial.grid_intervals) {
        seen = true;
        break;
      }
    }
    if (seen) continue;  // duplicate sample, no refit

    try {
      MethodSettings settings;
      settings.family = family;
      settings.hidden.assign(static_cast<std::size_t>(trial.depth), trial.width);
      settings.grid_intervals = trial.grid_intervals;
      settings.fit = base;
      settings.fit.learning_rate = trial.lr;
      settings.fit.l2 = trial.l2;
      settings.fit.seed = derive_seed(seed, 100 + static_cast<std::uint64_t>(i));
      const PredictFn predict = fit_method(method, rule.kind, inner.train, settings);
      const auto preds = accessors_on(inner.test, predict);
      trial.val_score = evaluate_at_quantile(make_rule(ScoringRuleKind::risbs), inner.test,
                                             preds, g_val, 0.5);
    } catch (const std::exception& e) {
      trial.ok = false;
      trial.error = e.what();
    }
    result.trials.push_back(trial);
  }

  result.best = result.trials.front();
  for (const auto& trial : result.trials) {
    if (!trial.ok) continue;
    if (!result.best.ok || trial.val_score < result.best.val_score) result.best = trial;
  }
  return result;
}

}  // namespace survscore
