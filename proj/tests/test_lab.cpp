#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "survscore/experiments.hpp"
#include "survscore/gradcheck.hpp"
#include "survscore/simulate.hpp"

using namespace survscore;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

FitConfig tiny_fit(std::uint64_t seed) {
  FitConfig fit;
  fit.learning_rate = 0.03;
  fit.batch_size = 32;
  fit.max_epochs = 15;
  fit.patience = 15;
  fit.seed = seed;
  return fit;
}

}  // namespace

TEST_CASE("a near-degenerate noise scale pins log time to the linear predictor") {
  DgpConfig config;
  config.kind = DgpKind::aft_simple;
  config.n = 200;
  config.beta = {2.0, 0.5, 0.2, 0.0};
  config.sigma = 1e-9;
  config.censoring_rate = 0.0;  // disabled
  config.seed = 3;
  const SurvivalDataset data = simulate(config);
  CHECK(data.p() == 3);
  for (const auto& r : data.records()) {
    CHECK(r.status == 1);
    const double eta =
        2.0 + 0.5 * r.features[0] + 0.2 * r.features[1] + 0.0 * r.features[2];
    CHECK(std::log(r.time) == doctest::Approx(eta).epsilon(1e-6));
  }
}

TEST_CASE("the calibrated censoring rate lands near its target") {
  DgpConfig config;
  config.n = 1500;
  config.censoring_rate = 0.28;
  config.seed = 11;
  const SurvivalDataset data = simulate(config);
  CHECK(data.censoring_fraction() >= 0.24);
  CHECK(data.censoring_fraction() <= 0.32);
}

TEST_CASE("uniform-censoring calibration solves the one-point problem exactly") {
  // With a single pilot time y and C ~ U(0, c), P(C < y) = y / c once c >= y,
  // so the target r solves to c_max = y / r.
  const double y = 3.7;
  CHECK(calibrate_uniform_censoring({y}, 0.5) == doctest::Approx(2.0 * y).epsilon(1e-4));
  CHECK(calibrate_uniform_censoring({y}, 0.25) ==
        doctest::Approx(4.0 * y).epsilon(1e-4));
  CHECK_THROWS((void)calibrate_uniform_censoring({}, 0.3));
  CHECK_THROWS((void)calibrate_uniform_censoring({y}, 1.2));
}

TEST_CASE("complex dgp residuals behave like centered gaussian noise") {
  const SurvivalDataset data = simulate_complex(2500, 7, 0.0);
  CHECK(data.p() == 4);
  double mean = 0.0, m2 = 0.0;
  for (const auto& r : data.records()) {
    const auto& x = r.features;
    const double eta = 2.0 + 0.5 * x[0] + std::sin(2.0 * x[1]) + 0.3 * x[0] * x[2] +
                       0.4 * x[3] * x[3];
    const double resid = std::log(r.time) - eta;
    mean += resid / data.n();
    m2 += resid * resid / data.n();
  }
  const double sd = std::sqrt(m2 - mean * mean);
  CHECK(std::abs(mean) < 3.0 * 0.4 / std::sqrt(static_cast<double>(data.n())));
  CHECK(sd == doctest::Approx(0.4).epsilon(0.1));
}

TEST_CASE("competing dgp produces both causes and respects the censoring target") {
  const SurvivalDataset data = simulate_cr(1500, 13);
  CHECK(data.num_causes() == 2);
  CHECK(data.event_count(1) > 0);
  CHECK(data.event_count(2) > 0);
  CHECK(data.censoring_fraction() >= 0.22);
  CHECK(data.censoring_fraction() <= 0.34);
  for (const auto& r : data.records()) CHECK(r.time > 0.0);
}

TEST_CASE("simulation is a pure function of its configuration") {
  DgpConfig config;
  config.n = 60;
  config.seed = 77;
  const SurvivalDataset a = simulate(config);
  const SurvivalDataset b = simulate(config);
  REQUIRE(a.n() == b.n());
  for (int i = 0; i < a.n(); ++i) {
    CHECK(a[i].time == b[i].time);
    CHECK(a[i].status == b[i].status);
    for (std::size_t f = 0; f < a[i].features.size(); ++f) {
      CHECK(a[i].features[f] == b[i].features[f]);
    }
  }
  config.seed = 78;
  const SurvivalDataset c = simulate(config);
  CHECK(a[0].time != c[0].time);
}

TEST_CASE("dgp validation rejects malformed configurations") {
  DgpConfig config;
  config.n = 0;
  CHECK_THROWS(config.validate());
  config = {};
  config.sigma = 0.0;
  CHECK_THROWS(config.validate());
  config = {};
  config.censoring_rate = 1.0;
  CHECK_THROWS(config.validate());
  config = {};
  config.beta = {1.0};
  CHECK_THROWS(config.validate());
}

TEST_CASE("recovery with zero repetitions returns an empty report") {
  RecoveryConfig config;
  config.repetitions = 0;
  config.arms = {"dgp"};
  const RecoveryReport report = run_recovery(config);
  CHECK(report.rows.empty());
}

TEST_CASE("recovery oracle arm is exact and the mle arm is close at modest n") {
  RecoveryConfig config;
  config.repetitions = 8;
  config.n = 300;
  config.arms = {"dgp", "aft_mle"};
  config.seed = 5;
  const RecoveryReport report = run_recovery(config);
  REQUIRE(report.rows.size() == 16);

  double mle_abs_b1 = 0.0;
  int mle_count = 0;
  for (const auto& row : report.rows) {
    REQUIRE(row.ok);
    REQUIRE(row.beta_diff.size() == 4);
    if (row.arm == "dgp") {
      for (double d : row.beta_diff) CHECK(d == 0.0);
      CHECK(row.sigma_diff == 0.0);
    } else {
      mle_abs_b1 += std::abs(row.beta_diff[1]);
      ++mle_count;
    }
  }
  REQUIRE(mle_count == 8);
  CHECK(mle_abs_b1 / mle_count <= 0.05);
}

TEST_CASE("benchmark emits one row per repetition, method, and quantile") {
  BenchmarkConfig config;
  config.dgp.n = 150;
  config.dgp.seed = 9;
  config.repetitions = 2;
  config.methods = {"km"};
  config.quantiles = {0.25, 0.5, 0.75};
  config.seed = 30;
  const BenchmarkReport report = run_benchmark(config);
  REQUIRE(report.rows.size() == 6);
  int index = 0;
  for (int rep = 0; rep < 2; ++rep) {
    for (double q : {0.25, 0.5, 0.75}) {
      CHECK(report.rows[index].repetition == rep);
      CHECK(report.rows[index].method == "km");
      CHECK(report.rows[index].quantile == q);
      CHECK(report.rows[index].ok);
      CHECK(std::isfinite(report.rows[index].score));
      ++index;
    }
  }

  // Aggregates recompute from the raw rows.
  const Aggregate agg = benchmark_aggregate(report, "km", 0.5);
  CHECK(agg.count == 2);
  const double mean = (report.rows[1].score + report.rows[4].score) / 2.0;
  CHECK(agg.mean == doctest::Approx(mean).epsilon(1e-15));
}

TEST_CASE("aggregate_scores reports the sample mean and sd") {
  const Aggregate agg = aggregate_scores({1.0, 2.0, 3.0, 4.0});
  CHECK(agg.count == 4);
  CHECK(agg.mean == doctest::Approx(2.5));
  CHECK(agg.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(aggregate_scores({}).count == 0);
}

TEST_CASE("identical seeds produce identical benchmark report files") {
  BenchmarkConfig config;
  config.dgp.n = 120;
  config.repetitions = 2;
  config.methods = {"km", "cox_mle"};
  config.quantiles = {0.5};
  config.seed = 44;

  const std::filesystem::path a =
      std::filesystem::temp_directory_path() / "survscore_bench_a.csv";
  const std::filesystem::path b =
      std::filesystem::temp_directory_path() / "survscore_bench_b.csv";
  write_benchmark_csv(a, run_benchmark(config));
  write_benchmark_csv(b, run_benchmark(config));
  const std::string bytes_a = slurp(a);
  const std::string bytes_b = slurp(b);
  CHECK(!bytes_a.empty());
  CHECK(bytes_a == bytes_b);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("competing benchmark scores every cause for every method") {
  CrBenchmarkConfig config;
  config.dgp.kind = DgpKind::competing;
  config.dgp.n = 150;
  config.repetitions = 1;
  config.methods = {"aj"};
  config.quantiles = {0.5};
  config.seed = 15;
  const CrBenchmarkReport report = run_cr_benchmark(config);
  REQUIRE(report.rows.size() == 2);  // 1 rep x 1 method x 2 causes x 1 quantile
  std::set<int> causes;
  for (const auto& row : report.rows) {
    CHECK(row.ok);
    CHECK(std::isfinite(row.score));
    causes.insert(row.cause);
  }
  CHECK(causes == std::set<int>{1, 2});

  const Aggregate agg = cr_benchmark_aggregate(report, "aj", 1, 0.5);
  CHECK(agg.count == 1);
}

TEST_CASE("a one-cell ablation trains and evaluates a single rule pair") {
  AblationConfig config;
  config.dgp.n = 150;
  config.repetitions = 1;
  config.train_rules = {ScoringRuleKind::risbs};
  config.eval_rules = {ScoringRuleKind::risbs, ScoringRuleKind::isbs};
  config.hidden = {4};
  config.fit = tiny_fit(2);
  config.seed = 21;
  const AblationReport report = run_ablation(config);
  REQUIRE(report.rows.size() == 2);
  for (const auto& row : report.rows) {
    CHECK(row.ok);
    CHECK(row.train_rule == ScoringRuleKind::risbs);
    CHECK(std::isfinite(row.score));
  }
  const Aggregate agg =
      ablation_aggregate(report, ScoringRuleKind::risbs, ScoringRuleKind::isbs);
  CHECK(agg.count == 1);
  const std::string table = render_ablation_table(report);
  CHECK(!table.empty());
}

TEST_CASE("random search skips duplicate draws and is seed-deterministic") {
  DgpConfig dgp;
  dgp.n = 120;
  dgp.seed = 8;
  const SurvivalDataset train = simulate(dgp);

  SearchSpace space;
  space.lr_lo = space.lr_hi = 0.05;  // single-valued space: every draw repeats
  space.l2_lo = space.l2_hi = 1e-4;
  space.widths = {4};
  space.depths = {1};
  space.grid_choices = {6};

  const auto run = [&] {
    return random_search(train, "np_sr", {ScoringRuleKind::risbs}, Family::lognormal, space,
                         5, 19, tiny_fit(3));
  };
  const SearchResult a = run();
  CHECK(a.trials.size() == 1);
  CHECK(a.best.ok);
  CHECK(a.best.width == 4);
  CHECK(a.best.grid_intervals == 6);
  CHECK(std::isfinite(a.best.val_score));

  const SearchResult b = run();
  CHECK(a.best.lr == b.best.lr);
  CHECK(a.best.val_score == b.best.val_score);
}

TEST_CASE("gradient checking passes on a handful of random configurations") {
  const GradCheckSuiteReport report = run_gradcheck(6, 2);
  CHECK(report.pass);
  CHECK(report.worst_rel_err < 1e-4);
  CHECK(render_gradcheck(report).find("PASS") != std::string::npos);
}
