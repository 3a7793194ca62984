#include "survscore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "survscore/dataset.hpp"
#include "survscore/distributions.hpp"
#include "survscore/mlp.hpp"
#include "survscore/models.hpp"
#include "survscore/optimizer.hpp"
#include "survscore/scoring.hpp"
#include "survscore/time_grid.hpp"
#include "survscore/util.hpp"

namespace survscore {
namespace {

SurvivalDataset random_dataset(std::mt19937_64& rng, int* n_out, int* p_out) {
  std::uniform_int_distribution<int> n_dist(6, 20);
  std::uniform_int_distribution<int> p_dist(1, 3);
  std::normal_distribution<double> feature(0.0, 1.0);
  std::normal_distribution<double> log_time(0.0, 0.7);
  std::bernoulli_distribution event(0.7);
  const int n = n_dist(rng);
  const int p = p_dist(rng);
  std::vector<SurvivalRecord> records(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SurvivalRecord& r = records[static_cast<std::size_t>(i)];
    r.time = std::exp(log_time(rng));
    r.status = event(rng) ? 1 : 0;
    r.features.resize(static_cast<std::size_t>(p));
    for (double& f : r.features) f = feature(rng);
  }
  records[0].status = 1;  // every rule needs an event, IPCW needs a censoring
  records[1].status = 0;
  *n_out = n;
  *p_out = p;
  return SurvivalDataset::make(records);
}

// Off the symmetric zero-bias init, off exact clamp boundaries.
void jitter(ParameterStore& params, std::mt19937_64& rng, double sd) {
  std::normal_distribution<double> noise(0.0, sd);
  for (double& v : params.flat()) v += noise(rng);
}

std::string hidden_label(const std::vector<int>& hidden) {
  if (hidden.empty()) return "-";
  std::string s;
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    if (l > 0) s += "x";
    s += std::to_string(hidden[l]);
  }
  return s;
}

}  // namespace

GradCheckSuiteReport run_gradcheck(int num_configs, std::uint64_t seed, double h,
                                   double tolerance) {
  static constexpr ScoringRuleKind kRules[] = {ScoringRuleKind::isbs, ScoringRuleKind::scrps,
                                               ScoringRuleKind::risbs, ScoringRuleKind::risll,
                                               ScoringRuleKind::rcll};
  static constexpr const char* kKinds[] = {"parametric", "increment", "cox_sr"};
  static const std::vector<std::vector<int>> kHidden = {{}, {4}, {8, 4}};

  GradCheckSuiteReport report;
  for (int i = 0; i < num_configs; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    int n = 0, p = 0;
    const SurvivalDataset data = random_dataset(rng, &n, &p);
    const int kind = i % 3;
    const int J = std::uniform_int_distribution<int>(3, 7)(rng);
    const TimeGrid grid = make_grid(data, J, 0.9);

    ScoringFitOptions options;
    options.rule.kind = kRules[i % 5];
    options.rule.risll_orientation =
        (i / 5) % 2 == 0 ? RisllOrientation::conventional : RisllOrientation::paper_verbatim;
    options.hidden = kHidden[std::uniform_int_distribution<std::size_t>(0, 2)(rng)];
    options.constant_scale = std::bernoulli_distribution(0.5)(rng);
    options.squash =
        std::bernoulli_distribution(0.5)(rng) ? Squash::logistic : Squash::trunc_relu;
    options.interp = std::bernoulli_distribution(0.5)(rng) ? Interp::linear : Interp::step;

    ParameterStore params;
    ObjectiveBuilder builder;
    std::string extra;
    if (kind == 0) {
      DistributionSpec spec;
      spec.family = static_cast<Family>(std::uniform_int_distribution<int>(0, 2)(rng));
      const MlpSpec trunk{p, options.hidden, options.constant_scale ? 1 : 2, Activation::tanh};
      register_mlp_params(trunk, params, "trunk");
      if (options.constant_scale) params.add_slice("log_scale", 1, false);
      init_mlp_params(trunk, params, "trunk", derive_seed(seed, 0x9c00 + i));
      jitter(params, rng, 0.15);
      builder = parametric_objective(data, spec, grid, trunk, options);
      extra = " family=" + to_string(spec.family);
      if (options.constant_scale) extra += " const_scale";
    } else if (kind == 1) {
      const MlpSpec trunk{p, options.hidden, grid.intervals(), Activation::tanh};
      register_mlp_params(trunk, params, "trunk");
      init_mlp_params(trunk, params, "trunk", derive_seed(seed, 0x9c00 + i));
      const std::string final_bias = "trunk.b" + std::to_string(trunk.hidden.size());
      const double bias0 = increment_bias_init(grid.intervals(), options.squash);
      for (double& b : params.slice(final_bias)) b = bias0;
      jitter(params, rng, 0.1);
      builder = increment_objective(data, grid, trunk, options);
      extra = " squash=" + to_string(options.squash);
    } else {
      params.add_slice("baseline.h", grid.intervals(), false);
      params.add_slice("beta.W", p, true);
      std::normal_distribution<double> noise(0.0, 0.3);
      for (double& v : params.slice("baseline.h")) {
        v = -std::log(static_cast<double>(grid.intervals())) + noise(rng);
      }
      for (double& v : params.slice("beta.W")) v = noise(rng);
      builder = cox_sr_objective(data, grid, options);
    }

    std::vector<int> batch(static_cast<std::size_t>(data.n()));
    std::iota(batch.begin(), batch.end(), 0);
    const GradCheckResult r = finite_diff_check(
        [&builder, &batch](ad::Tape& tape, const ParamVars& vars) {
          return builder(tape, vars, batch);
        },
        params, h);

    GradCheckCase c;
    c.index = i;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s rule=%s n=%d p=%d J=%d hidden=%s%s", kKinds[kind],
                  to_string(options.rule.kind).c_str(), n, p, grid.intervals(),
                  hidden_label(options.hidden).c_str(), extra.c_str());
    c.description = buf;
    c.max_rel_err = r.max_rel_error;
    c.coordinates = r.coordinates;
    c.skipped = r.skipped_coordinates;
    c.pass = r.max_rel_error <= tolerance;
    report.worst_rel_err = std::max(report.worst_rel_err, c.max_rel_err);
    report.pass = report.pass && c.pass;
    report.cases.push_back(std::move(c));
  }
  return report;
}

std::string render_gradcheck(const GradCheckSuiteReport& report) {
  std::string out;
  for (const GradCheckCase& c : report.cases) {
    char buf[240];
    std::snprintf(buf, sizeof(buf), "case %02d %s  rel_err=%.3e  skipped=%d/%d  %s\n", c.index,
                  c.pass ? "PASS" : "FAIL", c.max_rel_err, c.skipped, c.coordinates,
                  c.description.c_str());
    out += buf;
  }
  char tail[120];
  std::snprintf(tail, sizeof(tail), "%zu/%zu configs passed, worst rel_err=%.3e\n",
                static_cast<std::size_t>(
                    std::count_if(report.cases.begin(), report.cases.end(),
                                  [](const GradCheckCase& c) { return c.pass; })),
                report.cases.size(), report.worst_rel_err);
  out += tail;
  return out;
}

}  // namespace survscore
