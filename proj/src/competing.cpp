#include "survscore/competing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>

#include "survscore/detail/curves.hpp"
#include "survscore/util.hpp"

namespace survscore {

int cause_indicator(const SurvivalRecord& record, int cause) {
  if (cause < 1) throw std::invalid_argument("cause_indicator: cause must be >= 1");
  return (record.status == 1 && record.cause == cause) ? 1 : 0;
}

CrVariant cr_variant_from_string(std::string_view name) {
  if (name == "parametric") return CrVariant::parametric;
  if (name == "increment") return CrVariant::increment;
  throw std::invalid_argument("unknown competing-risks variant: " + std::string(name));
}

std::string to_string(CrVariant variant) {
  return variant == CrVariant::parametric ? "parametric" : "increment";
}

CrNormalize cr_normalize_from_string(std::string_view name) {
  if (name == "rescale") return CrNormalize::rescale;
  if (name == "none") return CrNormalize::none;
  throw std::invalid_argument("unknown CIF normalization mode: " + std::string(name));
}

std::string to_string(CrNormalize mode) {
  return mode == CrNormalize::rescale ? "rescale" : "none";
}

// ---- CIF normalization ----

namespace {

double value_of(double x) { return x; }
double value_of(ad::Var v) { return v.tape->value(v); }

void note_branch(double, bool) {}
void note_branch(ad::Var v, bool saturated) { v.tape->note_clamp(saturated); }

double lift_one(double) { return 1.0; }
ad::Var lift_one(ad::Var like) { return like.tape->constant(1.0); }

double vmax(double a, double b) { return a >= b ? a : b; }

// max with the pass-through subgradient of the winning side (ties go left);
// the pick reports to the clamp signature like any other kink.
ad::Var vmax(ad::Var a, ad::Var b) {
  const double av = a.tape->value(a);
  const double bv = b.tape->value(b);
  const bool left = av >= bv;
  a.tape->note_clamp(!left);
  return a.tape->custom_binary(a, b, left ? av : bv, left ? 1.0 : 0.0, left ? 0.0 : 1.0);
}

}  // namespace

// The first two stages are the declared normalization: grid points whose raw
// sum exceeds 1 are rescaled by 1/sum, and a running maximum restores the
// per-cause monotonicity that rescaling can break. The running maximum can in
// turn push a point's sum back above 1 (causes may attain their maxima at
// different grid points), so a third stage re-walks the curves as capped
// increments: it passes values through untouched until the left-fold sum
// first exceeds 1, and from there on rebuilds each point from the previous
// accepted one, scaling the stage-two increments into the remaining headroom
// (with a relative 1e-9 margin, halved further in the rare case rounding
// still lands above 1). The emitted arithmetic matches the numeric trial
// bit for bit, so the exported guarantees are exact in double precision.
template <typename T>
std::vector<std::vector<T>> normalize_cif(const std::vector<std::vector<T>>& raw) {
  const std::size_t nk = raw.size();
  if (nk == 0) throw std::invalid_argument("normalize_cif: no causes");
  const std::size_t nj = raw[0].size();
  for (const auto& row : raw) {
    if (row.size() != nj) throw std::invalid_argument("normalize_cif: ragged CIF rows");
  }

  std::vector<std::vector<T>> mono(nk);  // after rescale + running maximum
  std::vector<std::vector<T>> out(nk);
  for (auto& row : mono) row.reserve(nj);
  for (auto& row : out) row.reserve(nj);

  bool diverged = false;
  double total_val = 0.0;  // left fold over causes of the accepted values
  std::vector<double> mv(nk), dv(nk), cand(nk);

  for (std::size_t j = 0; j < nj; ++j) {
    double s = value_of(raw[0][j]);
    for (std::size_t k = 1; k < nk; ++k) s = s + value_of(raw[k][j]);
    const bool rescale = s > 1.0;
    note_branch(raw[0][j], rescale);

    std::optional<T> inv;
    if (rescale) {
      T sum = raw[0][j];
      for (std::size_t k = 1; k < nk; ++k) sum = sum + raw[k][j];
      inv = lift_one(sum) / sum;
    }
    for (std::size_t k = 0; k < nk; ++k) {
      T scaled = rescale ? raw[k][j] * *inv : raw[k][j];
      mono[k].push_back(j == 0 ? std::move(scaled) : vmax(mono[k][j - 1], scaled));
      mv[k] = value_of(mono[k][j]);
    }

    if (!diverged) {
      double tm = mv[0];
      for (std::size_t k = 1; k < nk; ++k) tm = tm + mv[k];
      if (tm <= 1.0) {
        for (std::size_t k = 0; k < nk; ++k) out[k].push_back(mono[k][j]);
        total_val = tm;
        note_branch(raw[0][j], false);
        continue;
      }
      diverged = true;
    }
    note_branch(raw[0][j], true);

    // stage-two increments; exact >= 0 because the running max never decreases
    for (std::size_t k = 0; k < nk; ++k) {
      dv[k] = j == 0 ? mv[k] : mv[k] - value_of(mono[k][j - 1]);
    }
    double sv = dv[0];
    for (std::size_t k = 1; k < nk; ++k) sv = sv + dv[k];
    const double hv = 1.0 - total_val;

    bool capped = sv > hv * (1.0 - 1e-9);
    double mult = 1.0 - 1e-9;
    const auto attempt = [&](bool cap, double c) {
      const double scale = cap ? (hv / sv) * c : 1.0;
      double t = 0.0;
      for (std::size_t k = 0; k < nk; ++k) {
        const double inc = cap ? dv[k] * scale : dv[k];
        cand[k] = j == 0 ? inc : value_of(out[k][j - 1]) + inc;
        t = k == 0 ? cand[k] : t + cand[k];
      }
      return t;
    };
    double accepted = attempt(capped, mult);
    while (accepted > 1.0) {
      if (!capped) {
        capped = true;
      } else {
        mult *= 0.5;  // reaches exactly 0 if it must; fold then equals total_val
      }
      note_branch(raw[0][j], true);
      accepted = attempt(capped, mult);
    }

    if (!capped) {
      for (std::size_t k = 0; k < nk; ++k) {
        out[k].push_back(j == 0 ? mono[k][0]
                                : out[k][j - 1] + (mono[k][j] - mono[k][j - 1]));
      }
    } else {
      std::vector<T> delta;
      delta.reserve(nk);
      for (std::size_t k = 0; k < nk; ++k) {
        delta.push_back(j == 0 ? mono[k][0] : mono[k][j] - mono[k][j - 1]);
      }
      T sd = delta[0];
      for (std::size_t k = 1; k < nk; ++k) sd = sd + delta[k];
      T scale = [&]() -> T {
        if (j == 0) return (lift_one(sd) / sd) * mult;
        T tot = out[0][j - 1];
        for (std::size_t k = 1; k < nk; ++k) tot = tot + out[k][j - 1];
        return ((1.0 - tot) / sd) * mult;
      }();
      for (std::size_t k = 0; k < nk; ++k) {
        out[k].push_back(j == 0 ? delta[k] * scale : out[k][j - 1] + delta[k] * scale);
      }
    }
    total_val = accepted;
  }
  return out;
}

template std::vector<std::vector<double>> normalize_cif<double>(
    const std::vector<std::vector<double>>&);
template std::vector<std::vector<ad::Var>> normalize_cif<ad::Var>(
    const std::vector<std::vector<ad::Var>>&);

// ---- raw per-cause curves ----

namespace {

std::string cause_prefix(int cause) { return "cause" + std::to_string(cause) + ".trunk"; }

// Eq.-style cumulative increments squashed into [0, 1].
template <typename T, typename GAt>
std::vector<T> increment_cif_row(int intervals, Squash squash, GAt&& g_at) {
  using ad::clamp;
  using ad::logistic;
  std::vector<T> row;
  row.reserve(static_cast<std::size_t>(intervals));
  std::optional<T> total;
  for (int j = 1; j <= intervals; ++j) {
    T inc = squash == Squash::logistic ? logistic(g_at(j)) : clamp(g_at(j), 0.0, 1.0);
    total = total ? *total + inc : std::move(inc);
    row.push_back(clamp(*total, 0.0, 1.0));
  }
  return row;
}

// cdf sampled along the grid; the running max guards against last-ulp
// nonmonotonicity of the closed forms.
template <typename T, typename CdfAt>
std::vector<T> parametric_cif_row(int intervals, CdfAt&& cdf_at) {
  std::vector<T> row;
  row.reserve(static_cast<std::size_t>(intervals));
  for (int j = 1; j <= intervals; ++j) {
    T f = cdf_at(j);
    row.push_back(j == 1 ? std::move(f) : vmax(row[static_cast<std::size_t>(j - 2)], f));
  }
  return row;
}

std::vector<std::vector<double>> raw_cif(const CompetingRisksModel& model,
                                         std::span<const double> x) {
  const int K = model.k;
  const int J = model.grid.intervals();
  std::vector<std::vector<double>> outs;
  if (model.joint_trunk) {
    outs.push_back(mlp_forward(mlp_weights(model.trunk, model.params, "trunk"), x));
  } else {
    outs.reserve(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
      outs.push_back(mlp_forward(mlp_weights(model.trunk, model.params, cause_prefix(k)), x));
    }
  }
  std::vector<std::vector<double>> raw;
  raw.reserve(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) {
    const auto& out = model.joint_trunk ? outs[0] : outs[static_cast<std::size_t>(k - 1)];
    if (model.variant == CrVariant::parametric) {
      ParamVector theta;
      theta.location = out[static_cast<std::size_t>(model.joint_trunk ? k - 1 : 0)];
      const double raw_s =
          model.constant_scale
              ? model.params.slice("log_scale")[static_cast<std::size_t>(k - 1)]
              : out[static_cast<std::size_t>(model.joint_trunk ? K + k - 1 : 1)];
      theta.log_scale = ad::clamp(raw_s, -kLogScaleBound, kLogScaleBound);
      raw.push_back(parametric_cif_row<double>(
          J, [&](int j) { return cdf(model.spec, theta, model.grid[j]); }));
    } else {
      const int base = model.joint_trunk ? (k - 1) * J : 0;
      raw.push_back(increment_cif_row<double>(J, model.squash, [&](int j) {
        return out[static_cast<std::size_t>(base + j - 1)];
      }));
    }
  }
  return raw;
}

// Discrete sub-density over the grid: CIF increment across the interval
// containing t divided by the spacing; t beyond the grid uses the last
// interval.
double cif_grid_density(const std::vector<double>& times, const std::vector<double>& cif,
                        double t) {
  const auto j_end = static_cast<std::size_t>(times.size() - 1);
  auto it = std::lower_bound(times.begin() + 1, times.end(), t);
  std::size_t j = static_cast<std::size_t>(it - times.begin());
  j = std::min(std::max<std::size_t>(j, 1), j_end);
  return (cif[j] - cif[j - 1]) / (times[j] - times[j - 1]);
}

}  // namespace

// ---- prediction ----

CifAccessor CifSet::accessor(int cause) const {
  if (cause < 1 || cause > static_cast<int>(cif.size())) {
    throw std::invalid_argument("cif accessor: cause out of range");
  }
  auto t = std::make_shared<const std::vector<double>>(times);
  auto c = std::make_shared<const std::vector<double>>(cif[static_cast<std::size_t>(cause - 1)]);
  const Interp ip = interp;
  CifAccessor acc;
  acc.cif = [t, c, ip](double at) { return interpolate_curve(*t, *c, ip, at); };
  acc.survival = [t, c, ip](double at) { return 1.0 - interpolate_curve(*t, *c, ip, at); };
  acc.density = [t, c](double at) { return cif_grid_density(*t, *c, at); };
  return acc;
}

std::vector<CifAccessor> CifSet::accessors() const {
  std::vector<CifAccessor> all;
  all.reserve(cif.size());
  for (int k = 1; k <= static_cast<int>(cif.size()); ++k) all.push_back(accessor(k));
  return all;
}

CifSet predict_cif(const CompetingRisksModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.trunk.input_dim) {
    throw std::invalid_argument("predict_cif: feature vector has wrong length");
  }
  std::vector<std::vector<double>> curves = raw_cif(model, x);
  if (model.normalize == CrNormalize::rescale) curves = normalize_cif<double>(curves);
  for (const auto& row : curves) {
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw std::runtime_error("predict_cif: non-finite CIF value");
      }
    }
  }
  CifSet set;
  set.times = model.grid.cut_points;
  set.interp = model.interp;
  set.cif.reserve(curves.size());
  for (auto& row : curves) {
    std::vector<double> with_origin;
    with_origin.reserve(row.size() + 1);
    with_origin.push_back(0.0);
    with_origin.insert(with_origin.end(), row.begin(), row.end());
    set.cif.push_back(std::move(with_origin));
  }
  return set;
}

// ---- fitting ----

std::pair<CompetingRisksModel, FitResult> fit_cr(const SurvivalDataset& train,
                                                 const TimeGrid& grid,
                                                 const CrFitOptions& options) {
  const int K = train.num_causes();
  std::vector<int> events(static_cast<std::size_t>(K) + 1, 0);
  for (const auto& rec : train.records()) {
    if (rec.status == 1) ++events[static_cast<std::size_t>(rec.cause)];
  }
  for (int k = 1; k <= K; ++k) {
    if (events[static_cast<std::size_t>(k)] == 0) {
      throw std::invalid_argument("fit_cr: cause " + std::to_string(k) +
                                  " has no observed events");
    }
  }

  CompetingRisksModel model;
  model.k = K;
  model.variant = options.variant;
  model.normalize = options.normalize;
  model.joint_trunk = K == 1 ? true : options.joint_trunk;
  model.spec = options.spec;
  model.constant_scale = options.constant_scale;
  model.squash = options.squash;
  model.interp = options.interp;
  model.grid = grid;

  // One cause is exactly the single-risk problem; reuse those fits so the
  // trace and the parameters coincide bit for bit under the same seed.
  if (K == 1) {
    ScoringFitOptions single;
    single.rule = options.rule;
    single.fit = options.fit;
    single.hidden = options.hidden;
    single.activation = options.activation;
    single.constant_scale = options.constant_scale;
    single.squash = options.squash;
    single.interp = options.interp;
    single.g_floor = options.g_floor;
    FitResult result;
    if (options.variant == CrVariant::parametric) {
      auto [m, r] = fit_parametric_scoring(train, options.spec, grid, single);
      model.trunk = m.trunk;
      model.params = std::move(m.params);
      result = std::move(r);
    } else {
      auto [m, r] = fit_increment_scoring(train, grid, single);
      model.trunk = m.trunk;
      model.params = std::move(m.params);
      result = std::move(r);
    }
    return {std::move(model), std::move(result)};
  }

  const StepFunction g_hat = kaplan_meier(train, KmTarget::censoring);
  std::vector<ScoreContext> ctxs;
  ctxs.reserve(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) {
    ctxs.push_back(make_score_context(train, grid, g_hat, options.g_floor, k));
  }

  const int J = grid.intervals();
  const bool parametric = options.variant == CrVariant::parametric;
  int out_dim;
  if (model.joint_trunk) {
    out_dim = parametric ? (options.constant_scale ? K : 2 * K) : K * J;
  } else {
    out_dim = parametric ? (options.constant_scale ? 1 : 2) : J;
  }
  model.trunk = MlpSpec{train.p(), options.hidden, out_dim, options.activation};

  std::vector<std::string> prefixes;
  if (model.joint_trunk) {
    prefixes.emplace_back("trunk");
  } else {
    for (int k = 1; k <= K; ++k) prefixes.push_back(cause_prefix(k));
  }
  for (const auto& prefix : prefixes) {
    register_mlp_params(model.trunk, model.params, prefix);
  }
  if (parametric && options.constant_scale) model.params.add_slice("log_scale", K, false);

  const MlpSpec& trunk = model.trunk;
  const bool joint = model.joint_trunk;
  const bool constant_scale = options.constant_scale;
  const Squash squash = options.squash;
  const Interp interp = options.interp;
  const DistributionSpec spec = options.spec;
  const ScoringRule rule = options.rule;
  const CrNormalize normalize = options.normalize;
  const double bias0 = increment_bias_init(J, squash);
  const std::string bias_name = ".b" + std::to_string(trunk.hidden.size());

  Initializer init = [&, bias0](ParameterStore& p, std::uint64_t seed) {
    for (std::size_t idx = 0; idx < prefixes.size(); ++idx) {
      const std::uint64_t trunk_seed =
          prefixes.size() == 1 ? seed : derive_seed(seed, 0xCA50 + idx);
      init_mlp_params(trunk, p, prefixes[idx], trunk_seed);
      if (!parametric) {
        for (double& b : p.slice(prefixes[idx] + bias_name)) b = bias0;
      }
    }
    if (parametric && constant_scale) {
      for (double& v : p.slice("log_scale")) v = 0.0;
    }
  };

  ObjectiveBuilder builder = [&](ad::Tape& tape, const ParamVars& vars,
                                 std::span<const int> batch) {
    std::vector<MlpWeights<ad::Var>> weights;
    weights.reserve(prefixes.size());
    for (const auto& prefix : prefixes) weights.push_back(mlp_weights(trunk, vars, prefix));
    std::span<const ad::Var> log_scale;
    if (parametric && constant_scale) log_scale = vars.slice("log_scale");

    std::vector<ad::Var> terms;
    terms.reserve(batch.size());
    for (int i : batch) {
      std::vector<std::vector<ad::Var>> outs;
      outs.reserve(weights.size());
      for (const auto& w : weights) outs.push_back(mlp_forward(w, train[i].features));

      std::vector<std::vector<ad::Var>> raw;
      raw.reserve(static_cast<std::size_t>(K));
      for (int k = 1; k <= K; ++k) {
        const auto& out = joint ? outs[0] : outs[static_cast<std::size_t>(k - 1)];
        if (parametric) {
          const ad::Var mu = out[static_cast<std::size_t>(joint ? k - 1 : 0)];
          const ad::Var s_raw =
              constant_scale ? log_scale[static_cast<std::size_t>(k - 1)]
                             : out[static_cast<std::size_t>(joint ? K + k - 1 : 1)];
          const ad::Var s = ad::clamp(s_raw, -kLogScaleBound, kLogScaleBound);
          raw.push_back(parametric_cif_row<ad::Var>(J, [&](int j) {
            return detail::dist_node(tape, spec, mu, s, grid[j], DistQuantity::cdf);
          }));
        } else {
          const int base = joint ? (k - 1) * J : 0;
          raw.push_back(increment_cif_row<ad::Var>(J, squash, [&](int j) {
            return out[static_cast<std::size_t>(base + j - 1)];
          }));
        }
      }
      if (normalize == CrNormalize::rescale) raw = normalize_cif<ad::Var>(raw);

      ad::Var record_term;
      for (int k = 1; k <= K; ++k) {
        detail::GridVarCurve curve{&tape, &grid, interp, {}};
        curve.surv.reserve(static_cast<std::size_t>(J));
        for (int j = 1; j <= J; ++j) {
          curve.surv.push_back(1.0 -
                               raw[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j - 1)]);
        }
        const ad::Var cause_term = score_record<ad::Var>(rule, ctxs[static_cast<std::size_t>(k - 1)], i, curve);
        record_term = k == 1 ? cause_term : record_term + cause_term;
      }
      terms.push_back(record_term);
    }
    return pairwise_sum(terms) * (1.0 / static_cast<double>(terms.size()));
  };

  FitResult result = fit(builder, model.params, init, train.n(), options.fit);
  return {std::move(model), std::move(result)};
}

// ---- evaluation ----

double evaluate_cif_at_quantile(const ScoringRule& rule, const SurvivalDataset& data,
                                const std::vector<CifAccessor>& predictions,
                                const StepFunction& censoring_survival, double quantile,
                                int cause, const EvalOptions& options, double* tau_star_out) {
  const double tau_star = nearest_rank_quantile(data.observed_times(), quantile);
  if (tau_star_out != nullptr) *tau_star_out = tau_star;
  bool event_before = false;
  for (const auto& r : data.records()) {
    if (r.status == 1 && r.cause == cause && r.time <= tau_star) {
      event_before = true;
      break;
    }
  }
  if (!event_before) {
    throw NoEventsBeforeCutoff("no cause-" + std::to_string(cause) +
                               " events at or before the evaluation cutoff tau* = " +
                               format_double(tau_star));
  }
  const TimeGrid grid = make_grid(tau_star, options.grid_intervals);
  return cause_objective(rule, data, grid, predictions, censoring_survival, cause,
                         options.g_floor);
}

void write_cif_csv(const std::filesystem::path& path, const std::vector<CifSet>& per_subject) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write cif file: " + path.string());
  out << "subject,cause,time,cif\n";
  for (std::size_t s = 0; s < per_subject.size(); ++s) {
    const CifSet& set = per_subject[s];
    for (std::size_t k = 0; k < set.cif.size(); ++k) {
      for (std::size_t idx = 0; idx < set.times.size(); ++idx) {
        out << s << ',' << (k + 1) << ',' << format_double(set.times[idx]) << ','
            << format_double(set.cif[k][idx]) << '\n';
      }
    }
  }
}

// ---- persistence ----

nlohmann::json cr_model_to_json(const CompetingRisksModel& model) {
  nlohmann::json j;
  j["kind"] = "competing";
  j["k"] = model.k;
  j["variant"] = to_string(model.variant);
  j["normalize"] = to_string(model.normalize);
  j["joint_trunk"] = model.joint_trunk;
  j["interp"] = to_string(model.interp);
  j["grid"] = grid_to_json(model.grid);
  j["trunk"] = model.trunk.to_json();
  j["params"] = model.params.to_json();
  if (model.variant == CrVariant::parametric) {
    j["family"] = to_string(model.spec.family);
    j["constant_scale"] = model.constant_scale;
  } else {
    j["squash"] = to_string(model.squash);
  }
  return j;
}

CompetingRisksModel cr_model_from_json(const nlohmann::json& j) {
  if (j.at("kind").get<std::string>() != "competing") {
    throw std::runtime_error("not a competing-risks model file");
  }
  CompetingRisksModel model;
  model.k = j.at("k").get<int>();
  model.variant = cr_variant_from_string(j.at("variant").get<std::string>());
  model.normalize = cr_normalize_from_string(j.at("normalize").get<std::string>());
  model.joint_trunk = j.at("joint_trunk").get<bool>();
  model.interp = interp_from_string(j.at("interp").get<std::string>());
  model.grid = grid_from_json(j.at("grid"));
  model.trunk = MlpSpec::from_json(j.at("trunk"));
  model.params = ParameterStore::from_json(j.at("params"));
  if (model.variant == CrVariant::parametric) {
    model.spec.family = family_from_string(j.at("family").get<std::string>());
    model.constant_scale = j.at("constant_scale").get<bool>();
  } else {
    model.squash = squash_from_string(j.at("squash").get<std::string>());
  }
  return model;
}

void save_cr_model(const std::filesystem::path& path, const CompetingRisksModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path.string());
  out << cr_model_to_json(model).dump(2) << "\n";
}

CompetingRisksModel load_cr_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path.string());
  nlohmann::json j;
  in >> j;
  return cr_model_from_json(j);
}

}  // namespace survscore
