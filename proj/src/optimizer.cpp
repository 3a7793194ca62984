#include "survscore/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "survscore/util.hpp"

namespace survscore {

int ParameterStore::add_slice(const std::string& name, int size, bool l2_penalized) {
  if (size < 0) throw std::invalid_argument("parameter slice size must be >= 0");
  if (has_slice(name)) throw std::invalid_argument("duplicate parameter slice: " + name);
  const int offset = static_cast<int>(values_.size());
  slices_.push_back({name, offset, size, l2_penalized});
  values_.resize(values_.size() + static_cast<std::size_t>(size), 0.0);
  return offset;
}

bool ParameterStore::has_slice(std::string_view name) const {
  for (const auto& s : slices_) {
    if (s.name == name) return true;
  }
  return false;
}

const SliceInfo& ParameterStore::slice_info(std::string_view name) const {
  for (const auto& s : slices_) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no parameter slice named '" + std::string(name) + "'");
}

std::span<double> ParameterStore::slice(std::string_view name) {
  const SliceInfo& info = slice_info(name);
  return {values_.data() + info.offset, static_cast<std::size_t>(info.size)};
}

std::span<const double> ParameterStore::slice(std::string_view name) const {
  const SliceInfo& info = slice_info(name);
  return {values_.data() + info.offset, static_cast<std::size_t>(info.size)};
}

nlohmann::json ParameterStore::to_json() const {
  nlohmann::json slices = nlohmann::json::array();
  for (const auto& s : slices_) {
    slices.push_back({{"name", s.name}, {"size", s.size}, {"l2_penalized", s.l2_penalized}});
  }
  return {{"slices", slices}, {"values", values_}};
}

ParameterStore ParameterStore::from_json(const nlohmann::json& j) {
  ParameterStore store;
  for (const auto& s : j.at("slices")) {
    store.add_slice(s.at("name").get<std::string>(), s.at("size").get<int>(),
                    s.value("l2_penalized", false));
  }
  const auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != store.values_.size()) {
    throw std::runtime_error("parameter store: value count does not match slices");
  }
  store.values_ = values;
  return store;
}

ParamVars make_param_vars(ad::Tape& tape, const ParameterStore& store) {
  ParamVars pv;
  pv.store = &store;
  pv.vars.reserve(store.flat().size());
  for (double v : store.flat()) pv.vars.push_back(tape.param(v));
  return pv;
}

void FitConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("fit: learning_rate must be > 0");
  if (batch_size < 1) throw std::invalid_argument("fit: batch_size must be >= 1");
  if (max_epochs < 0) throw std::invalid_argument("fit: max_epochs must be >= 0");
  if (l2 < 0.0) throw std::invalid_argument("fit: l2 must be >= 0");
  if (patience < 1) throw std::invalid_argument("fit: patience must be >= 1");
  if (!(validation_fraction > 0.0) || validation_fraction > 0.5) {
    throw std::invalid_argument("fit: validation_fraction must lie in (0, 0.5]");
  }
  if (!(lr_decay_factor > 0.0) || lr_decay_factor > 1.0) {
    throw std::invalid_argument("fit: lr_decay_factor must lie in (0, 1]");
  }
  if (lr_decay_patience < 0) throw std::invalid_argument("fit: lr_decay_patience must be >= 0");
  if (!(min_learning_rate > 0.0)) throw std::invalid_argument("fit: min_learning_rate must be > 0");
}

namespace {

// Weighted mean of per-batch mean objectives; value-only pass.
double evaluate_objective(const ObjectiveBuilder& builder, ad::Tape& tape,
                          const ParameterStore& params, std::span<const int> indices,
                          int chunk_size) {
  double acc = 0.0;
  std::size_t done = 0;
  while (done < indices.size()) {
    const std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(chunk_size),
                                                  indices.size() - done);
    tape.reset();
    const ParamVars vars = make_param_vars(tape, params);
    const ad::Var out = builder(tape, vars, indices.subspan(done, len));
    acc += tape.value(out) * static_cast<double>(len);
    done += len;
  }
  return acc / static_cast<double>(indices.size());
}

}  // namespace

FitResult fit(const ObjectiveBuilder& builder, ParameterStore& params, const Initializer& init,
              int n_records, const FitConfig& config) {
  config.validate();
  if (n_records < 2) throw std::invalid_argument("fit: need at least 2 records");

  const int n_val =
      std::clamp(static_cast<int>(std::lround(config.validation_fraction * n_records)), 1,
                 n_records - 1);
  std::vector<int> order(static_cast<std::size_t>(n_records));
  for (int i = 0; i < n_records; ++i) order[static_cast<std::size_t>(i)] = i;
  {
    std::mt19937_64 split_rng(derive_seed(config.seed, 0x5917));
    std::shuffle(order.begin(), order.end(), split_rng);
  }

  FitResult result;
  result.train_indices.assign(order.begin(), order.end() - n_val);
  result.val_indices.assign(order.end() - n_val, order.end());
  const std::span<const int> train(result.train_indices);
  const std::span<const int> val(result.val_indices);

  init(params, config.seed);
  if (config.max_epochs == 0) return result;

  ad::Tape tape;
  const int eval_chunk = std::max(config.batch_size, 256);

  // The objective must start finite; re-seed the initializer a few times
  // before giving up.
  bool finite = false;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    if (attempt > 0) init(params, derive_seed(config.seed, 0xBAD0 + attempt));
    try {
      const double probe = evaluate_objective(builder, tape, params, train, eval_chunk);
      if (std::isfinite(probe)) {
        finite = true;
        break;
      }
    } catch (const ad::NonFiniteError&) {
    }
  }
  if (!finite) {
    throw std::runtime_error("fit: objective non-finite at initialization after 3 re-seeds");
  }

  const int n_params = params.size();
  std::vector<double> m(static_cast<std::size_t>(n_params), 0.0);
  std::vector<double> v(static_cast<std::size_t>(n_params), 0.0);
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;
  double lr = config.learning_rate;
  const int decay_patience =
      config.lr_decay_patience > 0 ? config.lr_decay_patience : std::max(2, config.patience / 2);

  // Flags telling which flat coordinates take the L2 pull.
  std::vector<char> penalized(static_cast<std::size_t>(n_params), 0);
  if (config.l2 > 0.0) {
    for (const auto& s : params.slices()) {
      if (!s.l2_penalized) continue;
      for (int k = 0; k < s.size; ++k) penalized[static_cast<std::size_t>(s.offset + k)] = 1;
    }
  }

  result.best_val_objective = evaluate_objective(builder, tape, params, val, eval_chunk);
  result.best_epoch = 0;
  std::vector<double> best_params = params.flat();

  std::mt19937_64 batch_rng(derive_seed(config.seed, 0xBA7C));
  std::vector<int> epoch_order(result.train_indices);
  int bad_evals = 0, plateau_evals = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(epoch_order.begin(), epoch_order.end(), batch_rng);
    double train_acc = 0.0;
    std::size_t done = 0;
    while (done < epoch_order.size()) {
      const std::size_t len = std::min<std::size_t>(
          static_cast<std::size_t>(config.batch_size), epoch_order.size() - done);
      tape.reset();
      const ParamVars vars = make_param_vars(tape, params);
      const ad::Var out =
          builder(tape, vars, std::span<const int>(epoch_order).subspan(done, len));
      train_acc += tape.value(out) * static_cast<double>(len);
      std::vector<double> grad = tape.gradient(out);
      if (config.l2 > 0.0) {
        for (int k = 0; k < n_params; ++k) {
          if (penalized[static_cast<std::size_t>(k)]) {
            grad[static_cast<std::size_t>(k)] += 2.0 * config.l2 * params.flat()[static_cast<std::size_t>(k)];
          }
        }
      }
      ++step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (int k = 0; k < n_params; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        m[ku] = beta1 * m[ku] + (1.0 - beta1) * grad[ku];
        v[ku] = beta2 * v[ku] + (1.0 - beta2) * grad[ku] * grad[ku];
        params.flat()[ku] -= lr * (m[ku] / bc1) / (std::sqrt(v[ku] / bc2) + eps);
      }
      done += len;
    }

    const double train_obj = train_acc / static_cast<double>(epoch_order.size());
    const double val_obj = evaluate_objective(builder, tape, params, val, eval_chunk);
    result.trace.push_back({epoch, train_obj, val_obj});

    if (val_obj < result.best_val_objective) {
      result.best_val_objective = val_obj;
      result.best_epoch = epoch;
      best_params = params.flat();
      bad_evals = 0;
      plateau_evals = 0;
    } else {
      ++bad_evals;
      ++plateau_evals;
      if (bad_evals >= config.patience) break;
      if (plateau_evals >= decay_patience && lr > config.min_learning_rate) {
        lr = std::max(lr * config.lr_decay_factor, config.min_learning_rate);
        plateau_evals = 0;
      }
    }
  }

  params.flat() = best_params;
  return result;
}

GradCheckResult finite_diff_check(
    const std::function<ad::Var(ad::Tape&, const ParamVars&)>& builder, ParameterStore& params,
    double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check: h must be > 0");
  ad::Tape tape;

  auto build_value = [&](std::uint64_t* signature) {
    tape.reset();
    const ParamVars vars = make_param_vars(tape, params);
    const ad::Var out = builder(tape, vars);
    if (signature != nullptr) *signature = tape.clamp_signature();
    return tape.value(out);
  };

  tape.reset();
  const ParamVars vars = make_param_vars(tape, params);
  const ad::Var out = builder(tape, vars);
  const std::vector<double> analytic = tape.gradient(out);
  const std::uint64_t center_signature = tape.clamp_signature();

  GradCheckResult res;
  res.clamp_active = tape.clamp_active();
  res.coordinates = params.size();
  for (int k = 0; k < params.size(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double saved = params.flat()[ku];
    std::uint64_t sig_plus = 0, sig_minus = 0;
    params.flat()[ku] = saved + h;
    const double f_plus = build_value(&sig_plus);
    params.flat()[ku] = saved - h;
    const double f_minus = build_value(&sig_minus);
    params.flat()[ku] = saved;
    if (sig_plus != center_signature || sig_minus != center_signature) {
      ++res.skipped_coordinates;
      continue;
    }
    const double fd = (f_plus - f_minus) / (2.0 * h);
    const double abs_err = std::abs(analytic[ku] - fd);
    const double rel_err = abs_err / std::max({1.0, std::abs(analytic[ku]), std::abs(fd)});
    res.max_abs_error = std::max(res.max_abs_error, abs_err);
    if (rel_err > res.max_rel_error) {
      res.max_rel_error = rel_err;
      res.worst_coordinate = k;
    }
  }
  return res;
}

}  // namespace survscore
