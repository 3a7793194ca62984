#include "survscore/aft_mle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

namespace survscore {

namespace {

// phi = (b0, b1..bp, log sigma)
struct MleProblem {
  const SurvivalDataset* data;
  DistributionSpec spec;

  int dim() const { return data->p() + 2; }

  double nll(const Eigen::VectorXd& phi) const {
    const int p = data->p();
    double acc = 0.0;
    for (const auto& r : data->records()) {
      ParamVector theta;
      theta.location = phi[0];
      for (int k = 0; k < p; ++k) theta.location += phi[k + 1] * r.features[static_cast<std::size_t>(k)];
      theta.log_scale = phi[p + 1];
      acc -= r.status == 1 ? log_pdf(spec, theta, r.time) : log_sf(spec, theta, r.time);
    }
    return acc / data->n();
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& phi) const {
    const int p = data->p();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
    for (const auto& r : data->records()) {
      ParamVector theta;
      theta.location = phi[0];
      for (int k = 0; k < p; ++k) theta.location += phi[k + 1] * r.features[static_cast<std::size_t>(k)];
      theta.log_scale = phi[p + 1];
      const DistEval e = eval_with_grad(
          spec, theta, r.time, r.status == 1 ? DistQuantity::log_pdf : DistQuantity::log_sf);
      g[0] -= e.d_location;
      for (int k = 0; k < p; ++k) g[k + 1] -= e.d_location * r.features[static_cast<std::size_t>(k)];
      g[p + 1] -= e.d_log_scale;
    }
    return g / data->n();
  }

  Eigen::MatrixXd hessian_fd(const Eigen::VectorXd& phi) const {
    const int m = dim();
    Eigen::MatrixXd h(m, m);
    for (int k = 0; k < m; ++k) {
      const double step = 1e-6 * std::max(1.0, std::abs(phi[k]));
      Eigen::VectorXd hi = phi, lo = phi;
      hi[k] += step;
      lo[k] -= step;
      h.col(k) = (grad(hi) - grad(lo)) / (2.0 * step);
    }
    return 0.5 * (h + h.transpose());  // symmetrize
  }
};

Eigen::VectorXd least_squares_init(const SurvivalDataset& data) {
  const int p = data.p();
  const int n = data.n();
  Eigen::MatrixXd x(n, p + 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int k = 0; k < p; ++k) x(i, k + 1) = data[i].features[static_cast<std::size_t>(k)];
    y[i] = std::log(data[i].time);
  }
  Eigen::MatrixXd xtx = x.transpose() * x;
  xtx.diagonal().array() += 1e-8;
  const Eigen::VectorXd beta = xtx.ldlt().solve(x.transpose() * y);
  const Eigen::VectorXd resid = y - x * beta;
  const double sd = std::sqrt(resid.squaredNorm() / std::max(1, n - p - 1));

  Eigen::VectorXd phi(p + 2);
  phi.head(p + 1) = beta;
  phi[p + 1] = std::log(std::max(sd, 1e-3));
  return phi;
}

}  // namespace

ParametricSurvivalModel fit_aft_mle(const SurvivalDataset& data, const DistributionSpec& spec,
                                    const AftMleOptions& options) {
  const int p = data.p();
  if (data.n() <= p + 2) {
    throw std::invalid_argument("aft mle: need n > p + 2 records");
  }

  const MleProblem problem{&data, spec};
  const Eigen::VectorXd phi0 = least_squares_init(data);

  Eigen::VectorXd best = phi0;
  bool converged = false;
  for (int attempt = 0; attempt < 3 && !converged; ++attempt) {
    Eigen::VectorXd phi = phi0;
    if (attempt > 0) {
      std::mt19937_64 rng(static_cast<std::uint64_t>(attempt));
      std::normal_distribution<double> jitter(0.0, 0.1);
      for (int k = 0; k < phi.size(); ++k) phi[k] += jitter(rng);
    }
    double nll = problem.nll(phi);
    double ridge = 1e-10;
    for (int iter = 0; iter < options.max_iter; ++iter) {
      const Eigen::VectorXd g = problem.grad(phi);
      if (g.lpNorm<Eigen::Infinity>() < options.tol) {
        converged = true;
        break;
      }
      Eigen::MatrixXd h = problem.hessian_fd(phi);
      h.diagonal().array() += ridge;
      Eigen::VectorXd delta = h.ldlt().solve(-g);
      if (!delta.allFinite()) {
        ridge *= 100.0;
        continue;
      }
      bool improved = false;
      double scale = 1.0;
      for (int halving = 0; halving < 30; ++halving) {
        const Eigen::VectorXd cand = phi + scale * delta;
        const double cand_nll = problem.nll(cand);
        if (std::isfinite(cand_nll) && cand_nll <= nll) {
          phi = cand;
          nll = cand_nll;
          improved = true;
          break;
        }
        scale *= 0.5;
      }
      if (!improved) {
        ridge *= 100.0;
        if (ridge > 1e6) break;
      } else {
        ridge = std::max(ridge / 10.0, 1e-10);
      }
    }
    if (converged || problem.grad(phi).lpNorm<Eigen::Infinity>() < 1e-6) {
      best = phi;
      converged = true;
    }
  }
  if (!converged) {
    throw std::runtime_error("aft mle: optimization failed to converge after restarts");
  }

  ParametricSurvivalModel model;
  model.spec = spec;
  model.constant_scale = true;
  model.trunk = MlpSpec{p, {}, 1, Activation::tanh};
  register_mlp_params(model.trunk, model.params, "trunk");
  model.params.add_slice("log_scale", 1, false);
  auto w = model.params.slice("trunk.W0");
  for (int k = 0; k < p; ++k) w[static_cast<std::size_t>(k)] = best[k + 1];
  model.params.slice("trunk.b0")[0] = best[0];
  model.params.slice("log_scale")[0] = best[p + 1];
  return model;
}

}  // namespace survscore
