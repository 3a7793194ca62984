#include "survscore/cox.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace survscore {

namespace {

struct SortedCox {
  // records ordered by ascending time
  std::vector<double> time;
  std::vector<int> status;
  Eigen::MatrixXd x;  // n rows, p cols
};

SortedCox sort_records(const SurvivalDataset& data) {
  const int n = data.n();
  const int p = data.p();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return data[a].time < data[b].time; });
  SortedCox s;
  s.time.resize(static_cast<std::size_t>(n));
  s.status.resize(static_cast<std::size_t>(n));
  s.x.resize(n, p);
  for (int i = 0; i < n; ++i) {
    const auto& r = data[order[static_cast<std::size_t>(i)]];
    s.time[static_cast<std::size_t>(i)] = r.time;
    s.status[static_cast<std::size_t>(i)] = r.status;
    for (int k = 0; k < p; ++k) s.x(i, k) = r.features[static_cast<std::size_t>(k)];
  }
  return s;
}

// Breslow partial log-likelihood with gradient and Hessian of the negative
// mean (per event). Risk sums accumulate from the largest time downward.
struct PartialLik {
  double value = 0.0;        // log-likelihood
  Eigen::VectorXd grad;      // d value / d beta
  Eigen::MatrixXd hess;      // d^2 value / d beta^2 (negative semidefinite)
};

PartialLik partial_lik(const SortedCox& s, const Eigen::VectorXd& beta) {
  const int n = static_cast<int>(s.time.size());
  const int p = static_cast<int>(beta.size());
  PartialLik out;
  out.grad = Eigen::VectorXd::Zero(p);
  out.hess = Eigen::MatrixXd::Zero(p, p);

  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);

  int i = n - 1;
  while (i >= 0) {
    // absorb everyone tied at this time into the risk set
    const double t = s.time[static_cast<std::size_t>(i)];
    int j = i;
    while (j >= 0 && s.time[static_cast<std::size_t>(j)] == t) {
      const Eigen::VectorXd xi = s.x.row(j).transpose();
      const double w = std::exp(beta.dot(xi));
      s0 += w;
      s1 += w * xi;
      s2 += w * xi * xi.transpose();
      --j;
    }
    for (int e = j + 1; e <= i; ++e) {
      if (s.status[static_cast<std::size_t>(e)] != 1) continue;
      const Eigen::VectorXd xi = s.x.row(e).transpose();
      const Eigen::VectorXd mean = s1 / s0;
      out.value += beta.dot(xi) - std::log(s0);
      out.grad += xi - mean;
      out.hess -= s2 / s0 - mean * mean.transpose();
    }
    i = j;
  }
  return out;
}

}  // namespace

CoxModel fit_cox_mle(const SurvivalDataset& data, const CoxOptions& options) {
  const int p = data.p();
  const SortedCox s = sort_records(data);
  const int n_events = data.event_count();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (p > 0) {
    double lik = partial_lik(s, beta).value;
    for (int iter = 0; iter < options.max_iter; ++iter) {
      const PartialLik pl = partial_lik(s, beta);
      if ((pl.grad / n_events).lpNorm<Eigen::Infinity>() < options.tol) break;

      const Eigen::MatrixXd info = -pl.hess;  // observed information, PSD
      Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
      lu.setThreshold(1e-10);
      if (lu.rank() < p) {
        throw std::runtime_error("cox: singular information matrix (collinear features)");
      }
      const Eigen::VectorXd delta = lu.solve(pl.grad);

      double scale = 1.0;
      bool improved = false;
      for (int halving = 0; halving < 30; ++halving) {
        const Eigen::VectorXd cand = beta + scale * delta;
        const double cand_lik = partial_lik(s, cand).value;
        if (std::isfinite(cand_lik) && cand_lik >= lik) {
          beta = cand;
          lik = cand_lik;
          improved = true;
          break;
        }
        scale *= 0.5;
      }
      if (!improved) break;
      if (beta.norm() > options.divergence_norm) {
        throw std::runtime_error("cox: separation detected (coefficients diverging)");
      }
    }
    if (beta.norm() > options.divergence_norm) {
      throw std::runtime_error("cox: separation detected (coefficients diverging)");
    }
  }

  // Breslow baseline: Lambda0 jumps by d_t / sum_{risk} exp(x beta) at each
  // event time.
  std::vector<double> knots, values;
  const int n = data.n();
  std::vector<double> risk(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double w = 0.0;
    if (p > 0) {
      w = std::exp(beta.dot(s.x.row(i).transpose()));
    } else {
      w = 1.0;
    }
    risk[static_cast<std::size_t>(i)] = risk[static_cast<std::size_t>(i) + 1] + w;
  }
  double cum = 0.0;
  int i = 0;
  while (i < n) {
    const double t = s.time[static_cast<std::size_t>(i)];
    int d = 0;
    const double denom = risk[static_cast<std::size_t>(i)];
    int j = i;
    while (j < n && s.time[static_cast<std::size_t>(j)] == t) {
      d += s.status[static_cast<std::size_t>(j)];
      ++j;
    }
    if (d > 0) {
      cum += d / denom;
      knots.push_back(t);
      values.push_back(std::exp(-cum));
    }
    i = j;
  }

  CoxModel model;
  model.beta.assign(beta.data(), beta.data() + beta.size());
  model.baseline_survival = StepFunction::make(std::move(knots), std::move(values), 1.0);
  return model;
}

}  // namespace survscore
