#pragma once

#include "survscore/dataset.hpp"
#include "survscore/distributions.hpp"
#include "survscore/models.hpp"

namespace survscore {

struct AftMleOptions {
  int max_iter = 200;
  double tol = 1e-9;  // sup-norm of the mean log-likelihood gradient
};

// Censored maximum likelihood for the linear AFT model
// log T = b0 + x'b + sigma * eps. Newton with analytic gradient and a
// finite-difference Hessian, least-squares initialization, up to three
// jittered restarts. Returns the model in the shared parametric layout
// (linear trunk, shared log_scale).
ParametricSurvivalModel fit_aft_mle(const SurvivalDataset& data, const DistributionSpec& spec,
                                    const AftMleOptions& options = {});

}  // namespace survscore
