#pragma once

#include <vector>

#include "survscore/dataset.hpp"
#include "survscore/step_function.hpp"

namespace survscore {

// Classical proportional-hazards fit: S(t | x) = S0(t)^exp(x beta).
struct CoxModel {
  std::vector<double> beta;
  StepFunction baseline_survival;  // Breslow, exp(-Lambda0)
};

struct CoxOptions {
  int max_iter = 50;
  double tol = 1e-9;          // sup-norm of the score (mean log-likelihood)
  double divergence_norm = 50.0;
};

// Newton-Raphson on the Breslow partial likelihood (ties: Breslow). Throws on
// separation (diverging beta) or collinear features.
CoxModel fit_cox_mle(const SurvivalDataset& data, const CoxOptions& options = {});

}  // namespace survscore
