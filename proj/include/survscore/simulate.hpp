#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "survscore/dataset.hpp"
#include "survscore/distributions.hpp"

namespace survscore {

enum class DgpKind { aft_simple, complex_nonlinear, competing };

DgpKind dgp_kind_from_string(std::string_view name);
std::string to_string(DgpKind kind);

// Synthetic data-generating processes. aft_simple draws three standard-normal
// features and log T = beta0 + beta1 x1 + beta2 x2 + beta3 x3 + sigma eps with
// eps the family's error law. complex_nonlinear fixes a log-normal AFT with
// location 2 + 0.5 x1 + sin(2 x2) + 0.3 x1 x3 + 0.4 x4^2 and sigma 0.4 on four
// standard-normal features. competing pairs the complex cause (cause 1) with a
// log-linear one (location 2.2 + 0.4 x1, sigma 0.4, cause 2); the observed
// cause is the argmin of the latent times.
//
// Censoring is uniform on (0, c_max); c_max is calibrated against the target
// rate, and a nonpositive target disables censoring entirely. Status is
// d = 1(y <= c); the observed time is min(y, c).
struct DgpConfig {
  DgpKind kind = DgpKind::aft_simple;
  Family family = Family::lognormal;          // aft_simple only
  int n = 1500;
  std::vector<double> beta = {2.0, 0.5, 0.2, 0.0};  // intercept first; aft_simple only
  double sigma = 0.4;                         // aft_simple only
  double censoring_rate = 0.28;               // target; <= 0 turns censoring off
  std::uint64_t seed = 1;

  void validate() const;
};

SurvivalDataset simulate(const DgpConfig& config);

SurvivalDataset simulate_aft(const DgpConfig& config);
SurvivalDataset simulate_complex(int n, std::uint64_t seed, double censoring_rate = 0.28);
SurvivalDataset simulate_cr(int n, std::uint64_t seed, double censoring_rate = 0.28);

// Upper bound c_max such that the expected censoring fraction of C ~ U(0, c_max)
// against the pilot event times hits the target: 20 bisection iterations on
// mean_i min(y_i / c, 1), after doubling out an upper bracket.
double calibrate_uniform_censoring(const std::vector<double>& pilot_event_times,
                                   double target_rate);

}  // namespace survscore
