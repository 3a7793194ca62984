#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace survscore {

enum class Family { weibull, lognormal, loglogistic };

Family family_from_string(std::string_view name);
std::string to_string(Family family);

struct DistributionSpec {
  Family family = Family::lognormal;
  static constexpr int param_count = 2;
};

// Unconstrained parameters of the log-location-scale form
// log T = location + scale * eps, scale = exp(log_scale).
struct ParamVector {
  double location = 0.0;
  double log_scale = 0.0;

  double scale() const;
  std::array<double, 2> values() const { return {location, log_scale}; }
  static ParamVector from_values(const std::array<double, 2>& v) { return {v[0], v[1]}; }
};

enum class DistQuantity { cdf, sf, log_cdf, log_sf, log_pdf };

// Probability floor for the log forms: log_cdf and log_sf never return less
// than log(1e-12), with zero gradient when the floor binds. log_pdf is exact
// (unclamped) so likelihood fits stay faithful.
inline constexpr double kProbFloor = 1e-12;
inline const double kLogProbFloor = std::log(kProbFloor);

double cdf(const DistributionSpec& spec, const ParamVector& theta, double t);
double sf(const DistributionSpec& spec, const ParamVector& theta, double t);
double pdf(const DistributionSpec& spec, const ParamVector& theta, double t);
double log_cdf(const DistributionSpec& spec, const ParamVector& theta, double t);
double log_sf(const DistributionSpec& spec, const ParamVector& theta, double t);
double log_pdf(const DistributionSpec& spec, const ParamVector& theta, double t);

struct DistEval {
  double value = 0.0;
  double d_location = 0.0;
  double d_log_scale = 0.0;
  bool clamped = false;  // a floor or argument clamp zeroed the gradient
};

// Value plus exact partials with respect to the unconstrained parameters.
DistEval eval_with_grad(const DistributionSpec& spec, const ParamVector& theta, double t,
                        DistQuantity quantity);

std::array<double, 2> grad_theta(const DistributionSpec& spec, const ParamVector& theta, double t,
                                 DistQuantity quantity);

// Draw from the standard error law of the family (eps in log T = mu + sigma*eps).
double sample_standard_error(Family family, std::mt19937_64& rng);

double sample_event_time(const DistributionSpec& spec, const ParamVector& theta,
                         std::mt19937_64& rng);

}  // namespace survscore
