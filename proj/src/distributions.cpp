#include "survscore/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace survscore {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2*pi)/2
// Gumbel argument clamp: beyond |z| = 40 the Weibull tail under- or overflows
// double exponentials, so z is saturated (zero gradient there).
constexpr double kGumbelZMax = 40.0;

double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

double logistic_fn(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Standard-law bundle at z: distribution/survival/density values, log forms,
// and d(log pdf)/dz. Everything downstream is chain rule.
struct ErrorLaw {
  double cdf, sf, pdf;
  double log_cdf, log_sf, log_pdf;
  double dlogpdf_dz;
};

double normal_log_cdf(double z) {
  if (z > -20.0) {
    return std::log(0.5 * std::erfc(-z / std::sqrt(2.0)));
  }
  // Asymptotic left tail: log Phi(z) ~ -z^2/2 - log(-z) - log(2*pi)/2 + log1p(...)
  const double z2 = z * z;
  return -0.5 * z2 - std::log(-z) - kHalfLog2Pi +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2));
}

ErrorLaw normal_law(double z) {
  ErrorLaw e;
  e.log_pdf = -0.5 * z * z - kHalfLog2Pi;
  e.pdf = std::exp(e.log_pdf);
  e.cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  e.sf = 0.5 * std::erfc(z / std::sqrt(2.0));
  e.log_cdf = normal_log_cdf(z);
  e.log_sf = normal_log_cdf(-z);
  e.dlogpdf_dz = -z;
  return e;
}

ErrorLaw logistic_law(double z) {
  ErrorLaw e;
  const double s = logistic_fn(z);
  e.cdf = s;
  e.sf = 1.0 - s;
  e.log_cdf = -softplus(-z);
  e.log_sf = -softplus(z);
  e.log_pdf = z - 2.0 * softplus(z);
  e.pdf = std::exp(e.log_pdf);
  e.dlogpdf_dz = 1.0 - 2.0 * s;
  return e;
}

// Minimum Gumbel: F(z) = 1 - exp(-exp(z)); the AFT form of the Weibull.
ErrorLaw gumbel_law(double z) {
  ErrorLaw e;
  const double w = std::exp(z);
  e.log_sf = -w;
  e.sf = std::exp(-w);
  e.cdf = -std::expm1(-w);
  if (w > 1e-6) {
    e.log_cdf = std::log(e.cdf);
  } else {
    e.log_cdf = z + std::log1p(-0.5 * w);  // log(w - w^2/2 + ...) for tiny w
  }
  e.log_pdf = z - w;
  e.pdf = std::exp(e.log_pdf);
  e.dlogpdf_dz = 1.0 - w;
  return e;
}

struct ZInfo {
  double z = 0.0;
  bool saturated = false;  // Gumbel argument clamp active
};

ZInfo standardize(const DistributionSpec& spec, const ParamVector& theta, double t) {
  if (!(t > 0.0)) throw std::domain_error("distribution: t must be > 0");
  if (!std::isfinite(theta.location) || !std::isfinite(theta.log_scale)) {
    throw std::domain_error("distribution: non-finite parameters");
  }
  ZInfo out;
  out.z = (std::log(t) - theta.location) / theta.scale();
  if (spec.family == Family::weibull && std::abs(out.z) > kGumbelZMax) {
    out.z = out.z > 0.0 ? kGumbelZMax : -kGumbelZMax;
    out.saturated = true;
  }
  return out;
}

ErrorLaw law_at(Family family, double z) {
  switch (family) {
    case Family::lognormal: return normal_law(z);
    case Family::loglogistic: return logistic_law(z);
    case Family::weibull: return gumbel_law(z);
  }
  throw std::logic_error("unknown family");
}

}  // namespace

Family family_from_string(std::string_view name) {
  if (name == "weibull") return Family::weibull;
  if (name == "lognormal" || name == "log-normal") return Family::lognormal;
  if (name == "loglogistic" || name == "log-logistic") return Family::loglogistic;
  throw std::invalid_argument("unknown distribution family: " + std::string(name));
}

std::string to_string(Family family) {
  switch (family) {
    case Family::weibull: return "weibull";
    case Family::lognormal: return "lognormal";
    case Family::loglogistic: return "loglogistic";
  }
  throw std::logic_error("unknown family");
}

double ParamVector::scale() const {
  const double s = std::exp(log_scale);
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::domain_error("distribution: scale out of range");
  }
  return s;
}

double cdf(const DistributionSpec& spec, const ParamVector& theta, double t) {
  return law_at(spec.family, standardize(spec, theta, t).z).cdf;
}

double sf(const DistributionSpec& spec, const ParamVector& theta, double t) {
  return law_at(spec.family, standardize(spec, theta, t).z).sf;
}

double pdf(const DistributionSpec& spec, const ParamVector& theta, double t) {
  const auto z = standardize(spec, theta, t);
  return law_at(spec.family, z.z).pdf / (theta.scale() * t);
}

double log_cdf(const DistributionSpec& spec, const ParamVector& theta, double t) {
  const auto z = standardize(spec, theta, t);
  return std::max(law_at(spec.family, z.z).log_cdf, kLogProbFloor);
}

double log_sf(const DistributionSpec& spec, const ParamVector& theta, double t) {
  const auto z = standardize(spec, theta, t);
  return std::max(law_at(spec.family, z.z).log_sf, kLogProbFloor);
}

double log_pdf(const DistributionSpec& spec, const ParamVector& theta, double t) {
  const auto z = standardize(spec, theta, t);
  return law_at(spec.family, z.z).log_pdf - theta.log_scale - std::log(t);
}

DistEval eval_with_grad(const DistributionSpec& spec, const ParamVector& theta, double t,
                        DistQuantity quantity) {
  const ZInfo zi = standardize(spec, theta, t);
  const ErrorLaw law = law_at(spec.family, zi.z);
  const double sigma = theta.scale();
  // z = (log t - mu)/sigma: dz/dmu = -1/sigma, dz/d(log sigma) = -z.
  const double dz_dmu = -1.0 / sigma;
  const double dz_ds = -zi.z;

  DistEval out;
  double dv_dz = 0.0;
  double extra_ds = 0.0;  // direct log_scale dependence outside of z
  switch (quantity) {
    case DistQuantity::cdf:
      out.value = law.cdf;
      dv_dz = law.pdf;
      break;
    case DistQuantity::sf:
      out.value = law.sf;
      dv_dz = -law.pdf;
      break;
    case DistQuantity::log_cdf:
      out.value = law.log_cdf;
      dv_dz = std::exp(law.log_pdf - law.log_cdf);
      if (out.value <= kLogProbFloor) {
        out.value = kLogProbFloor;
        out.clamped = true;
        dv_dz = 0.0;
      }
      break;
    case DistQuantity::log_sf:
      out.value = law.log_sf;
      dv_dz = -std::exp(law.log_pdf - law.log_sf);
      if (out.value <= kLogProbFloor) {
        out.value = kLogProbFloor;
        out.clamped = true;
        dv_dz = 0.0;
      }
      break;
    case DistQuantity::log_pdf:
      out.value = law.log_pdf - theta.log_scale - std::log(t);
      dv_dz = law.dlogpdf_dz;
      extra_ds = -1.0;
      break;
  }
  if (zi.saturated) {
    // Saturated standardization: z constant in the parameters.
    out.clamped = true;
    dv_dz = 0.0;
  }
  out.d_location = dv_dz * dz_dmu;
  out.d_log_scale = dv_dz * dz_ds + extra_ds;
  return out;
}

std::array<double, 2> grad_theta(const DistributionSpec& spec, const ParamVector& theta, double t,
                                 DistQuantity quantity) {
  const DistEval e = eval_with_grad(spec, theta, t, quantity);
  return {e.d_location, e.d_log_scale};
}

double sample_standard_error(Family family, std::mt19937_64& rng) {
  switch (family) {
    case Family::lognormal: {
      std::normal_distribution<double> normal(0.0, 1.0);
      return normal(rng);
    }
    case Family::loglogistic: {
      std::uniform_real_distribution<double> unif(std::numeric_limits<double>::min(), 1.0);
      const double u = unif(rng);
      return std::log(u) - std::log1p(-u);
    }
    case Family::weibull: {
      std::uniform_real_distribution<double> unif(std::numeric_limits<double>::min(), 1.0);
      // Inverse of F(z) = 1 - exp(-exp(z)).
      return std::log(-std::log1p(-unif(rng)));
    }
  }
  throw std::logic_error("unknown family");
}

double sample_event_time(const DistributionSpec& spec, const ParamVector& theta,
                         std::mt19937_64& rng) {
  const double eps = sample_standard_error(spec.family, rng);
  return std::exp(theta.location + theta.scale() * eps);
}

}  // namespace survscore
