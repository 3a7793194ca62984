#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "survscore/distributions.hpp"

using namespace survscore;

namespace {

// Independent closed forms: log T = mu + sigma*eps with eps standard normal,
// standard logistic, or standard minimum Gumbel respectively.
double z_of(const ParamVector& theta, double t) {
  return (std::log(t) - theta.location) / theta.scale();
}

double cdf_oracle(Family family, const ParamVector& theta, double t) {
  const double z = z_of(theta, t);
  switch (family) {
    case Family::lognormal: return 0.5 * std::erfc(-z / std::sqrt(2.0));
    case Family::loglogistic: return 1.0 / (1.0 + std::exp(-z));
    case Family::weibull: return -std::expm1(-std::exp(z));
  }
  return 0.0;
}

double error_cdf(Family family, double z) {
  switch (family) {
    case Family::lognormal: return 0.5 * std::erfc(-z / std::sqrt(2.0));
    case Family::loglogistic: return 1.0 / (1.0 + std::exp(-z));
    case Family::weibull: return -std::expm1(-std::exp(z));
  }
  return 0.0;
}

// Simpson's rule on [a, b].
template <typename F>
double simpson(F f, double a, double b, int panels) {
  const double h = (b - a) / (2 * panels);
  double acc = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double ks_statistic(std::vector<double> sample, Family family) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = error_cdf(family, sample[i]);
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

const Family kFamilies[] = {Family::weibull, Family::lognormal, Family::loglogistic};

}  // namespace

TEST_CASE("cdf matches the closed-form oracle") {
  for (Family family : kFamilies) {
    const DistributionSpec spec{family};
    for (ParamVector theta : {ParamVector{0.0, 0.0}, ParamVector{2.0, std::log(0.4)},
                              ParamVector{-1.0, 0.5}}) {
      for (double t : {0.05, 0.5, 1.0, 3.0, 7.5, 40.0}) {
        CHECK(cdf(spec, theta, t) ==
              doctest::Approx(cdf_oracle(family, theta, t)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("cdf and sf stay in [0,1] and sum to one") {
  for (Family family : kFamilies) {
    const DistributionSpec spec{family};
    const ParamVector theta{1.0, std::log(0.7)};
    for (double t : {1e-6, 0.1, 1.0, 2.7, 10.0, 1e4}) {
      const double f = cdf(spec, theta, t);
      const double s = sf(spec, theta, t);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
      CHECK(f + s == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("pdf integrates to the cdf increment") {
  for (Family family : kFamilies) {
    const DistributionSpec spec{family};
    const ParamVector theta{0.5, std::log(0.6)};
    const double a = 0.2, b = 6.0;
    const double integral =
        simpson([&](double t) { return pdf(spec, theta, t); }, a, b, 2000);
    CHECK(integral == doctest::Approx(cdf(spec, theta, b) - cdf(spec, theta, a)).epsilon(1e-8));
  }
}

TEST_CASE("pdf matches the finite-difference derivative of the cdf") {
  for (Family family : kFamilies) {
    const DistributionSpec spec{family};
    const ParamVector theta{1.2, std::log(0.5)};
    for (double t : {0.5, 1.5, 4.0, 9.0}) {
      const double h = 1e-6 * t;
      const double fd = (cdf(spec, theta, t + h) - cdf(spec, theta, t - h)) / (2 * h);
      CHECK(pdf(spec, theta, t) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("log forms agree with logs of the plain forms above the floor") {
  for (Family family : kFamilies) {
    const DistributionSpec spec{family};
    const ParamVector theta{0.0, 0.0};
    for (double t : {0.3, 1.0, 2.5}) {
      CHECK(std::exp(log_cdf(spec, theta, t)) == doctest::Approx(cdf(spec, theta, t)).epsilon(1e-12));
      CHECK(std::exp(log_sf(spec, theta, t)) == doctest::Approx(sf(spec, theta, t)).epsilon(1e-12));
      CHECK(std::exp(log_pdf(spec, theta, t)) == doctest::Approx(pdf(spec, theta, t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("log_sf floors at log(1e-12) with a dead gradient") {
  const DistributionSpec spec{Family::lognormal};
  const ParamVector theta{0.0, std::log(0.1)};  // S(e^3) astronomically small
  const double t = std::exp(3.0);
  CHECK(log_sf(spec, theta, t) == kLogProbFloor);
  const DistEval e = eval_with_grad(spec, theta, t, DistQuantity::log_sf);
  CHECK(e.clamped);
  CHECK(e.d_location == 0.0);
  CHECK(e.d_log_scale == 0.0);
}

TEST_CASE("parameter gradients match central finite differences") {
  const DistQuantity quantities[] = {DistQuantity::cdf, DistQuantity::sf, DistQuantity::log_cdf,
                                     DistQuantity::log_sf, DistQuantity::log_pdf};
  const double h = 1e-6;
  for (Family family : kFamilies) {
    const DistributionSpec spec{family};
    for (ParamVector theta : {ParamVector{0.3, -0.2}, ParamVector{1.5, std::log(0.4)}}) {
      for (double t : {0.4, 1.1, 3.0}) {
        for (DistQuantity q : quantities) {
          const DistEval e = eval_with_grad(spec, theta, t, q);
          if (e.clamped) continue;
          auto value_at = [&](double mu, double ls) {
            return eval_with_grad(spec, ParamVector{mu, ls}, t, q).value;
          };
          const double fd_mu =
              (value_at(theta.location + h, theta.log_scale) -
               value_at(theta.location - h, theta.log_scale)) / (2 * h);
          const double fd_ls =
              (value_at(theta.location, theta.log_scale + h) -
               value_at(theta.location, theta.log_scale - h)) / (2 * h);
          CHECK(e.d_location == doctest::Approx(fd_mu).epsilon(5e-6));
          CHECK(e.d_log_scale == doctest::Approx(fd_ls).epsilon(5e-6));
        }
      }
    }
  }
}

TEST_CASE("weibull standardization saturates for extreme arguments") {
  const DistributionSpec spec{Family::weibull};
  const ParamVector theta{0.0, std::log(0.05)};
  const double t = std::exp(10.0);  // z = 200, far past the cutoff
  const DistEval e = eval_with_grad(spec, theta, t, DistQuantity::cdf);
  CHECK(e.clamped);
  CHECK(e.d_location == 0.0);
  CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("standard error samples pass a ks test against their law") {
  for (Family family : kFamilies) {
    std::mt19937_64 rng(99);
    std::vector<double> sample(20000);
    for (double& x : sample) x = sample_standard_error(family, rng);
    CHECK(ks_statistic(sample, family) < 0.015);  // alpha ~ 1e-3 critical value is 0.0138
  }
}

TEST_CASE("event-time sampling composes location, scale, and the error law") {
  const ParamVector theta{1.6, std::log(0.5)};
  for (Family family : kFamilies) {
    const DistributionSpec spec{family};
    std::mt19937_64 rng(7);
    std::vector<double> z(20000);
    for (double& x : z) {
      x = (std::log(sample_event_time(spec, theta, rng)) - theta.location) / theta.scale();
    }
    CHECK(ks_statistic(z, family) < 0.015);
  }
}

TEST_CASE("family names round-trip") {
  for (Family family : kFamilies) {
    CHECK(family_from_string(to_string(family)) == family);
  }
  CHECK_THROWS(family_from_string("cauchy"));
  CHECK(ParamVector{0.0, std::log(2.0)}.scale() == doctest::Approx(2.0));
}
