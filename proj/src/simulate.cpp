#include "survscore/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <stdexcept>

#include "survscore/util.hpp"

namespace survscore {

DgpKind dgp_kind_from_string(std::string_view name) {
  if (name == "aft_simple") return DgpKind::aft_simple;
  if (name == "complex") return DgpKind::complex_nonlinear;
  if (name == "competing") return DgpKind::competing;
  throw std::invalid_argument("unknown DGP kind: " + std::string(name));
}

std::string to_string(DgpKind kind) {
  switch (kind) {
    case DgpKind::aft_simple: return "aft_simple";
    case DgpKind::complex_nonlinear: return "complex";
    case DgpKind::competing: return "competing";
  }
  throw std::logic_error("unreachable");
}

void DgpConfig::validate() const {
  if (n < 1) throw std::invalid_argument("dgp: n must be >= 1");
  if (sigma <= 0.0) throw std::invalid_argument("dgp: sigma must be > 0");
  if (kind == DgpKind::aft_simple && beta.size() != 4) {
    throw std::invalid_argument("dgp: beta must hold intercept plus three coefficients");
  }
  if (censoring_rate >= 1.0) throw std::invalid_argument("dgp: censoring target must be < 1");
}

double calibrate_uniform_censoring(const std::vector<double>& pilot_event_times,
                                   double target_rate) {
  if (pilot_event_times.empty()) {
    throw std::invalid_argument("censoring calibration: empty pilot sample");
  }
  if (target_rate <= 0.0 || target_rate >= 1.0) {
    throw std::invalid_argument("censoring calibration: target rate must be in (0, 1)");
  }
  // P(C < y) for C ~ U(0, c) is min(y / c, 1); the expected rate is its pilot
  // mean, strictly decreasing in c once c exceeds the smallest event time.
  const auto rate_at = [&](double c) {
    double acc = 0.0;
    for (double y : pilot_event_times) acc += std::min(y / c, 1.0);
    return acc / static_cast<double>(pilot_event_times.size());
  };
  double hi = *std::max_element(pilot_event_times.begin(), pilot_event_times.end());
  if (hi <= 0.0) throw std::invalid_argument("censoring calibration: nonpositive event times");
  for (int i = 0; i < 60 && rate_at(hi) > target_rate; ++i) hi *= 2.0;
  double lo = 0.0;  // rate -> 1 as c -> 0+
  for (int i = 0; i < 20; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (rate_at(mid) > target_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

constexpr int kPilotSize = 100000;

// Latent event-time sampler: fills the feature vector and returns (time, cause).
struct LatentDraw {
  double time = 0.0;
  int cause = 1;
};

double aft_latent(const DgpConfig& cfg, std::span<const double> x, std::mt19937_64& rng) {
  double eta = cfg.beta[0];
  for (std::size_t j = 0; j < 3; ++j) eta += cfg.beta[j + 1] * x[j];
  return std::exp(eta + cfg.sigma * sample_standard_error(cfg.family, rng));
}

double complex_location(std::span<const double> x) {
  return 2.0 + 0.5 * x[0] + std::sin(2.0 * x[1]) + 0.3 * x[0] * x[2] + 0.4 * x[3] * x[3];
}

double complex_latent(std::span<const double> x, std::mt19937_64& rng) {
  return std::exp(complex_location(x) + 0.4 * sample_standard_error(Family::lognormal, rng));
}

LatentDraw competing_latent(std::span<const double> x, std::mt19937_64& rng) {
  const double t1 = complex_latent(x, rng);
  const double eta2 = 2.2 + 0.4 * x[0];
  const double t2 = std::exp(eta2 + 0.4 * sample_standard_error(Family::lognormal, rng));
  return t1 <= t2 ? LatentDraw{t1, 1} : LatentDraw{t2, 2};
}

// Draws features + latent time for one subject of the given DGP.
LatentDraw draw_subject(const DgpConfig& cfg, std::vector<double>& x, std::mt19937_64& rng) {
  std::normal_distribution<double> norm(0.0, 1.0);
  const std::size_t p = cfg.kind == DgpKind::aft_simple ? 3 : 4;
  x.resize(p);
  for (double& v : x) v = norm(rng);
  switch (cfg.kind) {
    case DgpKind::aft_simple: return {aft_latent(cfg, x, rng), 1};
    case DgpKind::complex_nonlinear: return {complex_latent(x, rng), 1};
    case DgpKind::competing: return competing_latent(x, rng);
  }
  throw std::logic_error("unreachable");
}

SurvivalDataset simulate_impl(const DgpConfig& cfg) {
  cfg.validate();

  double c_max = 0.0;
  if (cfg.censoring_rate > 0.0) {
    std::mt19937_64 pilot_rng(derive_seed(cfg.seed, 0));
    std::vector<double> pilot;
    pilot.reserve(kPilotSize);
    std::vector<double> x;
    for (int i = 0; i < kPilotSize; ++i) pilot.push_back(draw_subject(cfg, x, pilot_rng).time);
    c_max = calibrate_uniform_censoring(pilot, cfg.censoring_rate);
  }

  std::mt19937_64 rng(derive_seed(cfg.seed, 1));
  std::uniform_real_distribution<double> unif(0.0, c_max);
  std::vector<SurvivalRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.n));
  std::vector<double> x;
  for (int i = 0; i < cfg.n; ++i) {
    const LatentDraw latent = draw_subject(cfg, x, rng);
    SurvivalRecord rec;
    rec.features = x;
    if (cfg.censoring_rate > 0.0) {
      double c = unif(rng);
      while (c <= 0.0) c = unif(rng);  // observed times must stay positive
      rec.status = latent.time <= c ? 1 : 0;
      rec.time = rec.status == 1 ? latent.time : c;
    } else {
      rec.status = 1;
      rec.time = latent.time;
    }
    rec.cause = rec.status == 1 ? latent.cause : 1;
    records.push_back(std::move(rec));
  }
  return SurvivalDataset::make(std::move(records),
                               cfg.kind == DgpKind::competing ? 2 : 1);
}

}  // namespace

SurvivalDataset simulate(const DgpConfig& config) { return simulate_impl(config); }

SurvivalDataset simulate_aft(const DgpConfig& config) {
  if (config.kind != DgpKind::aft_simple) {
    throw std::invalid_argument("simulate_aft: config.kind must be aft_simple");
  }
  return simulate_impl(config);
}

SurvivalDataset simulate_complex(int n, std::uint64_t seed, double censoring_rate) {
  DgpConfig cfg;
  cfg.kind = DgpKind::complex_nonlinear;
  cfg.n = n;
  cfg.censoring_rate = censoring_rate;
  cfg.seed = seed;
  return simulate_impl(cfg);
}

SurvivalDataset simulate_cr(int n, std::uint64_t seed, double censoring_rate) {
  DgpConfig cfg;
  cfg.kind = DgpKind::competing;
  cfg.n = n;
  cfg.censoring_rate = censoring_rate;
  cfg.seed = seed;
  return simulate_impl(cfg);
}

}  // namespace survscore
