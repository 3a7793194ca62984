#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace survscore {

struct GradCheckCase {
  int index = 0;
  std::string description;  // model kind, rule, sizes
  double max_rel_err = 0.0;
  int coordinates = 0;
  int skipped = 0;  // clamp-signature exclusions
  bool pass = true;
};

struct GradCheckSuiteReport {
  std::vector<GradCheckCase> cases;
  double worst_rel_err = 0.0;
  bool pass = true;
};

// Random configurations cycling through {parametric, increment, cox_sr} x the
// five rules (and both integrated log-loss orientations), each checked with
// central finite differences against the tape gradient of the full-batch
// training objective. Coordinates whose perturbation flips a clamp branch are
// excluded by the builders' clamp signatures.
GradCheckSuiteReport run_gradcheck(int num_configs, std::uint64_t seed, double h = 1e-5,
                                   double tolerance = 1e-4);

std::string render_gradcheck(const GradCheckSuiteReport& report);

}  // namespace survscore
