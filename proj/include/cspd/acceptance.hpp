#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cspd/experiment.hpp"

namespace cspd {

/// Multipliers on top of the QCQP experiment coefficients for the d = 10,
/// m = 5 acceptance instance.
inline constexpr StepMultipliers kQcqpDeskScale{0.002, 8.0};

struct AcceptanceOptions {
  /// Criterion ids 1..12 to run; empty runs all.
  std::vector<int> criteria;
  /// Extra multipliers applied to every scaled schedule.
  StepMultipliers extra;
  double reference_tol = 1e-8;
  int jobs = 1;
  std::uint64_t master_seed = 0;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the acceptance suite and prints one PASS/FAIL line per criterion to
/// `out` as each finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out);

/// Saddle of the zero-sum toy from a resolution-1e-3 grid search. The saddle
/// set is not a single point; this returns the first grid saddle in
/// lexicographic order together with the grid saddle value.
struct ToyGridSaddle {
  ReferenceSolution ref;
  double value = 0.0;
};
ToyGridSaddle toy_grid_saddle();

/// Reads {criteria, schedule: {dual_scale, primal_scale}, reference: {target_tol},
/// jobs, master_seed}; every key optional.
AcceptanceOptions parse_acceptance_options(const nlohmann::json& j);

}  // namespace cspd
