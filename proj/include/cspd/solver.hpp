#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cspd/core.hpp"
#include "cspd/schedule.hpp"

namespace cspd {

struct InitialPoint {
  Vec x0, y0, gamma0, lambda0;
};

struct RunConfig {
  std::int64_t n_iters = 1;
  StepSchedule schedule;
  std::uint64_t seed = 0;
  /// Sorted iteration counts in [1, n_iters] at which averages are recorded.
  std::vector<std::int64_t> checkpoints;
  std::optional<InitialPoint> initial_point;
  /// Called after every completed iteration; for diagnostics and tests.
  std::function<void(const IterateState&)> on_step;
  /// Identifies the run within the seed's stream family.
  std::uint64_t run_id = 0;
};

struct CheckpointRecord {
  std::int64_t t = 0;
  Vec x_bar, y_bar;
  double gamma_norm_max = 0.0;
  double lambda_norm_max = 0.0;
  double dual_sq_max = 0.0;
  double wall_ms = 0.0;
};

struct RunTrace {
  std::vector<CheckpointRecord> records;
  IterateState final_state;
};

/// Default start: x_0, y_0 are the projections of zero; duals are zero.
InitialPoint default_initial_point(const ProblemInstance& problem);

/// Fixed-step primal-dual loop: per iteration a projected dual ascent on
/// gamma, a projected dual step on lambda, then projected primal steps on x
/// (descent) and y (ascent) using the new multipliers. Requires a BasicFixed
/// schedule with horizon == n_iters, or a Constant schedule.
RunTrace run_basic_cspd(const ProblemInstance& problem, const RunConfig& config);

/// Anchored variant with horizon-free steps. Requires an AdaptiveOpen or
/// Constant schedule and a zero dual start.
RunTrace run_adp_cspd(const ProblemInstance& problem, const RunConfig& config);

}  // namespace cspd
