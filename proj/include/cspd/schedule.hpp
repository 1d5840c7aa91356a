#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cspd/core.hpp"

namespace cspd {

/// Step sizes for one iteration. eta/kappa weight the primal proximity terms,
/// beta/alpha the dual ones; rho/phi/tau/nu are the anchor (majorization)
/// weights toward x_0, y_0, gamma_0, lambda_0 and stay zero for fixed steps.
struct StepSizes {
  double eta = 1.0;
  double kappa = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double rho = 0.0;
  double phi = 0.0;
  double tau = 0.0;
  double nu = 0.0;
};

struct StepMultipliers {
  double dual_scale = 1.0;    // beta, tau, alpha, nu
  double primal_scale = 1.0;  // eta, rho, kappa, phi
};

/// Leading coefficients c in eta = c * sqrt(N) (fixed horizon) or
/// eta = c * sqrt(t + 2) (open horizon), and likewise for the others.
struct StepCoefficients {
  double eta = 1.0;
  double kappa = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
};

enum class ScheduleKind {
  BasicFixed,    // constant in t, scaled by sqrt(horizon)
  AdaptiveOpen,  // horizon-free, anchored
  Constant,      // explicit StepSizes, for experiments and degeneracy checks
};

struct StepSchedule {
  ScheduleKind kind = ScheduleKind::AdaptiveOpen;
  std::int64_t horizon = 0;  // BasicFixed only
  StepCoefficients coefficients;
  StepMultipliers multipliers;
  StepSizes fixed;  // Constant only

  /// Fixed-horizon steps eta = 4 sqrt(N) C_h^2, kappa = 4 sqrt(N) C_g^2,
  /// alpha = beta = 4 sqrt(N).
  static StepSchedule basic(std::int64_t horizon, const ProblemConstants& constants,
                            const Dims& dims, StepMultipliers multipliers = {});
  /// beta_t = C_h^2 sqrt(t+1), alpha_t = C_g^2 sqrt(t+1), eta_t = kappa_t = 16 sqrt(t+2),
  /// anchors chosen so that beta_t + tau_t = beta_{t+1} (same for each pair).
  static StepSchedule adaptive(const ProblemConstants& constants, const Dims& dims,
                               StepMultipliers multipliers = {});
  /// Experiment presets: explicit leading coefficients.
  static StepSchedule basic_with(std::int64_t horizon, StepCoefficients coefficients,
                                 StepMultipliers multipliers = {});
  static StepSchedule adaptive_with(StepCoefficients coefficients,
                                    StepMultipliers multipliers = {});
  static StepSchedule constant(StepSizes steps);

  StepSizes at(std::int64_t t) const;
};

/// Constants with C_h (C_g) replaced by 1 on an empty constraint side, as the
/// schedules use them.
ProblemConstants effective_constants(const ProblemConstants& constants, const Dims& dims);

StepCoefficients theory_coefficients(ScheduleKind kind, const ProblemConstants& constants,
                                     const Dims& dims);

StepSizes basic_steps(std::int64_t horizon, const ProblemConstants& constants, const Dims& dims,
                      StepMultipliers multipliers = {});

StepSizes adaptive_steps(std::int64_t t, const ProblemConstants& constants, const Dims& dims,
                         StepMultipliers multipliers = {});

StepSizes basic_steps(std::int64_t horizon, const StepCoefficients& coefficients,
                      StepMultipliers multipliers = {});

StepSizes adaptive_steps(std::int64_t t, const StepCoefficients& coefficients,
                         StepMultipliers multipliers = {});

/// Coefficients used in the published experiments: the quadratic saddle runs
/// use alpha = beta = 500, eta = kappa = 30; the pricing runs use
/// beta = 100, eta = kappa = 10 (alpha unused there and set equal to beta).
StepCoefficients experiment_coefficients(const std::string& problem_kind);

}  // namespace cspd
