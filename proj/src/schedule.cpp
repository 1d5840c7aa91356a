#include "cspd/schedule.hpp"

#include <cmath>

namespace cspd {

namespace {

// sqrt(a + 1) - sqrt(a) without cancellation.
double sqrt_gap(double a) { return 1.0 / (std::sqrt(a + 1.0) + std::sqrt(a)); }

void check_multipliers(const StepMultipliers& m) {
  if (!(m.dual_scale > 0.0) || !(m.primal_scale > 0.0) || !std::isfinite(m.dual_scale) ||
      !std::isfinite(m.primal_scale)) {
    throw ConfigError("step multipliers must be positive and finite");
  }
}

// Constraint-side constants; an empty side falls back to 1.
std::pair<double, double> side_constants(const ProblemConstants& c, const Dims& dims) {
  double ch = 1.0;
  double cg = 1.0;
  if (dims.m1 > 0) {
    if (!(c.c_h > 0.0)) throw ConfigError("schedule: C_h must be positive when m1 > 0");
    ch = c.c_h;
  }
  if (dims.m2 > 0) {
    if (!(c.c_g > 0.0)) throw ConfigError("schedule: C_g must be positive when m2 > 0");
    cg = c.c_g;
  }
  return {ch, cg};
}

}  // namespace

ProblemConstants effective_constants(const ProblemConstants& constants, const Dims& dims) {
  const auto [ch, cg] = side_constants(constants, dims);
  ProblemConstants c = constants;
  c.c_h = ch;
  c.c_g = cg;
  return c;
}

StepCoefficients theory_coefficients(ScheduleKind kind, const ProblemConstants& constants,
                                     const Dims& dims) {
  const auto [ch, cg] = side_constants(constants, dims);
  switch (kind) {
    case ScheduleKind::BasicFixed:
      return {4.0 * ch * ch, 4.0 * cg * cg, 4.0, 4.0};
    case ScheduleKind::AdaptiveOpen:
      return {16.0, 16.0, cg * cg, ch * ch};
    case ScheduleKind::Constant:
      break;
  }
  throw ConfigError("theory_coefficients: constant schedules have no theory coefficients");
}

StepSizes basic_steps(std::int64_t horizon, const StepCoefficients& k, StepMultipliers m) {
  if (horizon < 1) throw ConfigError("basic_steps: horizon N must be >= 1");
  check_multipliers(m);
  const double root = std::sqrt(static_cast<double>(horizon));
  StepSizes s;
  s.eta = m.primal_scale * k.eta * root;
  s.kappa = m.primal_scale * k.kappa * root;
  s.alpha = m.dual_scale * k.alpha * root;
  s.beta = m.dual_scale * k.beta * root;
  return s;
}

StepSizes adaptive_steps(std::int64_t t, const StepCoefficients& k, StepMultipliers m) {
  if (t < 0) throw ConfigError("adaptive_steps: t must be >= 0");
  check_multipliers(m);
  const double td = static_cast<double>(t);
  StepSizes s;
  s.beta = m.dual_scale * k.beta * std::sqrt(td + 1.0);
  s.tau = m.dual_scale * k.beta * sqrt_gap(td + 1.0);
  s.alpha = m.dual_scale * k.alpha * std::sqrt(td + 1.0);
  s.nu = m.dual_scale * k.alpha * sqrt_gap(td + 1.0);
  s.eta = m.primal_scale * k.eta * std::sqrt(td + 2.0);
  s.rho = m.primal_scale * k.eta * sqrt_gap(td + 2.0);
  s.kappa = m.primal_scale * k.kappa * std::sqrt(td + 2.0);
  s.phi = m.primal_scale * k.kappa * sqrt_gap(td + 2.0);
  return s;
}

StepSizes basic_steps(std::int64_t horizon, const ProblemConstants& constants, const Dims& dims,
                      StepMultipliers multipliers) {
  return basic_steps(horizon, theory_coefficients(ScheduleKind::BasicFixed, constants, dims),
                     multipliers);
}

StepSizes adaptive_steps(std::int64_t t, const ProblemConstants& constants, const Dims& dims,
                         StepMultipliers multipliers) {
  return adaptive_steps(t, theory_coefficients(ScheduleKind::AdaptiveOpen, constants, dims),
                        multipliers);
}

StepSchedule StepSchedule::basic(std::int64_t horizon, const ProblemConstants& constants,
                                 const Dims& dims, StepMultipliers multipliers) {
  return basic_with(horizon, theory_coefficients(ScheduleKind::BasicFixed, constants, dims),
                    multipliers);
}

StepSchedule StepSchedule::adaptive(const ProblemConstants& constants, const Dims& dims,
                                    StepMultipliers multipliers) {
  return adaptive_with(theory_coefficients(ScheduleKind::AdaptiveOpen, constants, dims),
                       multipliers);
}

StepSchedule StepSchedule::basic_with(std::int64_t horizon, StepCoefficients coefficients,
                                      StepMultipliers multipliers) {
  if (horizon < 1) throw ConfigError("basic schedule: horizon N must be >= 1");
  check_multipliers(multipliers);
  StepSchedule s;
  s.kind = ScheduleKind::BasicFixed;
  s.horizon = horizon;
  s.coefficients = coefficients;
  s.multipliers = multipliers;
  return s;
}

StepSchedule StepSchedule::adaptive_with(StepCoefficients coefficients,
                                         StepMultipliers multipliers) {
  check_multipliers(multipliers);
  StepSchedule s;
  s.kind = ScheduleKind::AdaptiveOpen;
  s.coefficients = coefficients;
  s.multipliers = multipliers;
  return s;
}

StepSchedule StepSchedule::constant(StepSizes steps) {
  if (!(steps.eta > 0.0) || !(steps.kappa > 0.0) || !(steps.alpha > 0.0) || !(steps.beta > 0.0) ||
      steps.rho < 0.0 || steps.phi < 0.0 || steps.tau < 0.0 || steps.nu < 0.0) {
    throw ConfigError("constant schedule: invalid step sizes");
  }
  StepSchedule s;
  s.kind = ScheduleKind::Constant;
  s.fixed = steps;
  return s;
}

StepSizes StepSchedule::at(std::int64_t t) const {
  switch (kind) {
    case ScheduleKind::BasicFixed:
      return basic_steps(horizon, coefficients, multipliers);
    case ScheduleKind::AdaptiveOpen:
      return adaptive_steps(t, coefficients, multipliers);
    case ScheduleKind::Constant:
      return fixed;
  }
  return fixed;
}

StepCoefficients experiment_coefficients(const std::string& problem_kind) {
  if (problem_kind == "qcqp") return {30.0, 30.0, 500.0, 500.0};
  if (problem_kind == "pricing") return {10.0, 10.0, 100.0, 100.0};
  throw ConfigError("no experiment preset for problem kind '" + problem_kind + "'");
}

}  // namespace cspd
