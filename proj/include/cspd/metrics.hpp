#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cspd/core.hpp"
#include "cspd/solver.hpp"

namespace cspd {

struct GapReport {
  /// F(x_bar, y*) - F(x*, y_bar); may be negative for infeasible points.
  double obj_gap = 0.0;
  double feas_x = 0.0;  // ||H(x_bar)_+||
  double feas_y = 0.0;  // ||G(y_bar)_+||
  std::optional<double> duality_gap;
  /// -||gamma*|| feas_x - ||lambda*|| feas_y; obj_gap never falls below it.
  double lower_bound = 0.0;
  /// L(x_bar, y_bar, gamma*, lambda*)
  double lagrangian_at_point = 0.0;
};

/// Settings for the deterministic saddle solver used for references and
/// best responses.
struct ReferenceConfig {
  double target_tol = 1e-8;
  std::int64_t max_iters = 100'000'000;
};

/// Thrown when the reference solver exhausts its iteration budget.
class ReferenceFailure : public std::runtime_error {
 public:
  ReferenceFailure(const std::string& what, std::vector<double> residual_history)
      : std::runtime_error(what), history_(std::move(residual_history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

GapReport evaluate(const Vec& x_bar, const Vec& y_bar, const ProblemInstance& problem,
                   const ReferenceSolution& ref);

/// F(x_bar, y°(x_bar)) - F(x°(y_bar), y_bar) with best responses over the
/// constrained feasible sets. nullopt when a side is unbounded and not
/// strongly convex (concave), i.e. a best response need not exist.
std::optional<double> duality_gap(const Vec& x_bar, const Vec& y_bar,
                                  const ProblemInstance& problem,
                                  const ReferenceConfig& config = {});

/// argmin over {x in X : H(x) <= 0} of F(., y); closed form when the problem
/// supplies one, else the deterministic solver with y frozen.
Vec best_response_x(const Vec& y, const ProblemInstance& problem, const ReferenceConfig& config);
/// argmax over {y in Y : G(y) <= 0} of F(x, .).
Vec best_response_y(const Vec& x, const ProblemInstance& problem, const ReferenceConfig& config);

/// High-accuracy saddle point of the exact (noise-free) problem.
///
/// Runs a projected extragradient method with backtracking on the Lagrangian
/// operator (grad_x L, -grad_y L, -H, -G) over X x Y x R+ x R+, using the
/// exact oracle, and stops when the natural residual
/// ||z - P(z - V(z))|| is below target_tol / 10 and both feasibility and
/// complementary slackness are below target_tol. Multipliers of inactive
/// constraints smaller than 10 * target_tol are clamped to zero.
ReferenceSolution solve_reference(const ProblemInstance& problem, const ReferenceConfig& config,
                                  const std::optional<InitialPoint>& warm_start = std::nullopt);

inline ReferenceSolution solve_reference(const ProblemInstance& problem, double target_tol) {
  return solve_reference(problem, ReferenceConfig{target_tol});
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  /// Indices of inputs dropped for nonpositive values.
  std::vector<std::size_t> excluded;
};

/// Least squares on (log n, log value). Needs >= 3 positive values.
SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points);

/// Dual-boundedness constant R for the fixed-horizon schedule.
double theory_constant_R(const ReferenceSolution& ref, const InitialPoint& init,
                         const ProblemConstants& constants);

}  // namespace cspd
