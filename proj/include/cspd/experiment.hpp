#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cspd/metrics.hpp"
#include "cspd/problems.hpp"
#include "cspd/schedule.hpp"
#include "cspd/solver.hpp"

namespace cspd {

enum class SolverKind { Basic, Adaptive };

const char* solver_name(SolverKind kind);

struct ProblemConfig {
  std::string kind = "qcqp";  // qcqp | pricing | toy | bilinear
  Index d = 10;
  Index m = 5;
  std::uint64_t seed = 1;
  ThetaMode theta_mode = ThetaMode::Boundary;
  double price_min = 0.0;
  double price_max = 30.0;
};

struct ScheduleConfig {
  /// "experiment" uses the published leading coefficients for the problem
  /// kind (theory for kinds without one); "theory" the analytic schedules.
  std::string preset = "experiment";
  StepMultipliers multipliers;
};

struct OutputConfig {
  std::string dir;  // empty: $CSPD_OUT_DIR, else "cspd_out"
  std::string csv_name = "runs.csv";
  std::string summary_name = "summary.json";
  /// Records wall_ms per checkpoint.
  bool timing = false;
};

struct ExperimentConfig {
  ProblemConfig problem;
  std::vector<SolverKind> solvers{SolverKind::Basic, SolverKind::Adaptive};
  /// Basic runs once per N; adaptive runs max(n_list) once and reads checkpoints.
  std::vector<std::int64_t> n_list;
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;
  ScheduleConfig schedule;
  double reference_tol = 1e-8;
  bool duality_gap = true;
  /// Primal start; duals always start at zero.
  std::optional<Vec> x0, y0;
  OutputConfig output;
  int jobs = 1;

  void validate() const;
};

/// Builds a config from JSON. Unknown keys are rejected; errors name the field.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Applies "a.b.c=value" overrides. The value is parsed as JSON when it is
/// valid JSON and taken as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

nlohmann::json load_json_file(const std::string& path);

ProblemInstance build_problem(const ProblemConfig& config);

StepSchedule make_schedule(SolverKind solver, std::int64_t horizon, const ExperimentConfig& config,
                           const ProblemInstance& problem);

struct RateWindow {
  double slope_lo = -0.75;
  double slope_hi = -0.30;
  double min_r2 = 0.9;
  bool contains(const SlopeFit& fit) const {
    return fit.slope >= slope_lo && fit.slope <= slope_hi && fit.r2 >= min_r2;
  }
};

struct RunRow {
  std::string run_id;
  SolverKind solver = SolverKind::Basic;
  std::string problem;
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  GapReport gap;
  double max_gamma_norm = 0.0;
  double max_lambda_norm = 0.0;
  double max_dual_sq = 0.0;
  double wall_ms = 0.0;
};

struct RunFailure {
  std::string run_id;
  std::int64_t iteration = -1;
  std::string message;
};

struct ExperimentResult {
  ReferenceSolution reference;
  std::vector<RunRow> rows;
  std::vector<RunFailure> failures;
  std::string csv;
  nlohmann::json summary;
  bool complete() const { return failures.empty(); }
};

inline constexpr const char* kCsvHeader =
    "run_id,solver,problem,seed,n,obj_gap,abs_obj_gap,feas_x,feas_y,duality_gap,"
    "max_gamma_norm,max_lambda_norm,wall_ms";

/// Runs every (solver, N-or-checkpoint, seed) task and evaluates it against
/// the reference, which is solved here unless supplied.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<ReferenceSolution>& reference = std::nullopt);

/// Shortest round-trip decimal with 17 significant digits.
std::string format_real(double v);

/// Multiplier lower-bound check: obj_gap >= lower_bound - slack.
bool lower_bound_holds(const GapReport& r, double slack);

nlohmann::json reference_to_json(const ReferenceSolution& ref);

std::string resolve_output_dir(const OutputConfig& output);

}  // namespace cspd
