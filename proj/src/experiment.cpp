#include "cspd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace cspd {

using nlohmann::json;

const char* solver_name(SolverKind kind) {
  return kind == SolverKind::Basic ? "basic" : "adaptive";
}

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) field_error(where.empty() ? "<root>" : where, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) field_error(where.empty() ? k : where + "." + k, "unknown key");
  }
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    field_error(path, "wrong type");
  }
}

std::uint64_t get_u64(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    field_error(path, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

Vec get_vec(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected a list of numbers");
  Vec out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) field_error(path, "expected a list of numbers");
    out[static_cast<Index>(i)] = v[i].get<double>();
  }
  return out;
}

ProblemConfig parse_problem(const json& j) {
  check_keys(j, "problem", {"kind", "d", "m", "seed", "theta_mode", "price_min", "price_max"});
  ProblemConfig p;
  p.kind = get_as<std::string>(j, "kind", "problem.kind", p.kind);
  const bool is_pricing = p.kind == "pricing";
  if (is_pricing) {
    p.d = 20;
    p.m = 500;
  }
  p.d = get_as<Index>(j, "d", "problem.d", p.d);
  p.m = get_as<Index>(j, "m", "problem.m", p.m);
  if (j.contains("seed")) p.seed = get_u64(j["seed"], "problem.seed");
  const std::string mode = get_as<std::string>(j, "theta_mode", "problem.theta_mode", "boundary");
  if (mode == "boundary") {
    p.theta_mode = ThetaMode::Boundary;
  } else if (mode == "interior") {
    p.theta_mode = ThetaMode::Interior;
  } else {
    field_error("problem.theta_mode", "expected 'interior' or 'boundary'");
  }
  p.price_min = get_as<double>(j, "price_min", "problem.price_min", p.price_min);
  p.price_max = get_as<double>(j, "price_max", "problem.price_max", p.price_max);
  return p;
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::set<std::string> kinds{"qcqp", "pricing", "toy", "bilinear"};
  if (!kinds.count(problem.kind)) {
    field_error("problem.kind", "expected one of qcqp, pricing, toy, bilinear");
  }
  if (problem.d < 1) field_error("problem.d", "must be >= 1");
  if (problem.m < 0) field_error("problem.m", "must be >= 0");
  if (!(problem.price_min < problem.price_max)) {
    field_error("problem.price_max", "must exceed price_min");
  }
  if (solvers.empty()) field_error("solvers", "must name at least one solver");
  if (n_list.empty()) field_error("n_list", "must not be empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) field_error("n_list", "horizons must be >= 1");
    if (i > 0 && n_list[i] <= n_list[i - 1]) field_error("n_list", "must be strictly ascending");
  }
  if (seeds.empty()) field_error("seeds", "must not be empty");
  if (schedule.preset != "experiment" && schedule.preset != "theory") {
    field_error("schedule.preset", "expected 'experiment' or 'theory'");
  }
  if (!(schedule.multipliers.dual_scale > 0.0) || !std::isfinite(schedule.multipliers.dual_scale)) {
    field_error("schedule.dual_scale", "must be positive and finite");
  }
  if (!(schedule.multipliers.primal_scale > 0.0) ||
      !std::isfinite(schedule.multipliers.primal_scale)) {
    field_error("schedule.primal_scale", "must be positive and finite");
  }
  if (!(reference_tol > 0.0)) field_error("reference.target_tol", "must be positive");
  if (jobs < 1) field_error("jobs", "must be >= 1");
  if (output.csv_name.empty()) field_error("output.csv_name", "must not be empty");
  if (output.summary_name.empty()) field_error("output.summary_name", "must not be empty");
}

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "", {"problem", "solvers", "n_list", "seeds", "master_seed", "schedule", "reference",
                     "metrics", "initial_point", "output", "jobs"});
  ExperimentConfig c;
  if (j.contains("problem")) c.problem = parse_problem(j["problem"]);

  if (j.contains("solvers")) {
    const json& s = j["solvers"];
    if (!s.is_array()) field_error("solvers", "expected a list");
    c.solvers.clear();
    for (const auto& v : s) {
      const std::string name = v.is_string() ? v.get<std::string>() : "";
      if (name == "basic") {
        c.solvers.push_back(SolverKind::Basic);
      } else if (name == "adaptive") {
        c.solvers.push_back(SolverKind::Adaptive);
      } else {
        field_error("solvers", "entries must be 'basic' or 'adaptive'");
      }
    }
  }

  if (j.contains("n_list")) {
    const json& n = j["n_list"];
    if (!n.is_array()) field_error("n_list", "expected a list of integers");
    for (const auto& v : n) {
      if (!v.is_number_integer()) field_error("n_list", "expected a list of integers");
      c.n_list.push_back(v.get<std::int64_t>());
    }
  }

  if (j.contains("seeds")) {
    const json& s = j["seeds"];
    if (s.is_array()) {
      for (const auto& v : s) c.seeds.push_back(get_u64(v, "seeds"));
    } else if (s.is_object()) {
      check_keys(s, "seeds", {"base", "count"});
      if (!s.contains("base") || !s.contains("count")) {
        field_error("seeds", "expected {base, count}");
      }
      const std::uint64_t base = get_u64(s["base"], "seeds.base");
      const std::uint64_t count = get_u64(s["count"], "seeds.count");
      for (std::uint64_t i = 0; i < count; ++i) c.seeds.push_back(base + i);
    } else {
      field_error("seeds", "expected a list or {base, count}");
    }
  }
  if (j.contains("master_seed")) c.master_seed = get_u64(j["master_seed"], "master_seed");

  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    check_keys(s, "schedule", {"preset", "dual_scale", "primal_scale"});
    c.schedule.preset = get_as<std::string>(s, "preset", "schedule.preset", c.schedule.preset);
    c.schedule.multipliers.dual_scale =
        get_as<double>(s, "dual_scale", "schedule.dual_scale", 1.0);
    c.schedule.multipliers.primal_scale =
        get_as<double>(s, "primal_scale", "schedule.primal_scale", 1.0);
  }
  if (j.contains("reference")) {
    check_keys(j["reference"], "reference", {"target_tol"});
    c.reference_tol = get_as<double>(j["reference"], "target_tol", "reference.target_tol", 1e-8);
  }
  if (j.contains("metrics")) {
    check_keys(j["metrics"], "metrics", {"duality_gap"});
    c.duality_gap = get_as<bool>(j["metrics"], "duality_gap", "metrics.duality_gap", true);
  }
  if (j.contains("initial_point")) {
    const json& ip = j["initial_point"];
    check_keys(ip, "initial_point", {"x0", "y0"});
    if (ip.contains("x0")) c.x0 = get_vec(ip["x0"], "initial_point.x0");
    if (ip.contains("y0")) c.y0 = get_vec(ip["y0"], "initial_point.y0");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, "output", {"dir", "csv_name", "summary_name", "timing"});
    c.output.dir = get_as<std::string>(o, "dir", "output.dir", "");
    c.output.csv_name = get_as<std::string>(o, "csv_name", "output.csv_name", c.output.csv_name);
    c.output.summary_name =
        get_as<std::string>(o, "summary_name", "output.summary_name", c.output.summary_name);
    c.output.timing = get_as<bool>(o, "timing", "output.timing", false);
  }
  c.jobs = get_as<int>(j, "jobs", "jobs", 1);
  c.validate();
  return c;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  std::string pointer;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("override '" + assignment + "': empty key segment");
    pointer += "/" + part;
  }
  try {
    j[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    throw ConfigError("override '" + assignment + "': " + e.what());
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j = json::parse(in, nullptr, false, true);
  if (j.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
  return j;
}

ProblemInstance build_problem(const ProblemConfig& c) {
  if (c.kind == "qcqp") return generate_qcqp({c.d, c.m, c.seed, c.theta_mode}).problem;
  if (c.kind == "pricing") {
    return generate_pricing({c.d, c.m, c.seed, c.price_min, c.price_max}).problem;
  }
  if (c.kind == "toy") return generate_zero_sum_toy();
  if (c.kind == "bilinear") return generate_bilinear_toy();
  throw ConfigError("config field 'problem.kind': unknown problem '" + c.kind + "'");
}

StepSchedule make_schedule(SolverKind solver, std::int64_t horizon, const ExperimentConfig& config,
                           const ProblemInstance& problem) {
  const StepMultipliers& mult = config.schedule.multipliers;
  const bool has_preset = config.problem.kind == "qcqp" || config.problem.kind == "pricing";
  if (config.schedule.preset == "experiment" && has_preset) {
    const StepCoefficients k = experiment_coefficients(config.problem.kind);
    return solver == SolverKind::Basic ? StepSchedule::basic_with(horizon, k, mult)
                                       : StepSchedule::adaptive_with(k, mult);
  }
  return solver == SolverKind::Basic
             ? StepSchedule::basic(horizon, problem.constants, problem.dims, mult)
             : StepSchedule::adaptive(problem.constants, problem.dims, mult);
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool lower_bound_holds(const GapReport& r, double slack) {
  return r.obj_gap >= r.lower_bound - slack;
}

json reference_to_json(const ReferenceSolution& ref) {
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return json{{"x_star", vec(ref.x_star)},         {"y_star", vec(ref.y_star)},
              {"gamma_star", vec(ref.gamma_star)}, {"lambda_star", vec(ref.lambda_star)},
              {"f_star", ref.f_star},              {"tolerance", ref.tolerance},
              {"iterations", ref.iterations}};
}

std::string resolve_output_dir(const OutputConfig& output) {
  if (!output.dir.empty()) return output.dir;
  if (const char* env = std::getenv("CSPD_OUT_DIR"); env && *env) return env;
  return "cspd_out";
}

namespace {

struct Task {
  SolverKind solver;
  std::uint64_t seed;
  std::int64_t horizon;
  std::vector<std::int64_t> checkpoints;
};

struct TaskOutput {
  std::vector<RunRow> rows;
  std::optional<RunFailure> failure;
};

std::string run_label(const Task& t) {
  return std::string(solver_name(t.solver)) + "-s" + std::to_string(t.seed) + "-N" +
         std::to_string(t.horizon);
}

TaskOutput execute(const Task& task, const ExperimentConfig& config, const ProblemInstance& problem,
                   const ReferenceSolution& ref) {
  TaskOutput out;
  const std::string id = run_label(task);
  RunConfig rc;
  rc.n_iters = task.horizon;
  rc.seed = splitmix64(config.master_seed ^ splitmix64(task.seed));
  rc.checkpoints = task.checkpoints;
  rc.schedule = make_schedule(task.solver, task.horizon, config, problem);
  InitialPoint ip = default_initial_point(problem);
  if (config.x0) ip.x0 = *config.x0;
  if (config.y0) ip.y0 = *config.y0;
  rc.initial_point = ip;
  try {
    const RunTrace trace = task.solver == SolverKind::Basic ? run_basic_cspd(problem, rc)
                                                           : run_adp_cspd(problem, rc);
    for (const auto& rec : trace.records) {
      RunRow row;
      row.run_id = id;
      row.solver = task.solver;
      row.problem = config.problem.kind;
      row.seed = task.seed;
      row.n = rec.t;
      row.gap = evaluate(rec.x_bar, rec.y_bar, problem, ref);
      if (config.duality_gap) {
        row.gap.duality_gap =
            duality_gap(rec.x_bar, rec.y_bar, problem, ReferenceConfig{config.reference_tol});
      }
      row.max_gamma_norm = rec.gamma_norm_max;
      row.max_lambda_norm = rec.lambda_norm_max;
      row.max_dual_sq = rec.dual_sq_max;
      row.wall_ms = config.output.timing ? rec.wall_ms : 0.0;
      out.rows.push_back(std::move(row));
    }
  } catch (const NumericError& e) {
    out.failure = RunFailure{id, e.iteration(), e.what()};
    out.rows.clear();
  }
  return out;
}

std::string csv_line(const RunRow& r) {
  std::string s = r.run_id + "," + solver_name(r.solver) + "," + r.problem + "," +
                  std::to_string(r.seed) + "," + std::to_string(r.n) + ",";
  s += format_real(r.gap.obj_gap) + "," + format_real(std::abs(r.gap.obj_gap)) + ",";
  s += format_real(r.gap.feas_x) + "," + format_real(r.gap.feas_y) + ",";
  s += (r.gap.duality_gap ? format_real(*r.gap.duality_gap) : std::string()) + ",";
  s += format_real(r.max_gamma_norm) + "," + format_real(r.max_lambda_norm) + ",";
  s += format_real(r.wall_ms);
  return s;
}

struct MeanErr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanErr mean_err(const std::vector<double>& v) {
  MeanErr m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return m;
}

json fit_json(const std::vector<std::int64_t>& n, const std::vector<double>& values,
              const RateWindow& window, json* in_window) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < n.size(); ++i) pts.emplace_back(static_cast<double>(n[i]), values[i]);
  json out{{"benchmark", -0.5}};
  try {
    const SlopeFit fit = slope_fit(pts);
    out["slope"] = fit.slope;
    out["intercept"] = fit.intercept;
    out["r2"] = fit.r2;
    out["excluded"] = fit.excluded;
    *in_window = window.contains(fit);
  } catch (const ConfigError& e) {
    out["slope"] = nullptr;
    out["r2"] = nullptr;
    out["error"] = e.what();
    *in_window = nullptr;
  }
  return out;
}

json build_summary(const ExperimentConfig& config, const ExperimentResult& res) {
  const double slack = 10.0 * res.reference.tolerance;
  json groups = json::array();
  for (SolverKind solver : config.solvers) {
    std::map<std::int64_t, std::vector<const RunRow*>> by_n;
    for (const auto& r : res.rows) {
      if (r.solver == solver) by_n[r.n].push_back(&r);
    }
    json g{{"solver", solver_name(solver)}, {"problem", config.problem.kind}};
    std::vector<std::int64_t> ns;
    std::vector<double> gap_mean, gap_err, feas_mean, feas_x_mean, feas_y_mean, gmax, lmax;
    bool bound_ok = true;
    for (const auto& [n, rows] : by_n) {
      std::vector<double> gaps, feas, fx, fy, gm, lm;
      for (const RunRow* r : rows) {
        gaps.push_back(std::abs(r->gap.obj_gap));
        feas.push_back(std::hypot(r->gap.feas_x, r->gap.feas_y));
        fx.push_back(r->gap.feas_x);
        fy.push_back(r->gap.feas_y);
        gm.push_back(r->max_gamma_norm);
        lm.push_back(r->max_lambda_norm);
        bound_ok = bound_ok && lower_bound_holds(r->gap, slack);
      }
      ns.push_back(n);
      const MeanErr ge = mean_err(gaps);
      gap_mean.push_back(ge.mean);
      gap_err.push_back(ge.stderr_);
      feas_mean.push_back(mean_err(feas).mean);
      feas_x_mean.push_back(mean_err(fx).mean);
      feas_y_mean.push_back(mean_err(fy).mean);
      gmax.push_back(mean_err(gm).mean);
      lmax.push_back(mean_err(lm).mean);
    }
    g["n"] = ns;
    g["mean_abs_obj_gap"] = gap_mean;
    g["stderr"] = gap_err;
    g["mean_feas"] = feas_mean;
    g["mean_feas_x"] = feas_x_mean;
    g["mean_feas_y"] = feas_y_mean;
    g["mean_max_gamma_norm"] = gmax;
    g["mean_max_lambda_norm"] = lmax;
    json gap_ok, feas_ok;
    g["slope"] = fit_json(ns, gap_mean, RateWindow{}, &gap_ok);
    g["feas_slope"] = fit_json(ns, feas_mean, RateWindow{}, &feas_ok);
    g["criteria"] = json{{"rate_obj_gap", gap_ok},
                         {"rate_feas", feas_ok},
                         {"multiplier_lower_bound", bound_ok},
                         {"no_numeric_abort", res.failures.empty()}};
    groups.push_back(std::move(g));
  }
  json failures = json::array();
  for (const auto& f : res.failures) {
    failures.push_back(json{{"run_id", f.run_id}, {"iteration", f.iteration}, {"message", f.message}});
  }
  return json{{"schema_version", 1},
              {"complete", res.failures.empty()},
              {"problem", config.problem.kind},
              {"reference", json{{"f_star", res.reference.f_star},
                                 {"tolerance", res.reference.tolerance},
                                 {"gamma_star_norm", res.reference.gamma_star.norm()},
                                 {"lambda_star_norm", res.reference.lambda_star.norm()},
                                 {"iterations", res.reference.iterations}}},
              {"groups", std::move(groups)},
              {"failures", std::move(failures)}};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<ReferenceSolution>& reference) {
  config.validate();
  const ProblemInstance problem = build_problem(config.problem);
  if (config.x0 && config.x0->size() != problem.dims.d_x) {
    field_error("initial_point.x0", "length must equal the x dimension");
  }
  if (config.y0 && config.y0->size() != problem.dims.d_y) {
    field_error("initial_point.y0", "length must equal the y dimension");
  }

  ExperimentResult res;
  res.reference = reference ? *reference : solve_reference(problem, config.reference_tol);

  std::vector<Task> tasks;
  for (SolverKind solver : config.solvers) {
    for (std::uint64_t seed : config.seeds) {
      if (solver == SolverKind::Basic) {
        for (std::int64_t n : config.n_list) tasks.push_back({solver, seed, n, {n}});
      } else {
        tasks.push_back({solver, seed, config.n_list.back(), config.n_list});
      }
    }
  }

  std::vector<TaskOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      outputs[i] = execute(tasks[i], config, problem, res.reference);
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(config.jobs), tasks.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Collect in config order.
  for (auto& out : outputs) {
    if (out.failure) res.failures.push_back(*out.failure);
    for (auto& row : out.rows) res.rows.push_back(std::move(row));
  }
  std::string csv = std::string(kCsvHeader) + "\n";
  for (const auto& r : res.rows) csv += csv_line(r) + "\n";
  res.csv = std::move(csv);
  res.summary = build_summary(config, res);
  return res;
}

}  // namespace cspd
