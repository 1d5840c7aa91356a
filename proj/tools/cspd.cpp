#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cspd/acceptance.hpp"
#include "cspd/experiment.hpp"

namespace {

using nlohmann::json;

json load_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
  json j = path.empty() ? json::object() : cspd::load_json_file(path);
  for (const auto& s : sets) cspd::apply_override(j, s);
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cspd::ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

int cmd_run(const std::string& path, const std::vector<std::string>& sets,
            const std::optional<std::uint64_t>& seed, const std::string& out_dir, int jobs,
            bool timing) {
  json j = load_with_overrides(path, sets);
  if (seed) j["master_seed"] = *seed;
  if (!out_dir.empty()) j["output"]["dir"] = out_dir;
  if (jobs > 0) j["jobs"] = jobs;
  if (timing) j["output"]["timing"] = true;
  const cspd::ExperimentConfig config = cspd::parse_config(j);

  const cspd::ExperimentResult res = cspd::run_experiment(config);
  const std::filesystem::path dir = cspd::resolve_output_dir(config.output);
  std::filesystem::create_directories(dir);
  write_file(dir / config.output.csv_name, res.csv);
  write_file(dir / config.output.summary_name, res.summary.dump(2) + "\n");
  std::cout << "wrote " << res.rows.size() << " rows to " << (dir / config.output.csv_name).string()
            << "\n";
  if (!res.complete()) {
    const auto& f = res.failures.front();
    std::cerr << "numeric abort in run " << f.run_id << " at iteration " << f.iteration << ": "
              << f.message << "\n";
    return 1;
  }
  return 0;
}

int cmd_check(const std::string& path, const std::vector<std::string>& sets,
              const std::optional<std::uint64_t>& seed, int jobs, const std::vector<int>& only) {
  json j = load_with_overrides(path, sets);
  if (seed) j["master_seed"] = *seed;
  if (jobs > 0) j["jobs"] = jobs;
  if (!only.empty()) j["criteria"] = only;
  const cspd::AcceptanceOptions options = cspd::parse_acceptance_options(j);
  const auto results = cspd::run_acceptance(options, std::cout);
  int failed = 0;
  for (const auto& r : results) failed += !r.passed;
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << "\n";
  return failed == 0 ? 0 : 1;
}

int cmd_reference(const std::string& path, const std::vector<std::string>& sets) {
  const cspd::ExperimentConfig config = cspd::parse_config(load_with_overrides(path, sets));
  const cspd::ProblemInstance problem = cspd::build_problem(config.problem);
  const cspd::ReferenceSolution ref = cspd::solve_reference(problem, config.reference_tol);
  std::cout << cspd::reference_to_json(ref).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic primal-dual solvers for expectation-constrained minimax problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int jobs = 0;
  bool timing = false;
  std::vector<int> only;

  auto* run = app.add_subcommand("run", "execute a sweep and write CSV + summary JSON");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--set", sets, "override a config field, key.path=value");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--out", out_dir, "output directory (default $CSPD_OUT_DIR or ./cspd_out)");
  run->add_option("--jobs", jobs, "concurrent runs");
  run->add_flag("--timing", timing, "record wall-clock time per checkpoint");

  auto* check = app.add_subcommand("check", "run the acceptance suite");
  check->add_option("config", config_path, "JSON config file (optional)");
  check->add_option("--set", sets, "override a config field, key.path=value");
  check->add_option("--seed", seed, "master seed");
  check->add_option("--jobs", jobs, "concurrent runs");
  check->add_option("--only", only, "criterion ids to run")->delimiter(',');

  auto* reference = app.add_subcommand("reference", "solve the exact problem, print JSON");
  reference->add_option("config", config_path, "JSON config file")->required();
  reference->add_option("--set", sets, "override a config field, key.path=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config_path, sets, seed, out_dir, jobs, timing);
    if (*check) return cmd_check(config_path, sets, seed, jobs, only);
    return cmd_reference(config_path, sets);
  } catch (const cspd::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const cspd::ReferenceFailure& e) {
    std::cerr << "reference solver failed: " << e.what() << "\n";
    return 1;
  } catch (const cspd::NumericError& e) {
    std::cerr << "numeric abort at iteration " << e.iteration() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
