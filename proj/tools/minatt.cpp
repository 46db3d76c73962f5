// Command-line driver: run a solve, run the invariant suites, or estimate the
// density of the initial law.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "minatt/artifacts.hpp"
#include "minatt/checks.hpp"
#include "minatt/csv.hpp"
#include "minatt/config.hpp"
#include "minatt/optimizer.hpp"

namespace {

using namespace minatt;

SolverConfig load(const std::string& source) {
  if (is_preset(source)) return preset(source);
  return parse_config_file(source);
}

// config < MINATT_SEED < --seed
void apply_seed(SolverConfig& config, const std::optional<std::uint64_t>& flag) {
  if (const char* env = std::getenv("MINATT_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long value = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError("MINATT_SEED must be an unsigned integer");
    config.seed = value;
  }
  if (flag) config.seed = *flag;
}

struct RunArgs {
  std::string source;
  std::string fidelity = "desk";
  bool dry_run = false;
  int workers = 0;
  std::optional<std::uint64_t> seed;
  std::string out = "minatt_out";
};

int run(const RunArgs& args) {
  SolverConfig config;
  try {
    config = load(args.source);
    if (args.fidelity == "paper") apply_full_fidelity(config);
    else if (args.fidelity != "desk") throw ConfigError("fidelity must be desk or paper");
    if (args.workers > 0) config.workers = args.workers;
    apply_seed(config, args.seed);
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (args.dry_run) {
    std::cout << "# " << stamp(config) << "\n" << write_config(config);
    return 0;
  }
  try {
    const ArmSystem arm(config.arm);
    const SolveResult result = solve(arm, config);
    write_artifacts(args.out, render_artifacts(config, arm, result));
    const IterationRecord& first = result.history.front();
    const IterationRecord& last = result.history.back();
    std::cout << "termination: " << to_string(result.reason) << "\n"
              << "outer iterations: " << result.outer_iterations
              << ", line-search trials: " << result.inner_iterations << "\n"
              << "eta: " << first.cost.total << " -> " << last.cost.total << "\n"
              << "terminal miss: " << first.miss << " -> " << last.miss << "\n"
              << "outputs: " << args.out << "\n";
    return result.reason == Termination::kConverged ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int check(const std::string& level, bool corrupt_bias) {
  const auto results =
      run_checks(level == "full" ? CheckLevel::kFull : CheckLevel::kFast, corrupt_bias);
  print_report(std::cout, results);
  for (const SuiteResult& r : results) {
    if (!r.passed) return 1;
  }
  return 0;
}

int density(const std::string& source, const std::string& out) {
  try {
    SolverConfig config = load(source);
    apply_seed(config, std::nullopt);
    config.validate();
    const ArmSystem arm(config.arm);
    const Problem problem(arm, config);
    const ControlLaw law = initialize(arm, config);
    const Evaluation eval = problem.evaluate(law);
    const int N = eval.field.grid.N;
    std::cout << "occupied cells at T: " << eval.field.counts[N].size() << "\n"
              << "mass at T: " << eval.field.mass(N) << "\n"
              << "exited fraction at T: " << eval.field.exited_fraction(N) << "\n"
              << "eta: " << eval.cost.total << " (terminal " << eval.cost.terminal
              << ", attention_x " << eval.cost.attention_x << ", attention_t "
              << eval.cost.attention_t << ")\n";
    if (!out.empty()) {
      std::ostringstream os;
      csv::write_comment(os, stamp(config));
      write_marginals_csv(os, eval.field);
      write_artifacts(out, {{"density_marginals.csv", os.str()}});
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-attention feedback/feedforward control via Liouville gradient descent"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "Solve a configuration and write CSV outputs");
  run_cmd->add_option("config", run_args.source, "Config file or preset (experiment1, experiment2)")
      ->required();
  run_cmd->add_option("--fidelity", run_args.fidelity, "desk (64 cells/dim) or paper (256)")
      ->check(CLI::IsMember({"desk", "paper"}));
  run_cmd->add_flag("--dry-run", run_args.dry_run, "Validate and print the resolved config");
  run_cmd->add_option("--workers", run_args.workers, "Density worker threads (0: all cores)");
  run_cmd->add_option("--seed", run_args.seed, "Monte Carlo seed (overrides MINATT_SEED)");
  run_cmd->add_option("--out", run_args.out, "Output directory");

  std::string level = "fast";
  bool corrupt_bias = false;
  CLI::App* check_cmd = app.add_subcommand("check", "Run the invariant suites");
  check_cmd->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  check_cmd->add_flag("--corrupt-bias", corrupt_bias, "Flip the bias sign (negative control)");

  std::string density_source, density_out;
  CLI::App* density_cmd = app.add_subcommand("density", "Estimate the density of the initial law");
  density_cmd->add_option("config", density_source, "Config file or preset")->required();
  density_cmd->add_option("--out", density_out, "Write density_marginals.csv here");

  CLI11_PARSE(app, argc, argv);
  if (*run_cmd) return run(run_args);
  if (*check_cmd) return check(level, corrupt_bias);
  return density(density_source, density_out);
}
