#include <CLI11.hpp>

#include "emerge/scenario.hpp"
#include "emerge/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "emerge: merging of e-values under arbitrary dependence with "
      "LP-certified validity checks, weighted-average domination reports, "
      "and seeded subclass simulations"};
  app.set_version_flag("--version", emerge::kVersion);
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir;
  emerge::cli::RunOptions options;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "output directory for the reports")
        ->required();
    cmd->add_option("--seed", options.seed,
                    "override the scenario seed (simulate kinds)");
    cmd->add_option("--tol", options.verdict_tol,
                    "override the LP verdict tolerance (default 1e-6)");
    cmd->add_option("--reps", options.replications,
                    "override the replication count (simulate kinds)");
  };

  CLI::App* run_cmd =
      app.add_subcommand("run", "execute one scenario and write reports");
  add_common(run_cmd);
  CLI::App* schedule_cmd = app.add_subcommand(
      "schedule", "run a dominate scenario across its epsilon/theta ladders");
  add_common(schedule_cmd);
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle-check", "compare the brute-force oracle against the LP");
  add_common(oracle_cmd);

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) {
    return emerge::cli::run(scenario, out_dir, options);
  }
  if (schedule_cmd->parsed()) {
    return emerge::cli::schedule(scenario, out_dir, options);
  }
  return emerge::cli::oracle_check(scenario, out_dir, options);
}
