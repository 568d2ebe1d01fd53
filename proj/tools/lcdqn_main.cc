#include <cstdlib>
#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.h"
#include "lcdqn/errors.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void AddOverrides(CLI::App* cmd, lcdqn::cli::RunOverrides& o) {
  cmd->add_option("--episodes", o.episodes, "Override run.total_episodes")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--eval-interval", o.eval_interval, "Override run.eval_interval")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--eval-episodes", o.eval_episodes, "Override run.eval_episodes")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lcdqn::cli;
  CLI::App app{"Lane-change DQN: train, evaluate and inspect driving policies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lcdqn 0.1.0");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train one run per seed");
  train_cmd->add_option("--config", train.config, "Run configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* seed_opt = train_cmd->add_option("--seed", train.seeds, "Single seed; output goes directly into --out")
                       ->expected(1);
  auto* seeds_opt = train_cmd->add_option("--seeds", train.seeds, "Comma-separated seeds; one directory per seed")
                        ->delimiter(',');
  seed_opt->excludes(seeds_opt);
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  train_cmd->add_option("--jobs", train.jobs, "Parallel seed workers (0: auto)")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_flag("--quiet", train.quiet, "Only print the final summary");
  AddOverrides(train_cmd, train.overrides);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model greedily");
  eval_cmd->add_option("--model", eval.model, "Model file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--config", eval.config, "Scenario configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--episodes", eval.episodes, "Evaluation episodes")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval.seed, "Seed of the held-out episode stream");
  eval_cmd->add_option("--seed-base", eval.seed_base, "Explicit first episode seed");
  eval_cmd->add_option("--out", eval.out, "Write the report JSON here");

  RolloutArgs rollout;
  auto* rollout_cmd = app.add_subcommand("rollout", "Record one episode as JSONL and SVG");
  auto* model_opt = rollout_cmd->add_option("--model", rollout.model, "Model file")
                        ->check(CLI::ExistingFile);
  auto* const_opt = rollout_cmd->add_option("--constant-action", rollout.constant_action,
                                            "Replay a fixed action instead of a model");
  model_opt->excludes(const_opt);
  rollout_cmd->add_option("--config", rollout.config, "Scenario configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  rollout_cmd->add_option("--seed", rollout.seed, "Episode seed");
  rollout_cmd->add_option("--trace", rollout.trace, "Output JSONL trace")->required();
  rollout_cmd->add_option("--svg", rollout.svg, "Output bird's-eye SVG");
  rollout_cmd->add_option("--stride", rollout.stride, "Steps between drawn footprints")
      ->check(CLI::PositiveNumber);

  PlotArgs plot;
  auto* plot_cmd = app.add_subcommand("plot", "Training curves or trajectory families as SVG");
  plot_cmd->add_option("--metrics", plot.metrics, "metrics.jsonl files forming one group")
      ->check(CLI::ExistingFile);
  plot_cmd->add_option("--label", plot.label, "Label of the --metrics group");
  plot_cmd->add_option("--group", plot.groups, "label=a.jsonl,b.jsonl (repeatable)");
  plot_cmd->add_option("--trajectory", plot.trajectories, "Trajectory CSV files")
      ->check(CLI::ExistingFile);
  plot_cmd->add_flag("--family", plot.family, "Generate the lane-change family d = 1..d_max");
  plot_cmd->add_option("--speed", plot.speed, "Speed for lateral acceleration (m/s)")
      ->check(CLI::PositiveNumber);
  plot_cmd->add_option("--d-max", plot.d_max, "Largest distance factor of the family")
      ->check(CLI::PositiveNumber);
  plot_cmd->add_option("--lane-width", plot.lane_width, "Lane width (m)")
      ->check(CLI::PositiveNumber);
  plot_cmd->add_option("--csv-dir", plot.csv_dir, "Also write the family as CSV files");
  plot_cmd->add_option("--out", plot.out, "Output SVG")->required();

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run the fast invariant suite");
  verify_cmd->add_option("--inject-fault", verify.fault,
                         "Deliberate defect to confirm the checks fail")
      ->check(CLI::IsMember({"none", "backward-sign"}));

  ConfigArgs config;
  auto* config_cmd = app.add_subcommand("config", "Print a resolved configuration");
  config_cmd->add_option("--config", config.config, "Configuration file")
      ->check(CLI::ExistingFile);
  config_cmd->add_option("--scenario", config.scenario, "Defaults for this scenario")
      ->check(CLI::IsMember({"overtake", "oncoming"}));
  config_cmd->add_option("--observation", config.observation, "Defaults for this observation")
      ->check(CLI::IsMember({"full", "limited", "grid"}));
  config_cmd->add_flag("--json", config.json, "Print JSON instead of key = value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  train.single_seed = seed_opt->count() > 0;

  try {
    if (*train_cmd) return Train(train);
    if (*eval_cmd) return Eval(eval);
    if (*rollout_cmd) return Rollout(rollout);
    if (*plot_cmd) return Plot(plot);
    if (*verify_cmd) return Verify(verify);
    if (*config_cmd) return PrintConfig(config);
  } catch (const lcdqn::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const lcdqn::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
