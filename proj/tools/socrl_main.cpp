// Command-line front end: training sweeps, policy evaluation, the
// LQG-vs-RL comparison, and a Riccati inspector, all driven by a
// sectioned key = value config with flag overrides.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "socrl/config.hpp"
#include "socrl/errors.hpp"
#include "socrl/harness.hpp"
#include "socrl/lqr.hpp"
#include "socrl/mlp.hpp"
#include "socrl/trace_io.hpp"

namespace {

using namespace socrl;

struct Flags {
  std::string config_path;
  std::string out_dir;
  std::string checkpoint;
  long long seed = -1;
  int trials = -1;
  int episodes = -1;  // training episodes (train), evaluation episodes otherwise
};

void add_common_flags(CLI::App* cmd, Flags& flags, bool with_checkpoint) {
  cmd->add_option("--config", flags.config_path, "config file (sectioned key = value)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "base random seed")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--trials", flags.trials, "independent training trials")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--episodes", flags.episodes,
                  "episode count (training episodes for train, evaluation episodes "
                  "for evaluate/compare)")
      ->check(CLI::NonNegativeNumber);
  if (with_checkpoint)
    cmd->add_option("--checkpoint", flags.checkpoint, "actor checkpoint file")
        ->check(CLI::ExistingFile);
}

RunConfig resolve_config(const Flags& flags, bool episodes_are_training) {
  RunConfig cfg =
      flags.config_path.empty() ? default_config() : load_config(flags.config_path);
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.trials > 0) cfg.trials = flags.trials;
  if (flags.episodes >= 0) {
    if (episodes_are_training)
      cfg.ddpg.episodes = flags.episodes;
    else
      cfg.eval_episodes = flags.episodes;
  }
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.checkpoint.empty()) cfg.checkpoint = flags.checkpoint;
  finalize_config(cfg);
  return cfg;
}

std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_manifest_file(const std::filesystem::path& dir, const RunConfig& cfg,
                         const std::string& command) {
  std::ofstream os(dir / "manifest.txt");
  if (!os) throw ConfigError("cannot write manifest in " + dir.string());
  write_manifest(os, cfg, command);
}

Mlp load_actor(const RunConfig& cfg, const PlantModel& model) {
  if (cfg.checkpoint.empty())
    throw ConfigError("this command needs a checkpoint (--checkpoint or [run] key)");
  Mlp actor;
  try {
    actor = load_checkpoint(cfg.checkpoint);
  } catch (const ContractViolation& err) {
    throw ConfigError("bad checkpoint " + cfg.checkpoint + ": " + err.what());
  }
  if (actor.input_dim() != feature_dim(model.state_dim) ||
      actor.output_dim() != model.input_dim)
    throw ConfigError("checkpoint " + cfg.checkpoint +
                      " does not match the configured plant dimensions");
  return actor;
}

int cmd_train(const RunConfig& cfg) {
  PlantModel model = build_plant(cfg.plant);
  SweepResult sweep =
      multi_trial_train(model, cfg.cost, cfg.ddpg, cfg.trials, cfg.seed);
  for (int t : sweep.failed_trials)
    std::fprintf(stderr, "warning: trial %d failed and is excluded from statistics\n",
                 t);

  auto dir = prepare_out_dir(cfg);
  auto normalized = normalize_returns(sweep.trial_returns);
  for (int t = 0; t < cfg.trials; ++t) {
    auto path = dir / ("returns_trial_" + std::to_string(t) + ".csv");
    write_return_csv(path.string(), sweep.trial_returns[t], normalized[t]);
  }
  {
    std::ofstream os(dir / "returns_stats.csv");
    os << "episode,mean_return,band_halfwidth\n";
    for (std::size_t e = 0; e < sweep.mean_curve.size(); ++e)
      os << e << ',' << format_17g(sweep.mean_curve[e]) << ','
         << format_17g(sweep.band_halfwidth[e]) << '\n';
  }
  save_checkpoint(sweep.best_actor, (dir / "actor_best.txt").string());
  write_manifest_file(dir, cfg, "train");

  double terminal = sweep.trial_returns[sweep.best_trial].empty()
                        ? 0.0
                        : sweep.trial_returns[sweep.best_trial].back();
  std::printf("trials: %d (failed: %zu)\n", cfg.trials, sweep.failed_trials.size());
  std::printf("best_trial: %d (seed %llu)\n", sweep.best_trial,
              static_cast<unsigned long long>(cfg.seed + sweep.best_trial));
  std::printf("terminal_return: %s\n", format_17g(terminal).c_str());
  std::printf("outputs: %s\n", dir.string().c_str());
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  PlantModel model = build_plant(cfg.plant);
  Mlp actor = load_actor(cfg, model);
  auto traces = paired_rollouts(model, cfg.cost, actor_as_policy(actor), "rl",
                                cfg.eval_episodes, cfg.eval_steps, cfg.seed);

  auto dir = prepare_out_dir(cfg);
  double mean_return = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (cfg.write_traces) {
      auto path = dir / ("trace_rl_" + std::to_string(i) + ".csv");
      write_trace_csv(path.string(), traces[i]);
    }
    mean_return += discounted_return(cfg.cost, traces[i].reward);
  }
  mean_return /= static_cast<double>(traces.size());
  write_manifest_file(dir, cfg, "evaluate");

  std::printf("episodes: %d x %d steps\n", cfg.eval_episodes, cfg.eval_steps);
  std::printf("mean_return: %s\n", format_17g(mean_return).c_str());
  std::printf("outputs: %s\n", dir.string().c_str());
  return 0;
}

int cmd_compare(const RunConfig& cfg) {
  PlantModel model = build_plant(cfg.plant);
  Mlp actor = load_actor(cfg, model);
  auto [a, b] = linearize_dynamics(model);
  RiccatiSolution sol = solve_discounted_riccati(a, b, cfg.cost.Q, cfg.cost.R,
                                                 cfg.cost.gamma);
  ComparisonReport report =
      compare(model, cfg.cost, actor_as_policy(actor), "rl",
              lqg_as_policy(sol, model), "lqg", cfg.eval_episodes, cfg.eval_steps,
              cfg.seed, cfg.divergence_threshold);

  auto dir = prepare_out_dir(cfg);
  {
    std::ofstream os(dir / "comparison.txt");
    write_comparison_report(os, report);
  }
  write_episode_summary_csv((dir / "episodes_rl.csv").string(), report.first);
  write_episode_summary_csv((dir / "episodes_lqg.csv").string(), report.second);
  if (cfg.write_traces) {
    auto rl = paired_rollouts(model, cfg.cost, actor_as_policy(actor), "rl",
                              cfg.eval_episodes, cfg.eval_steps, cfg.seed);
    auto lqg = paired_rollouts(model, cfg.cost, lqg_as_policy(sol, model), "lqg",
                               cfg.eval_episodes, cfg.eval_steps, cfg.seed);
    for (std::size_t i = 0; i < rl.size(); ++i) {
      write_trace_csv((dir / ("trace_rl_" + std::to_string(i) + ".csv")).string(),
                      rl[i]);
      write_trace_csv((dir / ("trace_lqg_" + std::to_string(i) + ".csv")).string(),
                      lqg[i]);
    }
  }
  write_manifest_file(dir, cfg, "compare");

  write_comparison_report(std::cout, report);
  return 0;
}

int cmd_riccati(const RunConfig& cfg) {
  PlantModel model = build_plant(cfg.plant);
  auto [a, b] = linearize_dynamics(model);
  RiccatiSolution sol = solve_discounted_riccati(a, b, cfg.cost.Q, cfg.cost.R,
                                                 cfg.cost.gamma);

  std::printf("P:\n");
  for (int i = 0; i < sol.P.rows(); ++i) {
    std::printf(" ");
    for (int j = 0; j < sol.P.cols(); ++j)
      std::printf(" %s", format_17g(sol.P(i, j)).c_str());
    std::printf("\n");
  }
  std::printf("K:\n");
  for (int i = 0; i < sol.K.rows(); ++i) {
    std::printf(" ");
    for (int j = 0; j < sol.K.cols(); ++j)
      std::printf(" %s", format_17g(sol.K(i, j)).c_str());
    std::printf("\n");
  }
  std::printf("residual: %s\n", format_17g(sol.residual).c_str());
  std::printf("iterations: %d\n", sol.iterations);

  Eigen::MatrixXd closed = std::sqrt(cfg.cost.gamma) * (a + b * sol.K);
  Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(closed).eigenvalues();
  std::vector<double> moduli(eig.size());
  for (int i = 0; i < eig.size(); ++i) moduli[i] = std::abs(eig(i));
  std::sort(moduli.rbegin(), moduli.rend());
  std::printf("closed_loop_moduli:");
  for (double m : moduli) std::printf(" %s", format_17g(m).c_str());
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EKF information-state control workbench: DDPG training, "
               "LQG baseline, and comparison tooling"};
  app.require_subcommand(1);

  Flags flags;
  CLI::App* train = app.add_subcommand("train", "run training trials, keep the best actor");
  add_common_flags(train, flags, false);
  CLI::App* evaluate = app.add_subcommand("evaluate", "roll out a trained actor");
  add_common_flags(evaluate, flags, true);
  CLI::App* cmp = app.add_subcommand("compare", "paired rollouts: actor vs LQG");
  add_common_flags(cmp, flags, true);
  CLI::App* riccati = app.add_subcommand("riccati", "print the LQG gain and spectrum");
  add_common_flags(riccati, flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return cmd_train(resolve_config(flags, true));
    if (evaluate->parsed()) return cmd_evaluate(resolve_config(flags, false));
    if (cmp->parsed()) return cmd_compare(resolve_config(flags, false));
    return cmd_riccati(resolve_config(flags, false));
  } catch (const ConfigError& err) {
    if (err.line > 0)
      std::fprintf(stderr, "config error (line %d): %s\n", err.line, err.what());
    else
      std::fprintf(stderr, "config error: %s\n", err.what());
    return 2;
  } catch (const NumericalFailure& err) {
    std::fprintf(stderr, "numerical failure: %s\n", err.what());
    return 3;
  } catch (const ConvergenceFailure& err) {
    std::fprintf(stderr, "numerical failure: %s (residual %g after %d iterations)\n",
                 err.what(), err.residual, err.iterations);
    return 3;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}
