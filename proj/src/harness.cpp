#include "socrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "socrl/errors.hpp"

namespace socrl {

EpisodeTrace rollout(const PlantModel& model, const CostWeights& weights,
                     const Policy& policy, const InformationState& initial_belief,
                     const Eigen::VectorXd& initial_truth, int steps, Rng& rng,
                     const std::string& policy_label, std::uint64_t seed) {
  if (steps < 0) throw ContractViolation("rollout needs a nonnegative step count");
  if (initial_truth.size() != model.state_dim)
    throw ContractViolation("initial truth has wrong dimension");

  EpisodeTrace trace;
  trace.policy_label = policy_label;
  trace.seed = seed;
  trace.initial_mean = initial_belief.mean;
  trace.initial_cov = initial_belief.cov;
  trace.true_state.reserve(steps);
  trace.estimate.reserve(steps);
  trace.cov_trace.reserve(steps);
  trace.control.reserve(steps);
  trace.output.reserve(steps);
  trace.reward.reserve(steps);

  InformationState belief = initial_belief;
  Eigen::VectorXd x = initial_truth;
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd u = clamp_input(model, policy(belief));
    trace.true_state.push_back(x);
    trace.estimate.push_back(belief.mean);
    trace.cov_trace.push_back(belief.cov.trace());
    trace.control.push_back(u);
    trace.reward.push_back(reward(weights, belief, u));

    Eigen::VectorXd x_next = step_truth(model, x, u, rng);
    Eigen::VectorXd y = observe(model, x_next, rng);
    trace.output.push_back(y);
    try {
      belief = propagate(model, belief, u, y);
    } catch (const NumericalFailure&) {
      trace.truncated = true;
      trace.failure_step = k;
      break;
    }
    x = x_next;
  }
  return trace;
}

DivergenceStat divergence_stat(const EpisodeTrace& trace, double threshold) {
  if (threshold <= 0.0) throw ContractViolation("divergence threshold must be positive");
  DivergenceStat stat;
  for (std::size_t k = 0; k < trace.cov_trace.size(); ++k) {
    if (trace.cov_trace[k] > threshold) {
      stat.flagged = true;
      stat.first_crossing = static_cast<long>(k);
      break;
    }
  }
  return stat;
}

double stationary_cov_trace(const PlantModel& model, double tol, int max_steps) {
  InformationState belief{Eigen::VectorXd::Zero(model.state_dim),
                          Eigen::MatrixXd::Zero(model.state_dim, model.state_dim)};
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.state_dim);
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(model.input_dim);
  double prev = 0.0;
  double delta = 0.0;
  for (int step = 0; step < max_steps; ++step) {
    x = model.dynamics(x, u);
    belief = propagate(model, belief, u, model.observation(x));
    double t = belief.cov.trace();
    delta = std::abs(t - prev);
    if (step > 0 && delta <= tol * std::max(1.0, std::abs(t))) return t;
    prev = t;
  }
  throw ConvergenceFailure("filter covariance found no fixed point at the origin",
                           delta, max_steps);
}

std::vector<EpisodeTrace> paired_rollouts(const PlantModel& model,
                                          const CostWeights& weights,
                                          const Policy& policy,
                                          const std::string& label, int n_episodes,
                                          int steps, std::uint64_t base_seed) {
  if (n_episodes <= 0) throw ContractViolation("episode count must be positive");
  std::vector<EpisodeTrace> traces;
  traces.reserve(n_episodes);
  for (int i = 0; i < n_episodes; ++i) {
    std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    Rng rng(seed);
    auto [belief, truth] = sample_initial_state(model, rng);
    traces.push_back(
        rollout(model, weights, policy, belief, truth, steps, rng, label, seed));
  }
  return traces;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

PolicySummary summarize(const std::vector<EpisodeTrace>& traces,
                        const CostWeights& weights, double threshold,
                        const std::string& label) {
  PolicySummary summary;
  summary.label = label;
  std::vector<double> peaks;
  double return_sum = 0.0;
  for (const EpisodeTrace& trace : traces) {
    EpisodeSummary ep;
    ep.seed = trace.seed;
    ep.peak_cov_trace =
        *std::max_element(trace.cov_trace.begin(), trace.cov_trace.end());
    ep.discounted_return = discounted_return(weights, trace.reward);
    DivergenceStat d = divergence_stat(trace, threshold);
    ep.divergent = d.flagged;
    ep.first_crossing = d.first_crossing;
    ep.truncated = trace.truncated;
    if (trace.truncated && !ep.divergent) {
      // a filter failure is treated as divergence even below threshold
      ep.divergent = true;
      ep.first_crossing = trace.failure_step;
    }
    peaks.push_back(ep.peak_cov_trace);
    return_sum += ep.discounted_return;
    if (ep.divergent) summary.divergent_fraction += 1.0;
    summary.episodes.push_back(ep);
  }
  summary.median_peak_cov_trace = median(peaks);
  summary.max_peak_cov_trace = *std::max_element(peaks.begin(), peaks.end());
  summary.divergent_fraction /= static_cast<double>(traces.size());
  summary.mean_return = return_sum / static_cast<double>(traces.size());
  return summary;
}

}  // namespace

ComparisonReport compare(const PlantModel& model, const CostWeights& weights,
                         const Policy& first, const std::string& first_label,
                         const Policy& second, const std::string& second_label,
                         int n_episodes, int steps, std::uint64_t base_seed,
                         double divergence_threshold) {
  if (steps <= 0) throw ContractViolation("compare needs a positive step count");
  double threshold = divergence_threshold > 0.0 ? divergence_threshold
                                                : 5.0 * stationary_cov_trace(model);
  ComparisonReport report;
  report.divergence_threshold = threshold;
  report.episodes = n_episodes;
  report.steps = steps;
  report.base_seed = base_seed;
  report.first = summarize(
      paired_rollouts(model, weights, first, first_label, n_episodes, steps, base_seed),
      weights, threshold, first_label);
  report.second = summarize(
      paired_rollouts(model, weights, second, second_label, n_episodes, steps,
                      base_seed),
      weights, threshold, second_label);
  return report;
}

SweepResult multi_trial_train(const PlantModel& model, const CostWeights& weights,
                              const DdpgConfig& cfg, int n_trials,
                              std::uint64_t base_seed, int max_threads) {
  if (n_trials <= 0) throw ContractViolation("trial count must be positive");
  validate(cfg);

  std::vector<std::optional<TrainResult>> results(n_trials);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int t = next.fetch_add(1);
      if (t >= n_trials) return;
      Rng rng(base_seed + static_cast<std::uint64_t>(t));
      try {
        results[t] = train(model, weights, cfg, rng);
      } catch (const NumericalFailure&) {
        results[t].reset();
      }
    }
  };

  int hw = static_cast<int>(std::thread::hardware_concurrency());
  int n_threads = max_threads > 0 ? max_threads : std::max(hw, 1);
  n_threads = std::min(n_threads, n_trials);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepResult sweep;
  sweep.trial_returns.resize(n_trials);
  double best_terminal = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < n_trials; ++t) {
    if (!results[t]) {
      sweep.failed_trials.push_back(t);
      continue;
    }
    sweep.trial_returns[t] = results[t]->episode_returns;
    double terminal =
        results[t]->episode_returns.empty() ? 0.0 : results[t]->episode_returns.back();
    if (terminal > best_terminal) {
      best_terminal = terminal;
      sweep.best_trial = t;
    }
  }
  if (sweep.best_trial < 0)
    throw NumericalFailure("every training trial failed", n_trials);
  sweep.best_actor = results[sweep.best_trial]->actor;
  sweep.best_critic = results[sweep.best_trial]->critic;

  int n_ok = n_trials - static_cast<int>(sweep.failed_trials.size());
  sweep.mean_curve.resize(cfg.episodes, 0.0);
  sweep.band_halfwidth.resize(cfg.episodes, 0.0);
  for (int e = 0; e < cfg.episodes; ++e) {
    double sum = 0.0;
    for (int t = 0; t < n_trials; ++t)
      if (results[t]) sum += sweep.trial_returns[t][e];
    double mean = sum / n_ok;
    sweep.mean_curve[e] = mean;
    if (n_ok > 1) {
      double ss = 0.0;
      for (int t = 0; t < n_trials; ++t)
        if (results[t]) {
          double d = sweep.trial_returns[t][e] - mean;
          ss += d * d;
        }
      sweep.band_halfwidth[e] = 2.0 * std::sqrt(ss / (n_ok - 1));
    }
  }
  return sweep;
}

std::vector<std::vector<double>> normalize_returns(
    const std::vector<std::vector<double>>& curves) {
  double peak = 0.0;
  for (const auto& curve : curves)
    for (double v : curve) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return curves;
  auto out = curves;
  for (auto& curve : out)
    for (double& v : curve) v /= peak;
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize_dynamics(
    const PlantModel& model) {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(model.state_dim);
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(model.input_dim);
  Eigen::MatrixXd a = model.dynamics_jacobian(x0, u0);
  Eigen::VectorXd f0 = model.dynamics(x0, u0);
  Eigen::MatrixXd b(model.state_dim, model.input_dim);
  for (int j = 0; j < model.input_dim; ++j) {
    Eigen::VectorXd ej = Eigen::VectorXd::Unit(model.input_dim, j);
    b.col(j) = model.dynamics(x0, ej) - f0;
  }
  return {a, b};
}

Policy lqg_as_policy(const RiccatiSolution& sol, const PlantModel& model) {
  return [sol, lo = model.input_lower, hi = model.input_upper](
             const InformationState& state) { return lqg_policy(sol, state, lo, hi); };
}

Policy actor_as_policy(const Mlp& actor) {
  return [actor](const InformationState& state) { return act(actor, state); };
}

Policy zero_policy(const PlantModel& model) {
  return [r_u = model.input_dim](const InformationState&) {
    return Eigen::VectorXd::Zero(r_u).eval();
  };
}

}  // namespace socrl
