#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "socrl/cost.hpp"
#include "socrl/ddpg.hpp"
#include "socrl/ekf.hpp"
#include "socrl/lqr.hpp"
#include "socrl/plant.hpp"

namespace socrl {

using Policy = std::function<Eigen::VectorXd(const InformationState&)>;

/// Per-step record of one closed-loop episode. Row k holds the true
/// state and belief at time k, the control applied there, the
/// measurement that the next belief was filtered from, and the reward
/// of the (belief, control) pair. Together with the initial covariance
/// the rows replay exactly through the filter.
struct EpisodeTrace {
  std::string policy_label;
  std::uint64_t seed = 0;
  Eigen::VectorXd initial_mean;
  Eigen::MatrixXd initial_cov;

  std::vector<Eigen::VectorXd> true_state;  // x_k
  std::vector<Eigen::VectorXd> estimate;    // mean of belief at k
  std::vector<double> cov_trace;            // tr of belief covariance at k
  std::vector<Eigen::VectorXd> control;     // u_k
  std::vector<Eigen::VectorXd> output;      // y_{k+1}
  std::vector<double> reward;               // r(belief_k, u_k)

  bool truncated = false;    // filter failure cut the episode short
  long failure_step = -1;

  int steps() const { return static_cast<int>(true_state.size()); }
};

/// Simulates plant and filter in lockstep for `steps` steps under the
/// given policy. Deterministic given the rng seed. A filter failure
/// truncates the trace and sets the flag instead of propagating.
EpisodeTrace rollout(const PlantModel& model, const CostWeights& weights,
                     const Policy& policy, const InformationState& initial_belief,
                     const Eigen::VectorXd& initial_truth, int steps, Rng& rng,
                     const std::string& policy_label = "", std::uint64_t seed = 0);

struct DivergenceStat {
  bool flagged = false;
  long first_crossing = -1;
};

/// Flags the episode if cov_trace strictly exceeds the threshold at any
/// step, reporting the first crossing.
DivergenceStat divergence_stat(const EpisodeTrace& trace, double threshold);

/// Stationary covariance trace of the filter at the origin under zero
/// control and zero noise, found by running the covariance recursion to
/// convergence. The default divergence threshold is 5x this value.
double stationary_cov_trace(const PlantModel& model, double tol = 1e-10,
                            int max_steps = 100000);

struct EpisodeSummary {
  std::uint64_t seed = 0;
  double peak_cov_trace = 0.0;
  double discounted_return = 0.0;
  bool divergent = false;
  long first_crossing = -1;
  bool truncated = false;
};

struct PolicySummary {
  std::string label;
  double median_peak_cov_trace = 0.0;
  double max_peak_cov_trace = 0.0;
  double divergent_fraction = 0.0;
  double mean_return = 0.0;
  std::vector<EpisodeSummary> episodes;
};

struct ComparisonReport {
  PolicySummary first;
  PolicySummary second;
  double divergence_threshold = 0.0;
  int episodes = 0;
  int steps = 0;
  std::uint64_t base_seed = 0;
};

/// Paired closed-loop comparison: episode i uses seed base_seed + i for
/// both policies, so initial conditions and noise realizations match
/// across the two columns (common random numbers). threshold <= 0
/// selects the default 5x stationary trace.
ComparisonReport compare(const PlantModel& model, const CostWeights& weights,
                         const Policy& first, const std::string& first_label,
                         const Policy& second, const std::string& second_label,
                         int n_episodes, int steps, std::uint64_t base_seed,
                         double divergence_threshold = 0.0);

/// Rollout traces for one side of a paired comparison, with the same
/// seeding scheme compare uses.
std::vector<EpisodeTrace> paired_rollouts(const PlantModel& model,
                                          const CostWeights& weights,
                                          const Policy& policy,
                                          const std::string& label, int n_episodes,
                                          int steps, std::uint64_t base_seed);

struct SweepResult {
  std::vector<std::vector<double>> trial_returns;  // [trial][episode]
  std::vector<int> failed_trials;
  int best_trial = -1;   // highest terminal accumulated reward
  Mlp best_actor;
  Mlp best_critic;
  std::vector<double> mean_curve;  // across surviving trials
  std::vector<double> band_halfwidth;  // two standard deviations
};

/// Runs n_trials independent training runs with seeds base_seed ..
/// base_seed + n_trials - 1, in parallel when threads allow. Failed
/// trials are recorded and excluded from the statistics.
SweepResult multi_trial_train(const PlantModel& model, const CostWeights& weights,
                              const DdpgConfig& cfg, int n_trials,
                              std::uint64_t base_seed, int max_threads = 0);

/// Divides every curve by the largest absolute value across all curves,
/// mapping accumulated rewards into [-1, 0]. All-zero input is returned
/// unchanged.
std::vector<std::vector<double>> normalize_returns(
    const std::vector<std::vector<double>>& curves);

/// (A, B) of the dynamics linearized at the origin; exact whenever the
/// dynamics are linear in state and input, as for the built-in plants.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize_dynamics(const PlantModel& model);

/// Policy adapters.
Policy lqg_as_policy(const RiccatiSolution& sol, const PlantModel& model);
Policy actor_as_policy(const Mlp& actor);  // copies the actor
Policy zero_policy(const PlantModel& model);

}  // namespace socrl
