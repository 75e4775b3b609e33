#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "socrl/cost.hpp"
#include "socrl/ekf.hpp"
#include "socrl/mlp.hpp"
#include "socrl/plant.hpp"

namespace socrl {

/// One replay tuple over vectorized beliefs.
struct Transition {
  Eigen::VectorXd info_state;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_info_state;
};

/// Fixed-capacity ring of transitions, oldest evicted first. Sampling
/// is uniform with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void insert(Transition t);
  std::vector<const Transition*> sample(int count, Rng& rng) const;

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  long insert_count() const { return insert_count_; }
  const Transition& at(std::size_t i) const { return storage_[i]; }

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t next_ = 0;
  long insert_count_ = 0;
};

struct DdpgConfig {
  int minibatch_size = 64;
  double gamma = 0.95;
  double exploration_std_initial = 1.0;
  double exploration_std_final = 0.1;
  int episodes = 300;
  int steps_per_episode = 100;
  int buffer_capacity = 100000;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  bool use_target_networks = false;
  double target_mix_rate = 0.005;
  int hidden_size = 64;
  double grad_clip = 0.0;  // 0 disables clipping
};

void validate(const DdpgConfig& cfg);

/// Deterministic policy evaluation u = actor(vectorize(state)).
Eigen::VectorXd act(const Mlp& actor, const InformationState& state);

/// act plus Gaussian exploration noise, clamped to the bounds.
/// std = 0 returns act exactly and consumes no randomness.
Eigen::VectorXd act_explore(const Mlp& actor, const InformationState& state,
                            double noise_std, Rng& rng,
                            const Eigen::VectorXd& input_lower,
                            const Eigen::VectorXd& input_upper);

/// One temporal-difference step on the critic: targets
///   z_i = r_i + gamma * critic(s'_i, actor(s'_i))
/// are treated as constants, and one optimizer step is taken on the
/// minibatch loss (1/M) sum (z_i - critic(s_i, u_i))^2. When target
/// networks are supplied they replace actor/critic in the target only.
/// Returns the pre-step loss.
double critic_update(Mlp& critic, const Mlp& actor,
                     std::span<const Transition* const> batch,
                     OptimizerState& opt, double gamma,
                     const Mlp* target_critic = nullptr,
                     const Mlp* target_actor = nullptr, double grad_clip = 0.0);

/// One deterministic-policy-gradient ascent step on the actor: the
/// critic's action gradient at u = actor(s_i), chained through actor
/// backpropagation and averaged over the batch. Returns the gradient
/// norm before the step.
double actor_update(Mlp& actor, const Mlp& critic,
                    std::span<const Transition* const> batch,
                    OptimizerState& opt, double grad_clip = 0.0);

/// Draws the episode start: belief mean uniform in [-3,3]^r_x with unit
/// covariance, true state from that belief.
std::pair<InformationState, Eigen::VectorXd> sample_initial_state(
    const PlantModel& model, Rng& rng);

struct TrainResult {
  Mlp actor;
  Mlp critic;
  std::vector<double> episode_returns;  // discounted return per episode
  long aborted_episodes = 0;            // episodes cut short by filter failures
};

/// Full training loop: per step act_explore -> truth step -> measurement
/// -> filter propagate -> reward -> store -> minibatch critic and actor
/// updates (after a warm-up of minibatch_size stored transitions).
/// Exploration noise decays linearly across episodes. Deterministic
/// given the rng seed.
TrainResult train(const PlantModel& model, const CostWeights& weights,
                  const DdpgConfig& cfg, Rng& rng);

/// Same loop but starting from caller-supplied networks.
TrainResult train_with_networks(const PlantModel& model, const CostWeights& weights,
                                const DdpgConfig& cfg, Mlp actor, Mlp critic,
                                Rng& rng);

/// Layer layout the trainer uses for a plant: actor feature->hidden->r_u
/// with tanh output scaled to the input bounds, critic
/// (feature+r_u)->hidden->1 affine.
Mlp make_actor(const PlantModel& model, int hidden_size, Rng& rng);
Mlp make_critic(const PlantModel& model, int hidden_size, Rng& rng);

}  // namespace socrl
