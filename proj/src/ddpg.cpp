#include "socrl/ddpg.hpp"

#include <cmath>

#include "socrl/errors.hpp"

namespace socrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractViolation("replay buffer: capacity must be positive");
  storage_.reserve(capacity);
}

void ReplayBuffer::insert(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
  ++insert_count_;
}

std::vector<const Transition*> ReplayBuffer::sample(int count, Rng& rng) const {
  if (storage_.empty()) throw ContractViolation("replay buffer: sampling while empty");
  std::vector<const Transition*> batch(count);
  for (int i = 0; i < count; ++i)
    batch[i] = &storage_[rng.integer(storage_.size())];
  return batch;
}

void validate(const DdpgConfig& cfg) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ContractViolation(msg);
  };
  require(cfg.minibatch_size > 0, "ddpg: minibatch_size must be positive");
  require(cfg.gamma > 0.0 && cfg.gamma < 1.0, "ddpg: gamma must lie in (0, 1)");
  require(cfg.exploration_std_initial >= 0.0 && cfg.exploration_std_final >= 0.0,
          "ddpg: exploration stds must be nonnegative");
  require(cfg.episodes >= 0, "ddpg: episodes must be nonnegative");
  require(cfg.steps_per_episode > 0, "ddpg: steps_per_episode must be positive");
  require(cfg.buffer_capacity > 0, "ddpg: buffer_capacity must be positive");
  require(cfg.actor_lr > 0.0 && cfg.critic_lr > 0.0, "ddpg: learning rates must be positive");
  require(cfg.target_mix_rate > 0.0 && cfg.target_mix_rate <= 1.0,
          "ddpg: target_mix_rate must lie in (0, 1]");
  require(cfg.hidden_size > 0, "ddpg: hidden_size must be positive");
  require(cfg.grad_clip >= 0.0, "ddpg: grad_clip must be nonnegative");
}

Eigen::VectorXd act(const Mlp& actor, const InformationState& state) {
  return forward(actor, vectorize(state));
}

Eigen::VectorXd act_explore(const Mlp& actor, const InformationState& state,
                            double noise_std, Rng& rng,
                            const Eigen::VectorXd& input_lower,
                            const Eigen::VectorXd& input_upper) {
  if (noise_std < 0.0) throw ContractViolation("act_explore: std must be nonnegative");
  Eigen::VectorXd u = act(actor, state);
  if (noise_std > 0.0)
    u += noise_std * rng.gaussian_vector(static_cast<int>(u.size()));
  return u.cwiseMax(input_lower).cwiseMin(input_upper);
}

namespace {

GradientRecord zero_gradients(const Mlp& net) {
  GradientRecord rec;
  for (int l = 0; l < net.layer_count(); ++l) {
    rec.weight_grads.push_back(
        Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    rec.bias_grads.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  rec.input_grad = Eigen::VectorXd::Zero(net.input_dim());
  return rec;
}

void accumulate(GradientRecord& acc, const GradientRecord& g, double scale) {
  for (std::size_t l = 0; l < acc.weight_grads.size(); ++l) {
    acc.weight_grads[l] += scale * g.weight_grads[l];
    acc.bias_grads[l] += scale * g.bias_grads[l];
  }
}

double gradient_norm(const GradientRecord& rec) {
  double sq = 0.0;
  for (std::size_t l = 0; l < rec.weight_grads.size(); ++l) {
    sq += rec.weight_grads[l].squaredNorm();
    sq += rec.bias_grads[l].squaredNorm();
  }
  return std::sqrt(sq);
}

void clip_gradients(GradientRecord& rec, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = gradient_norm(rec);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (std::size_t l = 0; l < rec.weight_grads.size(); ++l) {
    rec.weight_grads[l] *= scale;
    rec.bias_grads[l] *= scale;
  }
}

Eigen::VectorXd critic_input(const Eigen::VectorXd& features, const Eigen::VectorXd& u) {
  Eigen::VectorXd input(features.size() + u.size());
  input << features, u;
  return input;
}

bool parameters_finite(const Mlp& net) {
  for (int l = 0; l < net.layer_count(); ++l)
    if (!net.weights[l].allFinite() || !net.biases[l].allFinite()) return false;
  return true;
}

}  // namespace

double critic_update(Mlp& critic, const Mlp& actor,
                     std::span<const Transition* const> batch,
                     OptimizerState& opt, double gamma, const Mlp* target_critic,
                     const Mlp* target_actor, double grad_clip) {
  if (batch.empty()) throw ContractViolation("critic_update: empty batch");
  const Mlp& bootstrap_critic = target_critic ? *target_critic : critic;
  const Mlp& bootstrap_actor = target_actor ? *target_actor : actor;
  const double inv_m = 1.0 / static_cast<double>(batch.size());

  GradientRecord grads = zero_gradients(critic);
  double loss = 0.0;
  Eigen::VectorXd upstream(1);
  for (const Transition* t : batch) {
    const Eigen::VectorXd next_action = forward(bootstrap_actor, t->next_info_state);
    const double next_q =
        forward(bootstrap_critic, critic_input(t->next_info_state, next_action))(0);
    const double target = t->reward + gamma * next_q;

    const Eigen::VectorXd input = critic_input(t->info_state, t->action);
    const double q = forward(critic, input)(0);
    const double err = q - target;
    loss += inv_m * err * err;
    // d/dpsi of (1/M) sum (z - Q)^2 = (2/M) sum (Q - z) dQ/dpsi
    upstream(0) = 2.0 * inv_m * err;
    accumulate(grads, backward(critic, input, upstream), 1.0);
  }
  clip_gradients(grads, grad_clip);
  optimizer_step(opt, critic, grads);
  return loss;
}

double actor_update(Mlp& actor, const Mlp& critic,
                    std::span<const Transition* const> batch,
                    OptimizerState& opt, double grad_clip) {
  if (batch.empty()) throw ContractViolation("actor_update: empty batch");
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  const int action_dim = actor.output_dim();

  GradientRecord ascent = zero_gradients(actor);
  Eigen::VectorXd q_upstream = Eigen::VectorXd::Ones(1);
  for (const Transition* t : batch) {
    const Eigen::VectorXd u = forward(actor, t->info_state);
    const GradientRecord critic_grads =
        backward(critic, critic_input(t->info_state, u), q_upstream);
    const Eigen::VectorXd action_grad = critic_grads.input_grad.tail(action_dim);
    accumulate(ascent, backward(actor, t->info_state, action_grad), inv_m);
  }
  clip_gradients(ascent, grad_clip);
  const double norm = gradient_norm(ascent);
  // Ascend on Q: negate the accumulated gradient for the descent-form step.
  for (auto& g : ascent.weight_grads) g = -g;
  for (auto& g : ascent.bias_grads) g = -g;
  optimizer_step(opt, actor, ascent);
  return norm;
}

std::pair<InformationState, Eigen::VectorXd> sample_initial_state(
    const PlantModel& model, Rng& rng) {
  InformationState state;
  state.mean.resize(model.state_dim);
  for (int i = 0; i < model.state_dim; ++i) state.mean(i) = rng.uniform(-3.0, 3.0);
  state.cov = Eigen::MatrixXd::Identity(model.state_dim, model.state_dim);
  Eigen::VectorXd truth = state.mean + rng.gaussian_vector(model.state_dim);
  return {std::move(state), std::move(truth)};
}

Mlp make_actor(const PlantModel& model, int hidden_size, Rng& rng) {
  double scale = std::numeric_limits<double>::infinity();
  for (int i = 0; i < model.input_dim; ++i)
    scale = std::min({scale, -model.input_lower(i), model.input_upper(i)});
  if (!(scale > 0.0))
    throw ContractViolation("make_actor: input bounds must straddle zero");
  return init_network({feature_dim(model.state_dim), hidden_size, model.input_dim},
                      Activation::Relu, Activation::Tanh, scale, rng);
}

Mlp make_critic(const PlantModel& model, int hidden_size, Rng& rng) {
  return init_network({feature_dim(model.state_dim) + model.input_dim, hidden_size, 1},
                      Activation::Relu, Activation::Identity, 1.0, rng);
}

TrainResult train(const PlantModel& model, const CostWeights& weights,
                  const DdpgConfig& cfg, Rng& rng) {
  Mlp actor = make_actor(model, cfg.hidden_size, rng);
  Mlp critic = make_critic(model, cfg.hidden_size, rng);
  return train_with_networks(model, weights, cfg, std::move(actor), std::move(critic),
                             rng);
}

TrainResult train_with_networks(const PlantModel& model, const CostWeights& weights,
                                const DdpgConfig& cfg, Mlp actor, Mlp critic,
                                Rng& rng) {
  validate(cfg);
  TrainResult result;
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  OptimizerState actor_opt = make_optimizer(actor, cfg.actor_lr);
  OptimizerState critic_opt = make_optimizer(critic, cfg.critic_lr);

  Mlp target_actor, target_critic;
  if (cfg.use_target_networks) {
    target_actor = actor;
    target_critic = critic;
  }
  auto soft_update = [&](Mlp& target, const Mlp& source) {
    const double tau = cfg.target_mix_rate;
    for (int l = 0; l < source.layer_count(); ++l) {
      target.weights[l] = tau * source.weights[l] + (1.0 - tau) * target.weights[l];
      target.biases[l] = tau * source.biases[l] + (1.0 - tau) * target.biases[l];
    }
  };

  result.episode_returns.reserve(cfg.episodes);
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    const double frac =
        cfg.episodes > 1 ? static_cast<double>(episode) / (cfg.episodes - 1) : 0.0;
    const double noise_std =
        cfg.exploration_std_initial +
        frac * (cfg.exploration_std_final - cfg.exploration_std_initial);

    auto [belief, truth] = sample_initial_state(model, rng);
    double episode_return = 0.0;
    double discount = 1.0;
    bool aborted = false;

    for (int k = 0; k < cfg.steps_per_episode; ++k) {
      const Eigen::VectorXd u = act_explore(actor, belief, noise_std, rng,
                                            model.input_lower, model.input_upper);
      const double r = reward(weights, belief, u);
      episode_return += discount * r;
      discount *= cfg.gamma;

      truth = step_truth(model, truth, u, rng);
      const Eigen::VectorXd y = observe(model, truth, rng);

      InformationState next_belief;
      try {
        next_belief = propagate(model, belief, u, y);
      } catch (const NumericalFailure&) {
        aborted = true;
        break;
      }

      buffer.insert({vectorize(belief), u, r, vectorize(next_belief)});
      belief = std::move(next_belief);

      if (buffer.size() >= static_cast<std::size_t>(cfg.minibatch_size)) {
        const auto batch = buffer.sample(cfg.minibatch_size, rng);
        critic_update(critic, actor, batch, critic_opt, cfg.gamma,
                      cfg.use_target_networks ? &target_critic : nullptr,
                      cfg.use_target_networks ? &target_actor : nullptr,
                      cfg.grad_clip);
        actor_update(actor, critic, batch, actor_opt, cfg.grad_clip);
        if (cfg.use_target_networks) {
          soft_update(target_critic, critic);
          soft_update(target_actor, actor);
        }
      }
    }

    if (aborted) ++result.aborted_episodes;
    result.episode_returns.push_back(episode_return);
    if (!parameters_finite(actor) || !parameters_finite(critic))
      throw NumericalFailure("train: network parameters became non-finite at episode " +
                             std::to_string(episode));
  }

  result.actor = std::move(actor);
  result.critic = std::move(critic);
  return result;
}

}  // namespace socrl
