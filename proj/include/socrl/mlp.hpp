#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "socrl/rng.hpp"

namespace socrl {

enum class Activation { Identity, Relu, Tanh };

Activation activation_from_name(const std::string& name);
const char* activation_name(Activation a);

/// Small fully connected network. The hidden activation applies after
/// every layer but the last; the output activation applies to the last
/// layer and its result is multiplied by output_scale. A policy head
/// uses Tanh with the input-bound magnitude as scale, a value head uses
/// Identity with scale 1.
struct Mlp {
  std::vector<int> layer_dims;           // input, hidden..., output
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;   // biases[l]: dims[l+1]
  Activation hidden_activation = Activation::Relu;
  Activation output_activation = Activation::Identity;
  double output_scale = 1.0;

  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
};

/// Gradients of a scalar function upstream^T * forward(net, input) with
/// respect to every parameter and to the input.
struct GradientRecord {
  std::vector<Eigen::MatrixXd> weight_grads;
  std::vector<Eigen::VectorXd> bias_grads;
  Eigen::VectorXd input_grad;
};

/// Weights drawn uniformly from +-1/sqrt(fan_in), biases zero.
/// Deterministic given the rng state.
Mlp init_network(const std::vector<int>& layer_dims, Activation hidden,
                 Activation output, double output_scale, Rng& rng);

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& input);

/// Reverse-mode accumulation of d(upstream^T output)/d(params, input).
GradientRecord backward(const Mlp& net, const Eigen::VectorXd& input,
                        const Eigen::VectorXd& upstream);

/// Adaptive-moment optimizer state for one network. Moments start at
/// zero; step_count increments once per update.
struct OptimizerState {
  std::vector<Eigen::MatrixXd> weight_m, weight_v;
  std::vector<Eigen::VectorXd> bias_m, bias_v;
  long step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

OptimizerState make_optimizer(const Mlp& net, double learning_rate);

/// One bias-corrected adaptive-moment descent step in place. Callers
/// that want ascent negate the gradients first.
void optimizer_step(OptimizerState& state, Mlp& net, const GradientRecord& grads);

/// Plain-text checkpoint with a format-version line, layer dims,
/// activation names, output_scale and row-major weight/bias arrays
/// printed with 17 significant digits, so a save/load round trip is
/// bit-exact.
void save_checkpoint(const Mlp& net, std::ostream& out);
void save_checkpoint(const Mlp& net, const std::string& path);
Mlp load_checkpoint(std::istream& in);
Mlp load_checkpoint(const std::string& path);

}  // namespace socrl
