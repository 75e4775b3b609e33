#include "socrl/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "socrl/errors.hpp"

namespace socrl {

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw ContractViolation("unknown activation: " + name);
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "identity";
}

namespace {

double apply_act(Activation a, double z) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::Tanh: return std::tanh(z);
  }
  return z;
}

// Derivative in terms of the pre-activation z.
double apply_act_prime(Activation a, double z) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

void check_input(const Mlp& net, const Eigen::VectorXd& input) {
  if (input.size() != net.input_dim())
    throw ContractViolation("mlp: input length does not match layer_dims[0]");
}

}  // namespace

Mlp init_network(const std::vector<int>& layer_dims, Activation hidden,
                 Activation output, double output_scale, Rng& rng) {
  if (layer_dims.size() < 2)
    throw ContractViolation("init_network: need at least input and output dims");
  for (int d : layer_dims)
    if (d <= 0) throw ContractViolation("init_network: dims must be positive");

  Mlp net;
  net.layer_dims = layer_dims;
  net.hidden_activation = hidden;
  net.output_activation = output;
  net.output_scale = output_scale;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const int fan_in = layer_dims[l];
    const int fan_out = layer_dims[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return net;
}

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& input) {
  check_input(net, input);
  Eigen::VectorXd a = input;
  const int layers = net.layer_count();
  for (int l = 0; l < layers; ++l) {
    Eigen::VectorXd z = net.weights[l] * a + net.biases[l];
    const Activation act =
        (l + 1 == layers) ? net.output_activation : net.hidden_activation;
    a.resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) a(i) = apply_act(act, z(i));
    if (l + 1 == layers) a *= net.output_scale;
  }
  return a;
}

GradientRecord backward(const Mlp& net, const Eigen::VectorXd& input,
                        const Eigen::VectorXd& upstream) {
  check_input(net, input);
  if (upstream.size() != net.output_dim())
    throw ContractViolation("mlp: upstream length does not match output dim");

  const int layers = net.layer_count();
  std::vector<Eigen::VectorXd> activations(layers + 1);
  std::vector<Eigen::VectorXd> pre_activations(layers);
  activations[0] = input;
  for (int l = 0; l < layers; ++l) {
    pre_activations[l] = net.weights[l] * activations[l] + net.biases[l];
    const Activation act =
        (l + 1 == layers) ? net.output_activation : net.hidden_activation;
    Eigen::VectorXd a(pre_activations[l].size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
      a(i) = apply_act(act, pre_activations[l](i));
    if (l + 1 == layers) a *= net.output_scale;
    activations[l + 1] = std::move(a);
  }

  GradientRecord rec;
  rec.weight_grads.resize(layers);
  rec.bias_grads.resize(layers);

  Eigen::VectorXd delta = upstream * net.output_scale;
  for (int l = layers - 1; l >= 0; --l) {
    const Activation act =
        (l + 1 == layers) ? net.output_activation : net.hidden_activation;
    for (Eigen::Index i = 0; i < delta.size(); ++i)
      delta(i) *= apply_act_prime(act, pre_activations[l](i));
    rec.weight_grads[l] = delta * activations[l].transpose();
    rec.bias_grads[l] = delta;
    delta = (net.weights[l].transpose() * delta).eval();
  }
  rec.input_grad = std::move(delta);
  return rec;
}

OptimizerState make_optimizer(const Mlp& net, double learning_rate) {
  OptimizerState state;
  state.learning_rate = learning_rate;
  for (int l = 0; l < net.layer_count(); ++l) {
    state.weight_m.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(),
                                                   net.weights[l].cols()));
    state.weight_v.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(),
                                                   net.weights[l].cols()));
    state.bias_m.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    state.bias_v.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return state;
}

void optimizer_step(OptimizerState& state, Mlp& net, const GradientRecord& grads) {
  if (state.weight_m.size() != net.weights.size())
    throw ContractViolation("optimizer_step: state does not match network");
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    param -= (state.learning_rate * (m / bc1).array() /
              ((v / bc2).array().sqrt() + state.epsilon))
                 .matrix();
  };

  for (int l = 0; l < net.layer_count(); ++l) {
    update(net.weights[l], state.weight_m[l], state.weight_v[l], grads.weight_grads[l]);
    update(net.biases[l], state.bias_m[l], state.bias_v[l], grads.bias_grads[l]);
  }
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void save_checkpoint(const Mlp& net, std::ostream& out) {
  out << "socrl-mlp 1\n";
  out << "layer_dims";
  for (int d : net.layer_dims) out << ' ' << d;
  out << '\n';
  out << "hidden_activation " << activation_name(net.hidden_activation) << '\n';
  out << "output_activation " << activation_name(net.output_activation) << '\n';
  out << "output_scale " << fmt17(net.output_scale) << '\n';
  for (int l = 0; l < net.layer_count(); ++l) {
    const auto& w = net.weights[l];
    out << "weights " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        if (j) out << ' ';
        out << fmt17(w(i, j));
      }
      out << '\n';
    }
    const auto& b = net.biases[l];
    out << "biases " << l << ' ' << b.size() << '\n';
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      if (i) out << ' ';
      out << fmt17(b(i));
    }
    out << '\n';
  }
}

void save_checkpoint(const Mlp& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NumericalFailure("save_checkpoint: cannot open " + path);
  save_checkpoint(net, out);
  if (!out.good()) throw NumericalFailure("save_checkpoint: write failed: " + path);
}

namespace {

void fail_parse(const std::string& what) {
  throw ContractViolation("load_checkpoint: " + what);
}

}  // namespace

Mlp load_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "socrl-mlp") fail_parse("bad header");
  if (version != 1) fail_parse("unsupported format version");

  Mlp net;
  std::string key;
  if (!(in >> key) || key != "layer_dims") fail_parse("expected layer_dims");
  {
    std::string rest;
    std::getline(in, rest);
    std::istringstream dims(rest);
    int d;
    while (dims >> d) net.layer_dims.push_back(d);
    if (net.layer_dims.size() < 2) fail_parse("layer_dims too short");
  }
  std::string name;
  if (!(in >> key >> name) || key != "hidden_activation")
    fail_parse("expected hidden_activation");
  net.hidden_activation = activation_from_name(name);
  if (!(in >> key >> name) || key != "output_activation")
    fail_parse("expected output_activation");
  net.output_activation = activation_from_name(name);
  if (!(in >> key >> net.output_scale) || key != "output_scale")
    fail_parse("expected output_scale");

  const int layers = static_cast<int>(net.layer_dims.size()) - 1;
  net.weights.resize(layers);
  net.biases.resize(layers);
  for (int l = 0; l < layers; ++l) {
    int index, rows, cols;
    if (!(in >> key >> index >> rows >> cols) || key != "weights" || index != l)
      fail_parse("expected weights block");
    if (rows != net.layer_dims[l + 1] || cols != net.layer_dims[l])
      fail_parse("weight shape does not match layer_dims");
    Eigen::MatrixXd w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        if (!(in >> w(i, j))) fail_parse("truncated weight data");
    net.weights[l] = std::move(w);

    int size;
    if (!(in >> key >> index >> size) || key != "biases" || index != l)
      fail_parse("expected biases block");
    if (size != net.layer_dims[l + 1]) fail_parse("bias size does not match layer_dims");
    Eigen::VectorXd b(size);
    for (int i = 0; i < size; ++i)
      if (!(in >> b(i))) fail_parse("truncated bias data");
    net.biases[l] = std::move(b);
  }
  return net;
}

Mlp load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("load_checkpoint: cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace socrl
