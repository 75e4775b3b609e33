#include "socrl/plant.hpp"

#include <cmath>

#include "socrl/errors.hpp"

namespace socrl {

double elu(double z) { return z >= 0.0 ? z : std::expm1(z); }

double elu_prime(double z) { return z >= 0.0 ? 1.0 : std::exp(z); }

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw ContractViolation(msg);
}

bool spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
    return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

void validate(const PlantModel& model) {
  require(model.state_dim > 0 && model.input_dim > 0 && model.output_dim > 0,
          "plant: dimensions must be positive");
  require(static_cast<bool>(model.dynamics) && static_cast<bool>(model.observation) &&
              static_cast<bool>(model.dynamics_jacobian) &&
              static_cast<bool>(model.observation_jacobian),
          "plant: missing function handle");
  require(model.process_cov.rows() == model.state_dim &&
              model.process_cov.cols() == model.state_dim,
          "plant: process_cov shape");
  require(model.measurement_cov.rows() == model.output_dim &&
              model.measurement_cov.cols() == model.output_dim,
          "plant: measurement_cov shape");
  require(spd(model.process_cov), "plant: process_cov must be symmetric positive definite");
  require(spd(model.measurement_cov),
          "plant: measurement_cov must be symmetric positive definite");
  require(model.input_lower.size() == model.input_dim &&
              model.input_upper.size() == model.input_dim,
          "plant: input bound shape");
  require((model.input_lower.array() < model.input_upper.array()).all(),
          "plant: input_lower must be elementwise below input_upper");
}

PlantModel example_plant() {
  PlantModel m;
  m.state_dim = 3;
  m.input_dim = 1;
  m.output_dim = 1;

  Eigen::Matrix3d a;
  a << 0.92, 0.2, -0.1,
       0.0, 0.95, -0.3,
       0.0, 0.0, 0.93;
  Eigen::Vector3d b(0.0, 0.0, 1.0);

  m.dynamics = [a, b](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return Eigen::VectorXd(a * x + b * u(0));
  };
  m.dynamics_jacobian = [a](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::MatrixXd(a);
  };
  m.observation = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(1);
    y(0) = elu(std::pow(x(0), 3)) / 27.0;
    return y;
  };
  m.observation_jacobian = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, 3);
    const double cube = std::pow(x(0), 3);
    h(0, 0) = 3.0 * x(0) * x(0) * elu_prime(cube) / 27.0;
    return h;
  };

  m.process_cov = 0.5 * Eigen::Matrix3d::Identity();
  m.measurement_cov = Eigen::MatrixXd::Constant(1, 1, 0.2);
  m.input_lower = Eigen::VectorXd::Constant(1, -5.0);
  m.input_upper = Eigen::VectorXd::Constant(1, 5.0);
  return m;
}

PlantModel linear_plant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const Eigen::MatrixXd& c, const Eigen::MatrixXd& process_cov,
                        const Eigen::MatrixXd& measurement_cov,
                        const Eigen::VectorXd& input_lower,
                        const Eigen::VectorXd& input_upper) {
  PlantModel m;
  m.state_dim = static_cast<int>(a.rows());
  m.input_dim = static_cast<int>(b.cols());
  m.output_dim = static_cast<int>(c.rows());
  require(a.cols() == a.rows() && b.rows() == a.rows() && c.cols() == a.cols(),
          "linear_plant: inconsistent A/B/C shapes");

  m.dynamics = [a, b](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return Eigen::VectorXd(a * x + b * u);
  };
  m.dynamics_jacobian = [a](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::MatrixXd(a);
  };
  m.observation = [c](const Eigen::VectorXd& x) { return Eigen::VectorXd(c * x); };
  m.observation_jacobian = [c](const Eigen::VectorXd&) { return Eigen::MatrixXd(c); };

  m.process_cov = process_cov;
  m.measurement_cov = measurement_cov;
  m.input_lower = input_lower;
  m.input_upper = input_upper;
  return m;
}

Eigen::VectorXd step_truth(const PlantModel& model, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, Rng& rng) {
  if (x.size() != model.state_dim || u.size() != model.input_dim)
    throw ContractViolation("step_truth: dimension mismatch");
  return model.dynamics(x, u) + rng.gaussian_vector(model.process_cov);
}

Eigen::VectorXd observe(const PlantModel& model, const Eigen::VectorXd& x, Rng& rng) {
  if (x.size() != model.state_dim)
    throw ContractViolation("observe: dimension mismatch");
  return model.observation(x) + rng.gaussian_vector(model.measurement_cov);
}

Eigen::VectorXd clamp_input(const PlantModel& model, const Eigen::VectorXd& u) {
  return u.cwiseMax(model.input_lower).cwiseMin(model.input_upper);
}

}  // namespace socrl
