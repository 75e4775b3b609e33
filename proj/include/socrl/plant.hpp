#pragma once

#include <Eigen/Dense>
#include <functional>

#include "socrl/rng.hpp"

namespace socrl {

/// A partially observed nonlinear plant
///
///   x' = dynamics(x, u) + w,   w ~ N(0, process_cov)
///   y  = observation(x) + v,   v ~ N(0, measurement_cov)
///
/// with analytic Jacobians and box input bounds. Immutable after
/// construction; safe to share across threads. Custom plants plug in
/// through the same record, which keeps the filter and the agent
/// plant-agnostic.
struct PlantModel {
  int state_dim = 0;
  int input_dim = 0;
  int output_dim = 0;

  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> dynamics;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> observation;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> dynamics_jacobian;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> observation_jacobian;

  Eigen::MatrixXd process_cov;      // r_x x r_x
  Eigen::MatrixXd measurement_cov;  // r_y x r_y
  Eigen::VectorXd input_lower;      // r_u
  Eigen::VectorXd input_upper;      // r_u
};

/// Exponential linear unit: e^z - 1 for z < 0, z for z >= 0.
double elu(double z);

/// Derivative of elu; the value at 0 is taken as 1 (right-continuous).
double elu_prime(double z);

/// Checks shape consistency, SPD noise covariances and ordered bounds.
/// Throws ContractViolation on failure.
void validate(const PlantModel& model);

/// The three-state benchmark system: stable upper-triangular linear
/// dynamics with a cubic-ELU output nonlinearity whose sensitivity
/// vanishes for x1 < 0, i.e. the plant loses observability on the
/// negative side of the first state.
PlantModel example_plant();

/// Linear-Gaussian plant x' = Ax + Bu + w, y = Cx + v.
PlantModel linear_plant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const Eigen::MatrixXd& c, const Eigen::MatrixXd& process_cov,
                        const Eigen::MatrixXd& measurement_cov,
                        const Eigen::VectorXd& input_lower,
                        const Eigen::VectorXd& input_upper);

/// One step of the true plant: dynamics(x, u) + w.
Eigen::VectorXd step_truth(const PlantModel& model, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, Rng& rng);

/// One noisy measurement: observation(x) + v.
Eigen::VectorXd observe(const PlantModel& model, const Eigen::VectorXd& x, Rng& rng);

/// Elementwise clamp of u to the plant's input bounds.
Eigen::VectorXd clamp_input(const PlantModel& model, const Eigen::VectorXd& u);

}  // namespace socrl
