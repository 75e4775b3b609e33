#pragma once

#include <Eigen/Dense>
#include <span>

#include "socrl/ekf.hpp"
#include "socrl/rng.hpp"

namespace socrl {

/// Quadratic stage-cost weights and discount factor.
struct CostWeights {
  Eigen::MatrixXd Q;   // r_x x r_x, symmetric PSD
  Eigen::MatrixXd R;   // r_u x r_u, symmetric PD
  double gamma = 0.95; // in (0, 1)
};

/// Throws ContractViolation unless Q is symmetric PSD, R symmetric PD
/// and gamma in (0, 1).
void validate(const CostWeights& weights);

/// Expected quadratic stage cost under the current belief:
///   mean^T Q mean + tr(Q cov) + u^T R u.
/// The trace term charges the controller for state uncertainty, which
/// is what rewards probing behavior. Always >= 0.
double stage_cost(const CostWeights& weights, const InformationState& state,
                  const Eigen::VectorXd& u);

/// Negative stage cost; always <= 0.
double reward(const CostWeights& weights, const InformationState& state,
              const Eigen::VectorXd& u);

/// sum_k gamma^k r_k over the sequence.
double discounted_return(const CostWeights& weights, std::span<const double> rewards);

/// Monte-Carlo estimate of E{x^T Q x} for x ~ N(mean, cov). Test oracle
/// for the identity E{x^T Q x} = mean^T Q mean + tr(Q cov); not used on
/// any production path.
double mc_expected_quadratic(const Eigen::MatrixXd& q, const Eigen::VectorXd& mean,
                             const Eigen::MatrixXd& cov, long n_samples, Rng& rng);

}  // namespace socrl
