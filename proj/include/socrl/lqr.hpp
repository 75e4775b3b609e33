#pragma once

#include <Eigen/Dense>

#include "socrl/ekf.hpp"

namespace socrl {

/// Fixed point of the discounted Riccati recursion together with the
/// feedback gain in the u = K x convention (K carries the minus sign).
struct RiccatiSolution {
  Eigen::MatrixXd P;  // cost-to-go, symmetric PSD
  Eigen::MatrixXd K;  // r_u x r_x
  double residual = 0.0;
  int iterations = 0;
};

/// Iterates P <- Q + g A^T P A - g^2 A^T P B (R + g B^T P B)^-1 B^T P A
/// from P0 = Q until the max-norm step falls below tol, then sets
///   K = -g (R + g B^T P B)^-1 B^T P A.
/// Equivalent to the undiscounted problem on (sqrt(g) A, sqrt(g) B).
/// Throws ConvergenceFailure when max_iter is exhausted.
RiccatiSolution solve_discounted_riccati(const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& b,
                                         const Eigen::MatrixXd& q,
                                         const Eigen::MatrixXd& r, double gamma,
                                         double tol = 1e-12, int max_iter = 10000);

/// Certainty-equivalence control: clamp(K * mean, bounds). The
/// covariance of the belief is ignored entirely.
Eigen::VectorXd lqg_policy(const RiccatiSolution& sol, const InformationState& state,
                           const Eigen::VectorXd& input_lower,
                           const Eigen::VectorXd& input_upper);

}  // namespace socrl
