#pragma once

#include <Eigen/Dense>

#include "socrl/plant.hpp"

namespace socrl {

/// Filtered belief (x_hat_{k|k}, Sigma_{k|k}). This pair is the state
/// the learning agent operates on. Covariances are kept symmetric PSD
/// by the update operations.
struct InformationState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// One-step-ahead prediction (x_hat_{k+1|k}, Sigma_{k+1|k}).
struct PredictedState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Symmetrizes M; if the minimum eigenvalue of the symmetric part falls
/// below 1e-12, shifts the diagonal so it lands at 1e-12. Idempotent on
/// compliant inputs.
Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& m);

/// EKF prediction: mean = f(x_hat, u), cov = F Sigma F^T + Sigma_w,
/// with F the dynamics Jacobian at (x_hat, u). Result is symmetrized.
PredictedState time_update(const PlantModel& model, const InformationState& state,
                           const Eigen::VectorXd& u);

/// EKF correction with gain L = Sigma H^T (H Sigma H^T + Sigma_v)^-1,
/// H linearized at the predicted mean. Covariance Sigma - L H Sigma is
/// symmetrized and PSD-repaired. The innovation covariance is solved
/// through an LLT factorization rather than an explicit inverse.
InformationState measurement_update(const PlantModel& model, const PredictedState& pred,
                                    const Eigen::VectorXd& y);

/// Full filter step: measurement_update(time_update(state, u), y_next).
InformationState propagate(const PlantModel& model, const InformationState& state,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& y_next);

/// Feature length r_x + r_x (r_x + 1) / 2 of a vectorized state.
int feature_dim(int state_dim);

/// Mean entries followed by the upper triangle of the covariance in
/// row-major order. For a 3-state plant this is a 9-vector.
Eigen::VectorXd vectorize(const InformationState& state);

/// Inverse of vectorize; reconstructs the symmetric covariance.
InformationState devectorize(const Eigen::VectorXd& features, int state_dim);

}  // namespace socrl
