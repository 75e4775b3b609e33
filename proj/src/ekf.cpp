#include "socrl/ekf.hpp"

#include <Eigen/Cholesky>

#include "socrl/errors.hpp"

namespace socrl {

namespace {
constexpr double kEigFloor = 1e-12;
}

Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw NumericalFailure("psd_repair: non-finite entries");
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("psd_repair: eigendecomposition failed");
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < kEigFloor)
    sym += (kEigFloor - min_eig) * Eigen::MatrixXd::Identity(sym.rows(), sym.cols());
  return sym;
}

PredictedState time_update(const PlantModel& model, const InformationState& state,
                           const Eigen::VectorXd& u) {
  if (state.mean.size() != model.state_dim || u.size() != model.input_dim)
    throw ContractViolation("time_update: dimension mismatch");
  const Eigen::MatrixXd f_jac = model.dynamics_jacobian(state.mean, u);
  PredictedState pred;
  pred.mean = model.dynamics(state.mean, u);
  Eigen::MatrixXd cov = f_jac * state.cov * f_jac.transpose() + model.process_cov;
  pred.cov = 0.5 * (cov + cov.transpose());
  if (!pred.mean.allFinite() || !pred.cov.allFinite())
    throw NumericalFailure("time_update: non-finite result");
  return pred;
}

InformationState measurement_update(const PlantModel& model, const PredictedState& pred,
                                    const Eigen::VectorXd& y) {
  if (pred.mean.size() != model.state_dim || y.size() != model.output_dim)
    throw ContractViolation("measurement_update: dimension mismatch");
  const Eigen::MatrixXd h_jac = model.observation_jacobian(pred.mean);
  const Eigen::MatrixXd innovation_cov =
      h_jac * pred.cov * h_jac.transpose() + model.measurement_cov;
  Eigen::LLT<Eigen::MatrixXd> llt(innovation_cov);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("measurement_update: singular innovation covariance");
  // L = Sigma H^T S^-1, computed as (S^-1 H Sigma)^T since S is symmetric.
  const Eigen::MatrixXd gain = llt.solve(h_jac * pred.cov).transpose();

  InformationState state;
  state.mean = pred.mean + gain * (y - model.observation(pred.mean));
  state.cov = psd_repair(pred.cov - gain * h_jac * pred.cov);
  if (!state.mean.allFinite())
    throw NumericalFailure("measurement_update: non-finite mean");
  return state;
}

InformationState propagate(const PlantModel& model, const InformationState& state,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& y_next) {
  return measurement_update(model, time_update(model, state, u), y_next);
}

int feature_dim(int state_dim) { return state_dim + state_dim * (state_dim + 1) / 2; }

Eigen::VectorXd vectorize(const InformationState& state) {
  const int n = static_cast<int>(state.mean.size());
  Eigen::VectorXd features(feature_dim(n));
  features.head(n) = state.mean;
  int k = n;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) features(k++) = state.cov(i, j);
  return features;
}

InformationState devectorize(const Eigen::VectorXd& features, int state_dim) {
  if (features.size() != feature_dim(state_dim))
    throw ContractViolation("devectorize: feature length mismatch");
  InformationState state;
  state.mean = features.head(state_dim);
  state.cov.resize(state_dim, state_dim);
  int k = state_dim;
  for (int i = 0; i < state_dim; ++i)
    for (int j = i; j < state_dim; ++j) {
      state.cov(i, j) = features(k);
      state.cov(j, i) = features(k);
      ++k;
    }
  return state;
}

}  // namespace socrl
