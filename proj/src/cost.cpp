#include "socrl/cost.hpp"

#include "socrl/errors.hpp"

namespace socrl {

void validate(const CostWeights& weights) {
  auto symmetric = [](const Eigen::MatrixXd& m) {
    return m.rows() == m.cols() &&
           (m - m.transpose()).cwiseAbs().maxCoeff() <=
               1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
  };
  if (!symmetric(weights.Q)) throw ContractViolation("cost: Q must be symmetric");
  if (!symmetric(weights.R)) throw ContractViolation("cost: R must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> q_eig(weights.Q, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> r_eig(weights.R, Eigen::EigenvaluesOnly);
  if (q_eig.eigenvalues().minCoeff() < -1e-12)
    throw ContractViolation("cost: Q must be positive semidefinite");
  if (r_eig.eigenvalues().minCoeff() <= 0.0)
    throw ContractViolation("cost: R must be positive definite");
  if (!(weights.gamma > 0.0 && weights.gamma < 1.0))
    throw ContractViolation("cost: gamma must lie in (0, 1)");
}

double stage_cost(const CostWeights& weights, const InformationState& state,
                  const Eigen::VectorXd& u) {
  if (state.mean.size() != weights.Q.rows() || u.size() != weights.R.rows())
    throw ContractViolation("stage_cost: dimension mismatch");
  const double mean_term = state.mean.dot(weights.Q * state.mean);
  const double trace_term = (weights.Q * state.cov).trace();
  const double input_term = u.dot(weights.R * u);
  return mean_term + trace_term + input_term;
}

double reward(const CostWeights& weights, const InformationState& state,
              const Eigen::VectorXd& u) {
  return -stage_cost(weights, state, u);
}

double discounted_return(const CostWeights& weights, std::span<const double> rewards) {
  double total = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= weights.gamma;
  }
  return total;
}

double mc_expected_quadratic(const Eigen::MatrixXd& q, const Eigen::VectorXd& mean,
                             const Eigen::MatrixXd& cov, long n_samples, Rng& rng) {
  if (n_samples < 1) throw ContractViolation("mc_expected_quadratic: n_samples >= 1");
  const Eigen::MatrixXd factor = psd_sqrt_factor(cov);
  const int n = static_cast<int>(mean.size());
  double acc = 0.0;
  Eigen::VectorXd x(n);
  for (long s = 0; s < n_samples; ++s) {
    x = mean + factor * rng.gaussian_vector(n);
    acc += x.dot(q * x);
  }
  return acc / static_cast<double>(n_samples);
}

}  // namespace socrl
