#include "socrl/lqr.hpp"

#include <Eigen/Cholesky>

#include "socrl/errors.hpp"

namespace socrl {

RiccatiSolution solve_discounted_riccati(const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& b,
                                         const Eigen::MatrixXd& q,
                                         const Eigen::MatrixXd& r, double gamma,
                                         double tol, int max_iter) {
  const auto n = a.rows();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != b.cols() || r.cols() != b.cols())
    throw ContractViolation("riccati: inconsistent shapes");
  if (!(tol > 0.0) || !(gamma > 0.0))
    throw ContractViolation("riccati: tol and gamma must be positive");

  auto step = [&](const Eigen::MatrixXd& p) {
    const Eigen::MatrixXd bpa = b.transpose() * p * a;
    Eigen::LLT<Eigen::MatrixXd> llt(r + gamma * b.transpose() * p * b);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("riccati: R + g B^T P B not positive definite");
    Eigen::MatrixXd next =
        q + gamma * a.transpose() * p * a -
        gamma * gamma * a.transpose() * p * b * llt.solve(bpa);
    return Eigen::MatrixXd(0.5 * (next + next.transpose()));
  };

  RiccatiSolution sol;
  Eigen::MatrixXd p = 0.5 * (q + q.transpose());
  double residual = std::numeric_limits<double>::infinity();
  int i = 0;
  for (; i < max_iter; ++i) {
    Eigen::MatrixXd next = step(p);
    residual = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    if (residual < tol) break;
  }
  if (residual >= tol)
    throw ConvergenceFailure("riccati: fixed-point iteration did not converge",
                             residual, max_iter);
  sol.P = p;
  sol.residual = residual;
  sol.iterations = i + 1;
  Eigen::LLT<Eigen::MatrixXd> llt(r + gamma * b.transpose() * p * b);
  sol.K = -gamma * llt.solve(b.transpose() * p * a);
  return sol;
}

Eigen::VectorXd lqg_policy(const RiccatiSolution& sol, const InformationState& state,
                           const Eigen::VectorXd& input_lower,
                           const Eigen::VectorXd& input_upper) {
  if (state.mean.size() != sol.K.cols())
    throw ContractViolation("lqg_policy: dimension mismatch");
  Eigen::VectorXd u = sol.K * state.mean;
  return u.cwiseMax(input_lower).cwiseMin(input_upper);
}

}  // namespace socrl
