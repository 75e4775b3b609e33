#include "socrl/rng.hpp"

#include <cmath>

#include "socrl/errors.hpp"

namespace socrl {

double Rng::uniform() {
  // 53-bit mantissa from the top bits of the 64-bit word.
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Eigen::VectorXd Rng::gaussian_vector(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = gaussian();
  return v;
}

Eigen::VectorXd Rng::gaussian_vector(const Eigen::MatrixXd& cov) {
  return psd_sqrt_factor(cov) * gaussian_vector(static_cast<int>(cov.rows()));
}

std::uint64_t Rng::integer(std::uint64_t n) {
  // Rejection sampling for an unbiased result.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw NumericalFailure("psd_sqrt_factor: non-finite matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("psd_sqrt_factor: eigendecomposition failed");
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal();
}

}  // namespace socrl
