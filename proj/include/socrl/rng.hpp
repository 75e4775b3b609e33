#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace socrl {

/// Seeded random source. All stochastic code in the library draws from
/// one of these, so a trial is reproducible from its seed alone.
/// Gaussian variates use the Box-Muller transform on top of the
/// mt19937_64 stream, which keeps the draw sequence identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal variate.
  double gaussian();

  /// Vector of n independent standard normal variates.
  Eigen::VectorXd gaussian_vector(int n);

  /// Zero-mean Gaussian vector with the given PSD covariance.
  /// Handles singular covariances (a zero matrix yields a zero draw).
  Eigen::VectorXd gaussian_vector(const Eigen::MatrixXd& cov);

  /// Uniform integer in [0, n).
  std::uint64_t integer(std::uint64_t n);

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Square factor S of a PSD matrix M with S*S^T = M, computed from the
/// eigendecomposition with negative eigenvalues clamped to zero.
Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& m);

}  // namespace socrl
