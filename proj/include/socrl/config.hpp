#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "socrl/cost.hpp"
#include "socrl/ddpg.hpp"
#include "socrl/plant.hpp"

namespace socrl {

/// Plant selection: the built-in benchmark plant, a linear-Gaussian
/// plant (y = C x + v), or a scaled-cubic nonlinearity
/// y = obs_scale * elu(x_i^3) on one state of a linear plant.
struct PlantConfig {
  std::string type = "example";  // example | linear | elu_cubic
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;          // linear only
  double obs_scale = 1.0 / 27.0;  // elu_cubic only
  int obs_index = 1;              // elu_cubic only, 1-based
  Eigen::MatrixXd process_cov;
  Eigen::MatrixXd measurement_cov;
  Eigen::VectorXd input_lower;
  Eigen::VectorXd input_upper;
};

/// Fully resolved run settings. Numeric defaults mirror the benchmark
/// setup; empty cost matrices are filled with identities of the plant's
/// dimensions when the config is finalized.
struct RunConfig {
  PlantConfig plant;
  CostWeights cost;
  DdpgConfig ddpg;

  std::uint64_t seed = 1;
  int trials = 1;
  int eval_episodes = 50;
  int eval_steps = 200;
  double divergence_threshold = 0.0;  // 0 selects the automatic threshold
  std::string out_dir = "out";
  std::string checkpoint;  // optional; must exist when set
  bool write_traces = true;
};

/// Parses the sectioned key = value format ([plant], [cost], [ddpg],
/// [run]); '#' lines are comments, matrices are given as 'row ; row'
/// or 'diag d1 d2 ...'. Unknown sections or keys and malformed values
/// raise ConfigError with the offending line number. The result is
/// finalized (defaults filled, everything validated).
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

/// Default configuration for the built-in plant, already finalized.
RunConfig default_config();

/// Fills dimension-dependent defaults (Q, R, bounds-derived pieces),
/// synchronizes ddpg.gamma with cost.gamma, and validates every field;
/// throws ConfigError on any violation. Called by the parsers.
void finalize_config(RunConfig& cfg);

/// Instantiates the configured plant (validated).
PlantModel build_plant(const PlantConfig& plant);

/// The full configuration as parseable text with every key present,
/// numbers at 17 significant digits. Feeding it back through
/// parse_config reproduces the configuration exactly.
std::string resolved_text(const RunConfig& cfg);

/// FNV-1a 64-bit hash of the resolved text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Manifest: '#' header lines (command, version, config hash,
/// timestamp) followed by the resolved config, so the manifest itself
/// loads as a config. The timestamp is the only non-reproducible line.
void write_manifest(std::ostream& os, const RunConfig& cfg,
                    const std::string& command);

}  // namespace socrl
