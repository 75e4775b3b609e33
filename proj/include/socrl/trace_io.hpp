#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "socrl/harness.hpp"

namespace socrl {

/// 17-significant-digit rendering (%.17g), enough to round-trip a
/// double exactly. All exported numbers go through this.
std::string format_17g(double value);

/// Episode trace as CSV. A short `#` preamble carries the policy label,
/// seed, and the initial covariance so the file is self-contained for
/// replay; data columns are
///   step, x1..x{r_x}, xhat1..xhat{r_x}, cov_trace, u, y, reward
/// (u and y gain indices only when their dimension exceeds one).
void write_trace_csv(std::ostream& os, const EpisodeTrace& trace);
void write_trace_csv(const std::string& path, const EpisodeTrace& trace);

/// Inverse of write_trace_csv. Dimensions are inferred from the header.
EpisodeTrace read_trace_csv(std::istream& is);
EpisodeTrace read_trace_csv(const std::string& path);

/// Per-episode return curve: episode, return, normalized_return.
void write_return_csv(std::ostream& os, std::span<const double> returns,
                      std::span<const double> normalized);
void write_return_csv(const std::string& path, std::span<const double> returns,
                      std::span<const double> normalized);

/// Reads the two value columns back.
void read_return_csv(std::istream& is, std::vector<double>& returns,
                     std::vector<double>& normalized);

/// ComparisonReport as structured text (deterministic, no timestamps).
void write_comparison_report(std::ostream& os, const ComparisonReport& report);

/// One summary row per episode for one side of a comparison:
///   episode, seed, peak_cov_trace, return, divergent, first_crossing
void write_episode_summary_csv(std::ostream& os, const PolicySummary& summary);
void write_episode_summary_csv(const std::string& path, const PolicySummary& summary);

/// Feeds the recorded controls and outputs back through the filter and
/// returns the largest absolute deviation of the reproduced estimates
/// and covariance traces from the recorded ones.
double replay_max_error(const PlantModel& model, const EpisodeTrace& trace);

}  // namespace socrl
