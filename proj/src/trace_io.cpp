#include "socrl/trace_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "socrl/errors.hpp"

namespace socrl {

std::string format_17g(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ContractViolation("cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ContractViolation("cannot open " + path + " for reading");
  return is;
}

void append_names(std::ostream& os, const std::string& stem, int n) {
  if (n == 1) {
    os << ',' << stem;
  } else {
    for (int i = 1; i <= n; ++i) os << ',' << stem << i;
  }
}

double parse_double(const std::string& token, int line) {
  const char* begin = token.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ContractViolation("bad numeric field '" + token + "' on line " +
                            std::to_string(line));
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

void write_trace_csv(std::ostream& os, const EpisodeTrace& trace) {
  if (trace.steps() == 0) throw ContractViolation("refusing to export an empty trace");
  if (trace.policy_label.find('\n') != std::string::npos)
    throw ContractViolation("policy label must be a single line");
  const int r_x = static_cast<int>(trace.true_state[0].size());
  const int r_u = static_cast<int>(trace.control[0].size());
  const int r_y = static_cast<int>(trace.output[0].size());

  os << "# policy: " << trace.policy_label << '\n';
  os << "# seed: " << trace.seed << '\n';
  os << "# initial_cov:";
  for (int i = 0; i < r_x; ++i)
    for (int j = 0; j < r_x; ++j) os << ' ' << format_17g(trace.initial_cov(i, j));
  os << '\n';
  if (trace.truncated) os << "# truncated_at: " << trace.failure_step << '\n';

  os << "step";
  append_names(os, "x", r_x);
  append_names(os, "xhat", r_x);
  os << ",cov_trace";
  append_names(os, "u", r_u);
  append_names(os, "y", r_y);
  os << ",reward\n";

  for (int k = 0; k < trace.steps(); ++k) {
    os << k;
    for (int i = 0; i < r_x; ++i) os << ',' << format_17g(trace.true_state[k](i));
    for (int i = 0; i < r_x; ++i) os << ',' << format_17g(trace.estimate[k](i));
    os << ',' << format_17g(trace.cov_trace[k]);
    for (int i = 0; i < r_u; ++i) os << ',' << format_17g(trace.control[k](i));
    for (int i = 0; i < r_y; ++i) os << ',' << format_17g(trace.output[k](i));
    os << ',' << format_17g(trace.reward[k]) << '\n';
  }
}

void write_trace_csv(const std::string& path, const EpisodeTrace& trace) {
  auto os = open_out(path);
  write_trace_csv(os, trace);
}

namespace {

int count_prefixed(const std::vector<std::string>& names, std::size_t from,
                   const std::string& stem) {
  // accepts either a single bare "stem" column or "stem1..stemN"
  if (from < names.size() && names[from] == stem) return 1;
  int n = 0;
  while (from + n < names.size() &&
         names[from + n] == stem + std::to_string(n + 1))
    ++n;
  return n;
}

}  // namespace

EpisodeTrace read_trace_csv(std::istream& is) {
  EpisodeTrace trace;
  std::string line;
  int line_no = 0;
  bool have_cov = false;
  std::vector<double> cov_entries;

  // preamble
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] != '#') break;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(1, colon - 1);
    std::string value = line.substr(colon + 1);
    while (!key.empty() && key.front() == ' ') key.erase(key.begin());
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    if (key == "policy") {
      trace.policy_label = value;
    } else if (key == "seed") {
      trace.seed = std::strtoull(value.c_str(), nullptr, 10);
    } else if (key == "initial_cov") {
      std::istringstream vs(value);
      double v;
      while (vs >> v) cov_entries.push_back(v);
      have_cov = true;
    } else if (key == "truncated_at") {
      trace.truncated = true;
      trace.failure_step = std::strtol(value.c_str(), nullptr, 10);
    }
  }
  if (!is && line.empty()) throw ContractViolation("trace file has no header row");

  // header
  std::vector<std::string> names = split(line, ',');
  if (names.empty() || names[0] != "step")
    throw ContractViolation("trace header must start with 'step' (line " +
                            std::to_string(line_no) + ")");
  std::size_t pos = 1;
  int r_x = count_prefixed(names, pos, "x");
  pos += r_x;
  int n_hat = count_prefixed(names, pos, "xhat");
  pos += n_hat;
  if (r_x == 0 || n_hat != r_x || pos >= names.size() || names[pos] != "cov_trace")
    throw ContractViolation("malformed trace header (line " + std::to_string(line_no) +
                            ")");
  ++pos;
  int r_u = count_prefixed(names, pos, "u");
  pos += r_u;
  int r_y = count_prefixed(names, pos, "y");
  pos += r_y;
  if (r_u == 0 || r_y == 0 || pos + 1 != names.size() || names[pos] != "reward")
    throw ContractViolation("malformed trace header (line " + std::to_string(line_no) +
                            ")");

  if (!have_cov || cov_entries.size() != static_cast<std::size_t>(r_x * r_x))
    throw ContractViolation("trace preamble lacks a full initial_cov");
  trace.initial_cov.resize(r_x, r_x);
  for (int i = 0; i < r_x; ++i)
    for (int j = 0; j < r_x; ++j) trace.initial_cov(i, j) = cov_entries[i * r_x + j];

  const std::size_t n_fields = names.size();
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() != n_fields)
      throw ContractViolation("expected " + std::to_string(n_fields) +
                              " fields on line " + std::to_string(line_no));
    long step = std::strtol(fields[0].c_str(), nullptr, 10);
    if (step != trace.steps())
      throw ContractViolation("non-consecutive step index on line " +
                              std::to_string(line_no));
    std::size_t f = 1;
    Eigen::VectorXd x(r_x), xhat(r_x), u(r_u), y(r_y);
    for (int i = 0; i < r_x; ++i) x(i) = parse_double(fields[f++], line_no);
    for (int i = 0; i < r_x; ++i) xhat(i) = parse_double(fields[f++], line_no);
    double cov_trace = parse_double(fields[f++], line_no);
    for (int i = 0; i < r_u; ++i) u(i) = parse_double(fields[f++], line_no);
    for (int i = 0; i < r_y; ++i) y(i) = parse_double(fields[f++], line_no);
    double reward = parse_double(fields[f++], line_no);
    trace.true_state.push_back(std::move(x));
    trace.estimate.push_back(std::move(xhat));
    trace.cov_trace.push_back(cov_trace);
    trace.control.push_back(std::move(u));
    trace.output.push_back(std::move(y));
    trace.reward.push_back(reward);
  }
  if (trace.steps() == 0) throw ContractViolation("trace file has no data rows");
  trace.initial_mean = trace.estimate[0];
  return trace;
}

EpisodeTrace read_trace_csv(const std::string& path) {
  auto is = open_in(path);
  return read_trace_csv(is);
}

void write_return_csv(std::ostream& os, std::span<const double> returns,
                      std::span<const double> normalized) {
  if (returns.size() != normalized.size())
    throw ContractViolation("return and normalized curves differ in length");
  os << "episode,return,normalized_return\n";
  for (std::size_t e = 0; e < returns.size(); ++e)
    os << e << ',' << format_17g(returns[e]) << ',' << format_17g(normalized[e])
       << '\n';
}

void write_return_csv(const std::string& path, std::span<const double> returns,
                      std::span<const double> normalized) {
  auto os = open_out(path);
  write_return_csv(os, returns, normalized);
}

void read_return_csv(std::istream& is, std::vector<double>& returns,
                     std::vector<double>& normalized) {
  returns.clear();
  normalized.clear();
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 || line.rfind("episode,", 0) == 0) {
      if (line != "episode,return,normalized_return")
        throw ContractViolation("unexpected return-curve header");
      continue;
    }
    auto fields = split(line, ',');
    if (fields.size() != 3)
      throw ContractViolation("expected 3 fields on line " + std::to_string(line_no));
    returns.push_back(parse_double(fields[1], line_no));
    normalized.push_back(parse_double(fields[2], line_no));
  }
}

void write_comparison_report(std::ostream& os, const ComparisonReport& report) {
  os << "comparison\n";
  os << "episodes: " << report.episodes << '\n';
  os << "steps: " << report.steps << '\n';
  os << "base_seed: " << report.base_seed << '\n';
  os << "divergence_threshold: " << format_17g(report.divergence_threshold) << '\n';
  for (const PolicySummary* side : {&report.first, &report.second}) {
    os << '\n';
    os << "policy: " << side->label << '\n';
    os << "  median_peak_cov_trace: " << format_17g(side->median_peak_cov_trace)
       << '\n';
    os << "  max_peak_cov_trace: " << format_17g(side->max_peak_cov_trace) << '\n';
    os << "  divergent_fraction: " << format_17g(side->divergent_fraction) << '\n';
    os << "  mean_return: " << format_17g(side->mean_return) << '\n';
  }
}

void write_episode_summary_csv(std::ostream& os, const PolicySummary& summary) {
  os << "episode,seed,peak_cov_trace,return,divergent,first_crossing\n";
  for (std::size_t e = 0; e < summary.episodes.size(); ++e) {
    const EpisodeSummary& ep = summary.episodes[e];
    os << e << ',' << ep.seed << ',' << format_17g(ep.peak_cov_trace) << ','
       << format_17g(ep.discounted_return) << ',' << (ep.divergent ? 1 : 0) << ','
       << ep.first_crossing << '\n';
  }
}

void write_episode_summary_csv(const std::string& path, const PolicySummary& summary) {
  auto os = open_out(path);
  write_episode_summary_csv(os, summary);
}

double replay_max_error(const PlantModel& model, const EpisodeTrace& trace) {
  double worst = 0.0;
  InformationState belief{trace.initial_mean, trace.initial_cov};
  for (int k = 0; k + 1 < trace.steps(); ++k) {
    belief = propagate(model, belief, trace.control[k], trace.output[k]);
    worst = std::max(worst,
                     (belief.mean - trace.estimate[k + 1]).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(belief.cov.trace() - trace.cov_trace[k + 1]));
  }
  return worst;
}

}  // namespace socrl
