#include "socrl/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "socrl/errors.hpp"
#include "socrl/trace_io.hpp"

namespace socrl {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> whitespace_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& value, int line) {
  const char* begin = value.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (value.empty() || end == begin || *end != '\0')
    throw ConfigError("expected a number, got '" + value + "'", line);
  return v;
}

long to_long(const std::string& value, int line) {
  const char* begin = value.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (value.empty() || end == begin || *end != '\0')
    throw ConfigError("expected an integer, got '" + value + "'", line);
  return v;
}

std::uint64_t to_u64(const std::string& value, int line) {
  if (value.empty() || value[0] == '-')
    throw ConfigError("expected a nonnegative integer, got '" + value + "'", line);
  const char* begin = value.c_str();
  char* end = nullptr;
  std::uint64_t v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw ConfigError("expected a nonnegative integer, got '" + value + "'", line);
  return v;
}

bool to_bool(const std::string& value, int line) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("expected true or false, got '" + value + "'", line);
}

Eigen::VectorXd to_vector(const std::string& value, int line) {
  auto toks = whitespace_tokens(value);
  if (toks.empty()) throw ConfigError("expected a vector of numbers", line);
  Eigen::VectorXd v(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) v(i) = to_double(toks[i], line);
  return v;
}

// 'diag d1 d2 ...' or 'r11 r12 ; r21 r22'; a bare list is one row
Eigen::MatrixXd to_matrix(const std::string& value, int line) {
  auto toks = whitespace_tokens(value);
  if (!toks.empty() && toks[0] == "diag") {
    if (toks.size() < 2) throw ConfigError("diag needs at least one entry", line);
    Eigen::VectorXd d(toks.size() - 1);
    for (std::size_t i = 1; i < toks.size(); ++i) d(i - 1) = to_double(toks[i], line);
    return d.asDiagonal();
  }
  std::vector<Eigen::VectorXd> rows;
  std::size_t start = 0;
  std::string s = value;
  for (;;) {
    std::size_t pos = s.find(';', start);
    std::string piece =
        pos == std::string::npos ? s.substr(start) : s.substr(start, pos - start);
    rows.push_back(to_vector(trim(piece), line));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw ConfigError("matrix rows have unequal lengths", line);
    m.row(i) = rows[i].transpose();
  }
  return m;
}

std::string vector_text(const Eigen::VectorXd& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_17g(v(i));
  }
  return out;
}

std::string matrix_text(const Eigen::MatrixXd& m) {
  std::string out;
  for (int i = 0; i < m.rows(); ++i) {
    if (i) out += " ; ";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out += ' ';
      out += format_17g(m(i, j));
    }
  }
  return out;
}

void apply_plant(PlantConfig& plant, const std::string& key, const std::string& value,
                 int line) {
  if (key == "type") {
    if (value != "example" && value != "linear" && value != "elu_cubic")
      throw ConfigError("plant type must be example, linear, or elu_cubic", line);
    plant.type = value;
  } else if (key == "a") {
    plant.a = to_matrix(value, line);
  } else if (key == "b") {
    plant.b = to_matrix(value, line);
  } else if (key == "c") {
    plant.c = to_matrix(value, line);
  } else if (key == "obs_scale") {
    plant.obs_scale = to_double(value, line);
  } else if (key == "obs_index") {
    plant.obs_index = static_cast<int>(to_long(value, line));
  } else if (key == "process_cov") {
    plant.process_cov = to_matrix(value, line);
  } else if (key == "measurement_cov") {
    plant.measurement_cov = to_matrix(value, line);
  } else if (key == "input_lower") {
    plant.input_lower = to_vector(value, line);
  } else if (key == "input_upper") {
    plant.input_upper = to_vector(value, line);
  } else {
    throw ConfigError("unknown key '" + key + "' in [plant]", line);
  }
}

void apply_cost(CostWeights& cost, const std::string& key, const std::string& value,
                int line) {
  if (key == "q") {
    cost.Q = to_matrix(value, line);
  } else if (key == "r") {
    cost.R = to_matrix(value, line);
  } else if (key == "gamma") {
    cost.gamma = to_double(value, line);
  } else {
    throw ConfigError("unknown key '" + key + "' in [cost]", line);
  }
}

void apply_ddpg(DdpgConfig& ddpg, const std::string& key, const std::string& value,
                int line) {
  if (key == "minibatch_size") {
    ddpg.minibatch_size = static_cast<int>(to_long(value, line));
  } else if (key == "exploration_std_initial") {
    ddpg.exploration_std_initial = to_double(value, line);
  } else if (key == "exploration_std_final") {
    ddpg.exploration_std_final = to_double(value, line);
  } else if (key == "episodes") {
    ddpg.episodes = static_cast<int>(to_long(value, line));
  } else if (key == "steps_per_episode") {
    ddpg.steps_per_episode = static_cast<int>(to_long(value, line));
  } else if (key == "buffer_capacity") {
    ddpg.buffer_capacity = static_cast<int>(to_long(value, line));
  } else if (key == "actor_lr") {
    ddpg.actor_lr = to_double(value, line);
  } else if (key == "critic_lr") {
    ddpg.critic_lr = to_double(value, line);
  } else if (key == "use_target_networks") {
    ddpg.use_target_networks = to_bool(value, line);
  } else if (key == "target_mix_rate") {
    ddpg.target_mix_rate = to_double(value, line);
  } else if (key == "hidden_size") {
    ddpg.hidden_size = static_cast<int>(to_long(value, line));
  } else if (key == "grad_clip") {
    ddpg.grad_clip = to_double(value, line);
  } else {
    throw ConfigError("unknown key '" + key + "' in [ddpg]", line);
  }
}

void apply_run(RunConfig& cfg, const std::string& key, const std::string& value,
               int line) {
  if (key == "seed") {
    cfg.seed = to_u64(value, line);
  } else if (key == "trials") {
    cfg.trials = static_cast<int>(to_long(value, line));
  } else if (key == "eval_episodes") {
    cfg.eval_episodes = static_cast<int>(to_long(value, line));
  } else if (key == "eval_steps") {
    cfg.eval_steps = static_cast<int>(to_long(value, line));
  } else if (key == "divergence_threshold") {
    cfg.divergence_threshold = to_double(value, line);
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else if (key == "checkpoint") {
    cfg.checkpoint = value;
  } else if (key == "write_traces") {
    cfg.write_traces = to_bool(value, line);
  } else {
    throw ConfigError("unknown key '" + key + "' in [run]", line);
  }
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    if (stripped[0] == '[') {
      if (stripped.back() != ']')
        throw ConfigError("unterminated section header", line_no);
      section = stripped.substr(1, stripped.size() - 2);
      if (section != "plant" && section != "cost" && section != "ddpg" &&
          section != "run")
        throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'", line_no);
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (section.empty())
      throw ConfigError("key '" + key + "' outside any section", line_no);
    if (section == "plant") {
      apply_plant(cfg.plant, key, value, line_no);
    } else if (section == "cost") {
      apply_cost(cfg.cost, key, value, line_no);
    } else if (section == "ddpg") {
      apply_ddpg(cfg.ddpg, key, value, line_no);
    } else {
      apply_run(cfg, key, value, line_no);
    }
  }
  finalize_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  return parse_config(is);
}

RunConfig default_config() {
  RunConfig cfg;
  finalize_config(cfg);
  return cfg;
}

PlantModel build_plant(const PlantConfig& plant) {
  if (plant.type == "example") return example_plant();
  if (plant.type == "linear")
    return linear_plant(plant.a, plant.b, plant.c, plant.process_cov,
                        plant.measurement_cov, plant.input_lower, plant.input_upper);

  // elu_cubic: linear dynamics, y = obs_scale * elu(x_i^3)
  const int r_x = static_cast<int>(plant.a.rows());
  const int idx = plant.obs_index - 1;
  PlantModel model;
  model.state_dim = r_x;
  model.input_dim = static_cast<int>(plant.b.cols());
  model.output_dim = 1;
  Eigen::MatrixXd a = plant.a;
  Eigen::MatrixXd b = plant.b;
  double scale = plant.obs_scale;
  model.dynamics = [a, b](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return (a * x + b * u).eval();
  };
  model.dynamics_jacobian = [a](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return a;
  };
  model.observation = [scale, idx](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(1);
    double c = x(idx) * x(idx) * x(idx);
    y(0) = scale * elu(c);
    return y;
  };
  model.observation_jacobian = [scale, idx, r_x](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, r_x);
    double c = x(idx) * x(idx) * x(idx);
    h(0, idx) = scale * 3.0 * x(idx) * x(idx) * elu_prime(c);
    return h;
  };
  model.process_cov = plant.process_cov;
  model.measurement_cov = plant.measurement_cov;
  model.input_lower = plant.input_lower;
  model.input_upper = plant.input_upper;
  validate(model);
  return model;
}

void finalize_config(RunConfig& cfg) {
  PlantConfig& plant = cfg.plant;
  auto unset = [](const Eigen::MatrixXd& m) { return m.size() == 0; };

  if (plant.type == "example") {
    require(unset(plant.a) && unset(plant.b) && unset(plant.c) &&
                unset(plant.process_cov) && unset(plant.measurement_cov) &&
                plant.input_lower.size() == 0 && plant.input_upper.size() == 0,
            "plant type 'example' takes no structural keys");
  } else {
    require(!unset(plant.a), "[plant] a is required for custom plants");
    require(!unset(plant.b), "[plant] b is required for custom plants");
    require(!unset(plant.process_cov), "[plant] process_cov is required");
    require(!unset(plant.measurement_cov), "[plant] measurement_cov is required");
    require(plant.input_lower.size() > 0, "[plant] input_lower is required");
    require(plant.input_upper.size() > 0, "[plant] input_upper is required");
    if (plant.type == "linear") {
      require(!unset(plant.c), "[plant] c is required for linear plants");
    } else {
      require(unset(plant.c), "[plant] c does not apply to elu_cubic plants");
      require(plant.obs_index >= 1 && plant.obs_index <= plant.a.rows(),
              "[plant] obs_index out of range");
      require(std::isfinite(plant.obs_scale) && plant.obs_scale != 0.0,
              "[plant] obs_scale must be finite and nonzero");
      require(plant.measurement_cov.rows() == 1 && plant.measurement_cov.cols() == 1,
              "[plant] elu_cubic plants have a scalar output");
    }
  }

  PlantModel model;
  try {
    model = build_plant(plant);
  } catch (const ContractViolation& err) {
    throw ConfigError(std::string("[plant] ") + err.what());
  }

  if (cfg.cost.Q.size() == 0)
    cfg.cost.Q = Eigen::MatrixXd::Identity(model.state_dim, model.state_dim);
  if (cfg.cost.R.size() == 0)
    cfg.cost.R = Eigen::MatrixXd::Identity(model.input_dim, model.input_dim);
  require(cfg.cost.Q.rows() == model.state_dim && cfg.cost.Q.cols() == model.state_dim,
          "[cost] q must be state_dim x state_dim");
  require(cfg.cost.R.rows() == model.input_dim && cfg.cost.R.cols() == model.input_dim,
          "[cost] r must be input_dim x input_dim");
  try {
    validate(cfg.cost);
  } catch (const ContractViolation& err) {
    throw ConfigError(std::string("[cost] ") + err.what());
  }

  cfg.ddpg.gamma = cfg.cost.gamma;
  try {
    validate(cfg.ddpg);
  } catch (const ContractViolation& err) {
    throw ConfigError(std::string("[ddpg] ") + err.what());
  }

  require(cfg.trials >= 1, "[run] trials must be at least 1");
  require(cfg.eval_episodes >= 1, "[run] eval_episodes must be at least 1");
  require(cfg.eval_steps >= 1, "[run] eval_steps must be at least 1");
  require(cfg.divergence_threshold >= 0.0,
          "[run] divergence_threshold must be nonnegative (0 = automatic)");
  require(!cfg.out_dir.empty(), "[run] out_dir must not be empty");
  if (!cfg.checkpoint.empty())
    require(file_exists(cfg.checkpoint),
            "[run] checkpoint file not found: " + cfg.checkpoint);
}

std::string resolved_text(const RunConfig& cfg) {
  std::ostringstream os;
  os << "[plant]\n";
  os << "type = " << cfg.plant.type << '\n';
  if (cfg.plant.type != "example") {
    os << "a = " << matrix_text(cfg.plant.a) << '\n';
    os << "b = " << matrix_text(cfg.plant.b) << '\n';
    if (cfg.plant.type == "linear") {
      os << "c = " << matrix_text(cfg.plant.c) << '\n';
    } else {
      os << "obs_scale = " << format_17g(cfg.plant.obs_scale) << '\n';
      os << "obs_index = " << cfg.plant.obs_index << '\n';
    }
    os << "process_cov = " << matrix_text(cfg.plant.process_cov) << '\n';
    os << "measurement_cov = " << matrix_text(cfg.plant.measurement_cov) << '\n';
    os << "input_lower = " << vector_text(cfg.plant.input_lower) << '\n';
    os << "input_upper = " << vector_text(cfg.plant.input_upper) << '\n';
  }
  os << '\n';
  os << "[cost]\n";
  os << "q = " << matrix_text(cfg.cost.Q) << '\n';
  os << "r = " << matrix_text(cfg.cost.R) << '\n';
  os << "gamma = " << format_17g(cfg.cost.gamma) << '\n';
  os << '\n';
  os << "[ddpg]\n";
  os << "minibatch_size = " << cfg.ddpg.minibatch_size << '\n';
  os << "exploration_std_initial = " << format_17g(cfg.ddpg.exploration_std_initial)
     << '\n';
  os << "exploration_std_final = " << format_17g(cfg.ddpg.exploration_std_final)
     << '\n';
  os << "episodes = " << cfg.ddpg.episodes << '\n';
  os << "steps_per_episode = " << cfg.ddpg.steps_per_episode << '\n';
  os << "buffer_capacity = " << cfg.ddpg.buffer_capacity << '\n';
  os << "actor_lr = " << format_17g(cfg.ddpg.actor_lr) << '\n';
  os << "critic_lr = " << format_17g(cfg.ddpg.critic_lr) << '\n';
  os << "use_target_networks = " << (cfg.ddpg.use_target_networks ? "true" : "false")
     << '\n';
  os << "target_mix_rate = " << format_17g(cfg.ddpg.target_mix_rate) << '\n';
  os << "hidden_size = " << cfg.ddpg.hidden_size << '\n';
  os << "grad_clip = " << format_17g(cfg.ddpg.grad_clip) << '\n';
  os << '\n';
  os << "[run]\n";
  os << "seed = " << cfg.seed << '\n';
  os << "trials = " << cfg.trials << '\n';
  os << "eval_episodes = " << cfg.eval_episodes << '\n';
  os << "eval_steps = " << cfg.eval_steps << '\n';
  os << "divergence_threshold = " << format_17g(cfg.divergence_threshold) << '\n';
  os << "out_dir = " << cfg.out_dir << '\n';
  os << "checkpoint = " << cfg.checkpoint << '\n';
  os << "write_traces = " << (cfg.write_traces ? "true" : "false") << '\n';
  return os.str();
}

std::string config_hash(const RunConfig& cfg) {
  std::string text = resolved_text(cfg);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(std::ostream& os, const RunConfig& cfg,
                    const std::string& command) {
  char stamp[32] = "unknown";
  std::time_t now = std::time(nullptr);
  std::tm tm_utc;
  if (gmtime_r(&now, &tm_utc) != nullptr)
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  os << "# manifest\n";
  os << "# command: " << command << '\n';
  os << "# format_version: 1\n";
  os << "# config_hash: " << config_hash(cfg) << '\n';
  os << "# generated: " << stamp << '\n';
  os << resolved_text(cfg);
}

}  // namespace socrl
