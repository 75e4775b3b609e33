#include <doctest.h>

#include <Eigen/Dense>
#include <cfloat>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "socrl/config.hpp"
#include "socrl/cost.hpp"
#include "socrl/errors.hpp"
#include "socrl/harness.hpp"
#include "socrl/plant.hpp"
#include "socrl/trace_io.hpp"
#include "test_util.hpp"

using namespace socrl;

namespace {

RunConfig parse_string(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

// line number carried by the ConfigError, or -1 when parsing succeeds
int config_error_line(const std::string& text) {
  try {
    parse_string(text);
  } catch (const ConfigError& err) {
    return err.line;
  }
  return -1;
}

EpisodeTrace example_trace(int steps, std::uint64_t seed) {
  PlantModel m = example_plant();
  CostWeights w{Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(1, 1),
                0.95};
  Rng rng(seed);
  InformationState belief{rng.gaussian_vector(3), Eigen::MatrixXd::Identity(3, 3)};
  Eigen::VectorXd truth = belief.mean + rng.gaussian_vector(3);
  return rollout(m, w, zero_policy(m), belief, truth, steps, rng, "unit", seed);
}

void check_traces_equal(const EpisodeTrace& a, const EpisodeTrace& b) {
  REQUIRE(a.steps() == b.steps());
  CHECK(a.policy_label == b.policy_label);
  CHECK(a.seed == b.seed);
  CHECK(a.truncated == b.truncated);
  CHECK(a.failure_step == b.failure_step);
  CHECK((a.initial_mean - b.initial_mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.initial_cov - b.initial_cov).cwiseAbs().maxCoeff() == 0.0);
  for (int k = 0; k < a.steps(); ++k) {
    CHECK((a.true_state[k] - b.true_state[k]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.estimate[k] - b.estimate[k]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.cov_trace[k] == b.cov_trace[k]);
    CHECK((a.control[k] - b.control[k]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.output[k] - b.output[k]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.reward[k] == b.reward[k]);
  }
}

}  // namespace

TEST_CASE("defaults and round trips") {
  SUBCASE("an empty config equals the defaults") {
    RunConfig cfg = parse_string("");
    CHECK(resolved_text(cfg) == resolved_text(default_config()));
  }
  SUBCASE("defaults describe the benchmark setup") {
    RunConfig cfg = default_config();
    CHECK(cfg.plant.type == "example");
    CHECK(cfg.cost.Q == Eigen::MatrixXd::Identity(3, 3));
    CHECK(cfg.cost.R == Eigen::MatrixXd::Identity(1, 1));
    CHECK(cfg.cost.gamma == 0.95);
    CHECK(cfg.ddpg.gamma == 0.95);
    CHECK(cfg.trials == 1);
    CHECK(cfg.eval_episodes == 50);
    CHECK(cfg.eval_steps == 200);
    CHECK(cfg.divergence_threshold == 0.0);
  }
  SUBCASE("resolved text reparses to itself") {
    RunConfig cfg = default_config();
    RunConfig again = parse_string(resolved_text(cfg));
    CHECK(resolved_text(again) == resolved_text(cfg));
    CHECK(config_hash(again) == config_hash(cfg));
  }
  SUBCASE("comments, blank lines, CRLF and stray spaces are tolerated") {
    RunConfig cfg = parse_string(
        "# leading comment\r\n"
        "\r\n"
        "[run]\r\n"
        "  seed = 42 \r\n"
        "\r\n"
        "[cost]\r\n"
        "gamma = 0.9\r\n");
    CHECK(cfg.seed == 42);
    CHECK(cfg.cost.gamma == 0.9);
    CHECK(cfg.ddpg.gamma == 0.9);  // kept in lockstep with the cost discount
  }
  SUBCASE("the hash is sixteen lowercase hex digits and field-sensitive") {
    RunConfig a = default_config();
    RunConfig b = default_config();
    b.seed = 2;
    std::string ha = config_hash(a);
    CHECK(ha.size() == 16);
    CHECK(ha.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(ha != config_hash(b));
  }
}

TEST_CASE("custom plants build from config text") {
  SUBCASE("linear plant") {
    RunConfig cfg = parse_string(
        "[plant]\n"
        "type = linear\n"
        "a = 0.5 0 ; 0.2 0.3\n"
        "b = 1 0 ; 0 1\n"
        "c = 1 0\n"
        "process_cov = diag 1 1\n"
        "measurement_cov = 0.5\n"
        "input_lower = -2 -2\n"
        "input_upper = 2 2\n"
        "[cost]\n"
        "q = diag 2 2\n"
        "r = diag 0.5 0.5\n"
        "gamma = 0.9\n");
    PlantModel m = build_plant(cfg.plant);
    CHECK(m.state_dim == 2);
    CHECK(m.input_dim == 2);
    CHECK(m.output_dim == 1);
    Eigen::VectorXd x(2), u(2);
    x << 1.0, -2.0;
    u << 0.5, 0.25;
    Eigen::VectorXd next = m.dynamics(x, u);
    CHECK(next(0) == doctest::Approx(0.5 * 1.0 + 0.5).epsilon(1e-15));
    CHECK(next(1) == doctest::Approx(0.2 - 0.6 + 0.25).epsilon(1e-15));
    CHECK(m.observation(x)(0) == 1.0);
    CHECK(cfg.cost.Q(0, 0) == 2.0);
    CHECK(cfg.ddpg.gamma == 0.9);
    RunConfig again = parse_string(resolved_text(cfg));
    CHECK(resolved_text(again) == resolved_text(cfg));
  }
  SUBCASE("scaled-cubic observation plant") {
    RunConfig cfg = parse_string(
        "[plant]\n"
        "type = elu_cubic\n"
        "a = 0.9 0.1 ; 0 0.8\n"
        "b = 0 ; 1\n"
        "obs_scale = 0.25\n"
        "obs_index = 2\n"
        "process_cov = diag 0.5 0.5\n"
        "measurement_cov = 0.2\n"
        "input_lower = -3\n"
        "input_upper = 3\n");
    PlantModel m = build_plant(cfg.plant);
    CHECK(m.state_dim == 2);
    CHECK(m.output_dim == 1);
    Eigen::VectorXd x(2);
    x << 1.5, -2.0;
    double cube = -8.0;
    CHECK(m.observation(x)(0) ==
          doctest::Approx(0.25 * (std::exp(cube) - 1.0)).epsilon(1e-15));
    Eigen::MatrixXd h = m.observation_jacobian(x);
    CHECK(h(0, 0) == 0.0);
    CHECK(h(0, 1) ==
          doctest::Approx(0.25 * 3.0 * 4.0 * std::exp(cube)).epsilon(1e-12));
    // defaults picked up the custom dimensions
    CHECK(cfg.cost.Q == Eigen::MatrixXd::Identity(2, 2));
    CHECK(cfg.cost.R == Eigen::MatrixXd::Identity(1, 1));
    RunConfig again = parse_string(resolved_text(cfg));
    CHECK(resolved_text(again) == resolved_text(cfg));
  }
  SUBCASE("the built-in plant equals its standalone constructor") {
    PlantModel a = build_plant(default_config().plant);
    PlantModel b = example_plant();
    Rng rng(21);
    for (int it = 0; it < 10; ++it) {
      Eigen::VectorXd x = rng.gaussian_vector(3);
      Eigen::VectorXd u = rng.gaussian_vector(1);
      CHECK((a.dynamics(x, u) - b.dynamics(x, u)).cwiseAbs().maxCoeff() == 0.0);
      CHECK((a.observation(x) - b.observation(x)).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("syntax errors carry their line numbers") {
  CHECK(config_error_line("[plant]\ntyp = example\n") == 2);
  CHECK(config_error_line("[foo]\n") == 1);
  CHECK(config_error_line("[run\n") == 1);
  CHECK(config_error_line("seed = 1\n") == 1);
  CHECK(config_error_line("[run]\nseed 42\n") == 2);
  CHECK(config_error_line("[run]\ntrials = two\n") == 2);
  CHECK(config_error_line("[run]\nseed = -3\n") == 2);
  CHECK(config_error_line("[run]\nwrite_traces = 1\n") == 2);
  CHECK(config_error_line("[cost]\nq = diag\n") == 2);
  CHECK(config_error_line("[cost]\ngamma = fast\n") == 2);
  CHECK(config_error_line("[ddpg]\ngamma = 0.5\n") == 2);  // lives in [cost] only
  CHECK(config_error_line("[run]\n\n[plant]\na = 1 2 ; 3\n") == 4);
  CHECK(config_error_line("[plant]\ntype = banana\n") == 2);
}

TEST_CASE("semantic errors are reported without a line") {
  auto semantic = [](const std::string& text) {
    int line = config_error_line(text);
    CHECK(line == 0);
  };
  semantic("[plant]\na = 1\n");  // structural key on the built-in plant
  semantic(
      "[plant]\ntype = linear\na = 1\nb = 1\nprocess_cov = 1\n"
      "measurement_cov = 1\ninput_lower = -1\ninput_upper = 1\n");  // no c
  semantic(
      "[plant]\ntype = elu_cubic\na = 1\nb = 1\nc = 1\nprocess_cov = 1\n"
      "measurement_cov = 1\ninput_lower = -1\ninput_upper = 1\n");  // stray c
  semantic(
      "[plant]\ntype = elu_cubic\na = 0.9 0 ; 0 0.9\nb = 0 ; 1\nobs_index = 3\n"
      "process_cov = diag 1 1\nmeasurement_cov = 1\ninput_lower = -1\n"
      "input_upper = 1\n");  // index past the state dimension
  semantic(
      "[plant]\ntype = elu_cubic\na = 0.9 0 ; 0 0.9\nb = 0 ; 1\n"
      "process_cov = diag 1 1\nmeasurement_cov = diag 1 1\ninput_lower = -1\n"
      "input_upper = 1\n");  // scalar-output plant with a 2x2 noise
  semantic("[run]\ntrials = 0\n");
  semantic("[run]\neval_episodes = 0\n");
  semantic("[run]\neval_steps = 0\n");
  semantic("[run]\ndivergence_threshold = -1\n");
  semantic("[run]\nout_dir =\n");
  semantic("[run]\ncheckpoint = /nonexistent/actor.txt\n");
  semantic("[cost]\ngamma = 1\n");
  semantic("[cost]\nq = diag 1 1\n");  // wrong dimension for the 3-state plant
  semantic("[ddpg]\nminibatch_size = 0\n");
  semantic("[ddpg]\ntarget_mix_rate = 0\n");
}

TEST_CASE("an existing checkpoint path is accepted") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "socrl_test_ckpt.txt";
  { std::ofstream(path.string()) << "placeholder\n"; }
  RunConfig cfg = parse_string("[run]\ncheckpoint = " + path.string() + "\n");
  CHECK(cfg.checkpoint == path.string());
  RunConfig again = parse_string(resolved_text(cfg));
  CHECK(resolved_text(again) == resolved_text(cfg));
  fs::remove(path);
}

TEST_CASE("load_config rejects a missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("manifests reload as configs") {
  RunConfig cfg = parse_string("[run]\nseed = 7\ntrials = 2\n");
  std::ostringstream os;
  write_manifest(os, cfg, "train --config run.cfg");
  std::string text = os.str();
  CHECK(text.rfind("# manifest\n", 0) == 0);
  CHECK(text.find("# command: train --config run.cfg\n") != std::string::npos);
  CHECK(text.find("# format_version: 1\n") != std::string::npos);
  CHECK(text.find("# config_hash: " + config_hash(cfg) + "\n") != std::string::npos);
  CHECK(text.find("# generated: ") != std::string::npos);

  std::istringstream is(text);
  RunConfig reloaded = parse_config(is);
  CHECK(resolved_text(reloaded) == resolved_text(cfg));
  CHECK(config_hash(reloaded) == config_hash(cfg));
}

TEST_CASE("seventeen-digit rendering round-trips doubles exactly") {
  Rng rng(22);
  std::vector<double> values{0.0,      1.0,           -1.0,     1.0 / 3.0,
                             M_PI,     DBL_MAX,       -DBL_MAX, DBL_MIN,
                             5e-324,   2.2250738585072014e-308, 0.1,
                             -123.456, 1e300,         -1e-300};
  for (int i = 0; i < 1000; ++i)
    values.push_back(std::ldexp(rng.uniform(-1.0, 1.0), int(rng.integer(601)) - 300));
  for (double v : values) {
    std::string text = format_17g(v);
    double back = std::strtod(text.c_str(), nullptr);
    CHECK(back == v);
  }
  CHECK(std::signbit(std::strtod(format_17g(-0.0).c_str(), nullptr)));
}

TEST_CASE("trace csv round trip") {
  PlantModel m = example_plant();
  EpisodeTrace trace = example_trace(30, 23);

  std::ostringstream os;
  write_trace_csv(os, trace);
  std::string text = os.str();

  SUBCASE("schema and preamble are as documented") {
    CHECK(text.find("# policy: unit\n") != std::string::npos);
    CHECK(text.find("# seed: 23\n") != std::string::npos);
    CHECK(text.find("# initial_cov:") != std::string::npos);
    CHECK(text.find("step,x1,x2,x3,xhat1,xhat2,xhat3,cov_trace,u,y,reward\n") !=
          std::string::npos);
    CHECK(text.find("truncated_at") == std::string::npos);
  }
  SUBCASE("every field survives bit for bit") {
    std::istringstream is(text);
    EpisodeTrace back = read_trace_csv(is);
    check_traces_equal(back, trace);
    std::ostringstream second;
    write_trace_csv(second, back);
    CHECK(second.str() == text);
  }
  SUBCASE("the recorded episode replays through the filter exactly") {
    CHECK(replay_max_error(m, trace) == 0.0);
    std::istringstream is(text);
    EpisodeTrace back = read_trace_csv(is);
    CHECK(replay_max_error(m, back) == 0.0);
  }
  SUBCASE("file overloads agree with the stream ones") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "socrl_test_trace.csv";
    write_trace_csv(path.string(), trace);
    EpisodeTrace back = read_trace_csv(path.string());
    check_traces_equal(back, trace);
    fs::remove(path);
  }
}

TEST_CASE("trace csv with vector-valued input and output") {
  Rng rng(24);
  Eigen::MatrixXd a = random_stable(4, rng);
  Eigen::MatrixXd b = random_matrix(4, 2, rng);
  Eigen::MatrixXd c = random_matrix(2, 4, rng);
  PlantModel m = linear_plant(a, b, c, Eigen::MatrixXd::Identity(4, 4),
                              0.3 * Eigen::MatrixXd::Identity(2, 2),
                              Eigen::VectorXd::Constant(2, -2.0),
                              Eigen::VectorXd::Constant(2, 2.0));
  CostWeights w{Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Identity(2, 2),
                0.95};
  InformationState belief{rng.gaussian_vector(4), Eigen::MatrixXd::Identity(4, 4)};
  EpisodeTrace trace = rollout(m, w, zero_policy(m), belief, rng.gaussian_vector(4),
                               6, rng, "wide", 3);

  std::ostringstream os;
  write_trace_csv(os, trace);
  CHECK(os.str().find(
            "step,x1,x2,x3,x4,xhat1,xhat2,xhat3,xhat4,cov_trace,u1,u2,y1,y2,"
            "reward\n") != std::string::npos);
  std::istringstream is(os.str());
  check_traces_equal(read_trace_csv(is), trace);
}

TEST_CASE("truncated traces carry the failure step") {
  EpisodeTrace trace = example_trace(5, 25);
  trace.truncated = true;
  trace.failure_step = 4;
  std::ostringstream os;
  write_trace_csv(os, trace);
  CHECK(os.str().find("# truncated_at: 4\n") != std::string::npos);
  std::istringstream is(os.str());
  EpisodeTrace back = read_trace_csv(is);
  CHECK(back.truncated);
  CHECK(back.failure_step == 4);
}

TEST_CASE("trace export and import reject malformed data") {
  SUBCASE("empty trace") {
    std::ostringstream os;
    CHECK_THROWS_AS(write_trace_csv(os, EpisodeTrace{}), ContractViolation);
  }
  SUBCASE("multi-line policy label") {
    EpisodeTrace trace = example_trace(3, 26);
    trace.policy_label = "two\nlines";
    std::ostringstream os;
    CHECK_THROWS_AS(write_trace_csv(os, trace), ContractViolation);
  }
  SUBCASE("preamble without data") {
    std::istringstream is("# policy: x\n");
    CHECK_THROWS_AS(read_trace_csv(is), ContractViolation);
  }
  SUBCASE("header must start with step") {
    std::istringstream is("foo,bar\n0,1\n");
    CHECK_THROWS_AS(read_trace_csv(is), ContractViolation);
  }
  SUBCASE("missing initial covariance") {
    std::istringstream is(
        "# policy: x\n# seed: 1\n"
        "step,x1,xhat1,cov_trace,u,y,reward\n"
        "0,1,1,1,0,0,0\n");
    CHECK_THROWS_AS(read_trace_csv(is), ContractViolation);
  }
  SUBCASE("non-consecutive step index") {
    std::istringstream is(
        "# initial_cov: 1\n"
        "step,x1,xhat1,cov_trace,u,y,reward\n"
        "0,1,1,1,0,0,0\n"
        "2,1,1,1,0,0,0\n");
    CHECK_THROWS_AS(read_trace_csv(is), ContractViolation);
  }
  SUBCASE("short data row") {
    std::istringstream is(
        "# initial_cov: 1\n"
        "step,x1,xhat1,cov_trace,u,y,reward\n"
        "0,1,1,1,0,0\n");
    CHECK_THROWS_AS(read_trace_csv(is), ContractViolation);
  }
  SUBCASE("non-numeric field") {
    std::istringstream is(
        "# initial_cov: 1\n"
        "step,x1,xhat1,cov_trace,u,y,reward\n"
        "0,1,oops,1,0,0,0\n");
    CHECK_THROWS_AS(read_trace_csv(is), ContractViolation);
  }
  SUBCASE("header only") {
    std::istringstream is(
        "# initial_cov: 1\n"
        "step,x1,xhat1,cov_trace,u,y,reward\n");
    CHECK_THROWS_AS(read_trace_csv(is), ContractViolation);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_trace_csv(std::string("/nonexistent/trace.csv")),
                    ContractViolation);
  }
}

TEST_CASE("return curve csv") {
  std::vector<double> returns{-1.5, -2.25, -0.75};
  std::vector<double> normalized{-0.6666, -1.0, -0.3333};

  SUBCASE("round trip is exact") {
    std::ostringstream os;
    write_return_csv(os, returns, normalized);
    CHECK(os.str().rfind("episode,return,normalized_return\n", 0) == 0);
    std::istringstream is(os.str());
    std::vector<double> r2, n2;
    read_return_csv(is, r2, n2);
    REQUIRE(r2.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(r2[i] == returns[i]);
      CHECK(n2[i] == normalized[i]);
    }
  }
  SUBCASE("mismatched lengths are rejected") {
    std::ostringstream os;
    std::vector<double> shorter{-1.0};
    CHECK_THROWS_AS(write_return_csv(os, returns, shorter), ContractViolation);
  }
  SUBCASE("a foreign header is rejected") {
    std::istringstream is("episode,reward\n0,-1\n");
    std::vector<double> r2, n2;
    CHECK_THROWS_AS(read_return_csv(is, r2, n2), ContractViolation);
  }
}

TEST_CASE("comparison report text is deterministic and complete") {
  ComparisonReport rep;
  rep.episodes = 2;
  rep.steps = 10;
  rep.base_seed = 5;
  rep.divergence_threshold = 123.5;
  rep.first = {"alpha", 2.5, 4.0, 0.5, -1.25, {}};
  rep.second = {"beta", 3.5, 6.0, 1.0, -2.5, {}};

  std::ostringstream a, b;
  write_comparison_report(a, rep);
  write_comparison_report(b, rep);
  CHECK(a.str() == b.str());

  std::string expected =
      "comparison\n"
      "episodes: 2\n"
      "steps: 10\n"
      "base_seed: 5\n"
      "divergence_threshold: 123.5\n"
      "\n"
      "policy: alpha\n"
      "  median_peak_cov_trace: 2.5\n"
      "  max_peak_cov_trace: 4\n"
      "  divergent_fraction: 0.5\n"
      "  mean_return: -1.25\n"
      "\n"
      "policy: beta\n"
      "  median_peak_cov_trace: 3.5\n"
      "  max_peak_cov_trace: 6\n"
      "  divergent_fraction: 1\n"
      "  mean_return: -2.5\n";
  CHECK(a.str() == expected);
}

TEST_CASE("episode summary csv") {
  PolicySummary summary;
  summary.label = "alpha";
  summary.episodes.push_back({5, 2.5, -1.25, true, 7, false});
  summary.episodes.push_back({6, 1.0, -0.5, false, -1, false});
  std::ostringstream os;
  write_episode_summary_csv(os, summary);
  CHECK(os.str() ==
        "episode,seed,peak_cov_trace,return,divergent,first_crossing\n"
        "0,5,2.5,-1.25,1,7\n"
        "1,6,1,-0.5,0,-1\n");
}
