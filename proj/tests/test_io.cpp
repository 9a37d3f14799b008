#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "clipope/commands.hpp"
#include "clipope/io.hpp"
#include "support.hpp"

using namespace clipope;
namespace fs = std::filesystem;

namespace {

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("clipope_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

/// Value printed on a `key: value` line.
std::string field(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  }
  FAIL("missing field " << key);
  return {};
}

const char* kTabular = R"({
  "seed": 7, "n_rounds": 100000,
  "environment": {"type": "tabular", "context_probs": [1.0],
    "logging_table": [[0.9, 0.1]], "target_table": [[0.5, 0.5]], "expected_rewards": [[1.0, 1.0]]},
  "estimator": ESTIMATOR
})";

std::string tabular_config(const std::string& estimator) {
  std::string s = kTabular;
  s.replace(s.find("ESTIMATOR"), 9, estimator);
  return s;
}

std::string gaussian_config(const std::string& extra) {
  return R"({
  "seed": 5, "n_rounds": 300,
  "environment": {"type": "gaussian", "num_actions": 8, "sigma": 1.0,
                  "reward_weights": [0, 0.5, 0, 0.5, 0, 0, 0, 0]},
  "logging_policy": {"weights": [1, 2, 3, 4, 5, 6, 7, 8]},
  "target_policy": {"weights": [8, 7, 6, 5, 4, 3, 2, 1]})" +
         extra + "}";
}

}  // namespace

TEST_CASE("run config parsing") {
  const io::RunConfig paper = io::load_run_config(fs::path(CLIPOPE_SOURCE_DIR) / "configs/paper.json");
  CHECK_FALSE(paper.is_tabular());
  CHECK(paper.n_rounds == 300);
  REQUIRE(paper.sweep);
  CHECK(paper.sweep->grid.size() == 25);
  CHECK(paper.sweep->repetitions == 100);
  REQUIRE(paper.estimator);
  CHECK(paper.estimator->clip == ClipConfig::unison(10.0));

  const io::RunConfig tab = io::parse_run_config(tabular_config(R"({"type": "cips", "upper": 2})"));
  CHECK(tab.is_tabular());
  CHECK(tab.estimator->kind == io::EstimatorKind::kCips);
  CHECK_FALSE(tab.estimator->clip.lower.bounded());

  const auto dc = io::parse_run_config(tabular_config(R"({"type": "dcips", "upper": "inf", "lower": 3})"));
  CHECK_FALSE(dc.estimator->clip.upper.bounded());
  CHECK(dc.estimator->clip.lower.value() == 3.0);

  CHECK_THROWS_AS(io::parse_run_config("{not json"), ParseError);
  CHECK_THROWS_AS(io::parse_run_config(tabular_config(R"({"type": "snips"})")), ParseError);
  CHECK_THROWS_AS(io::parse_run_config(tabular_config(R"({"type": "dcips", "upper": 0.5})")), ConfigError);
  CHECK_THROWS_AS(io::parse_run_config(tabular_config(R"({"type": "cips", "upper": 2, "lower": 2})")), ConfigError);
  CHECK_THROWS_AS(io::parse_run_config(gaussian_config(R"(, "sweep": {"repetitions": 1})")), ConfigError);
  CHECK_THROWS_AS(io::parse_run_config(R"({"environment": {"type": "gaussian", "num_actions": 8,
      "sigma": 1.0, "reward_weights": [0,0,0,0,0,0,0,0]}, "logging_policy": {"weights": [1,1,1,1,1,1,1,1]},
      "estimator": {"type": "ips"}})"),
                  ConfigError);
  CHECK_THROWS_AS(io::load_run_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("dataset round trip is exact") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Dataset d = simulate(paper_environment(), paper_logging_policy(), 50, Seed{rng(), 0});
    std::stringstream buffer;
    io::write_dataset(buffer, d);
    const Dataset back = io::read_dataset(buffer);
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      REQUIRE(back[i].context_id == d[i].context_id);
      REQUIRE(back[i].action == d[i].action);
      REQUIRE(back[i].reward == d[i].reward);
      REQUIRE(back[i].logging_propensity == d[i].logging_propensity);
      REQUIRE(back[i].logging_propensities == d[i].logging_propensities);
      REQUIRE(*back[i].features == *d[i].features);
    }
  }

  const Dataset tab = tabular_simulate(clipope::testing::worked_example(), 20, Seed{2, 0});
  std::stringstream buffer;
  io::write_dataset(buffer, tab);
  CHECK(buffer.str().find("features") == std::string::npos);
  const Dataset back = io::read_dataset(buffer);
  for (std::size_t i = 0; i < tab.size(); ++i) {
    REQUIRE(back[i].context_id == tab[i].context_id);
    REQUIRE(back[i].logging_propensity == tab[i].logging_propensity);
    REQUIRE_FALSE(back[i].features.has_value());
  }
}

TEST_CASE("dataset parse errors name the line") {
  const std::string good = R"({"action": 0, "reward": 1, "logging_propensities": [0.5, 0.5]})";
  const auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      io::read_dataset(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of(good + "\n" + good + "\n{broken\n") == 3);
  CHECK(line_of(good + "\n" + R"({"reward": 1, "logging_propensity": 0.5})" + "\n") == 2);
  CHECK(line_of(R"({"action": 3, "reward": 1, "logging_propensities": [0.5, 0.5]})") == 1);
  CHECK(line_of(good + "\n" + R"({"action": 0, "reward": -1, "logging_propensity": 0.5})") == 2);
  CHECK(line_of(good + "\n" + R"({"action": 0, "reward": 1, "logging_propensity": 0})") == 2);
  CHECK(line_of(good + "\n\n" + good + "\n") == 0);
}

TEST_CASE("csv writers") {
  const auto env = clipope::testing::worked_example();
  std::ostringstream bias;
  io::write_bias_csv(bias, oracle::bias_dcips_exact(env, ClipConfig::both(2.0, 1.0)));
  CHECK(bias.str().rfind("context,action,upper_contribution,lower_contribution\n", 0) == 0);
  CHECK(count_lines(bias.str()) == 3);

  SweepConfig cfg;
  cfg.mode = GridMode::kExplicit;
  cfg.grid = {ClipConfig::unison(1.0), ClipConfig::upper_only(2.0)};
  cfg.repetitions = 3;
  cfg.n_rounds = 10;
  std::ostringstream csv;
  io::write_sweep_csv(csv, run_sweep(env, cfg, 1));
  const std::string text = csv.str();
  CHECK(text.find("# schema_version: 1\n") != std::string::npos);
  CHECK(text.find("# true_reward: 1\n") != std::string::npos);
  CHECK(text.find("\nU,L,estimator,mean,std_error,bias_sq,variance,mse\n") != std::string::npos);
  CHECK(text.find("\n2,inf,dcips,") != std::string::npos);
  CHECK(text.find("\n1,1,dcips,") != std::string::npos);
  CHECK(text.find("\n1,inf,cips,") != std::string::npos);
}

TEST_CASE("simulate command") {
  TempDir tmp;
  const fs::path config = tmp.write("paper.json", gaussian_config(""));
  CommandOptions opts{config, std::nullopt, tmp.path / "a.jsonl", std::nullopt};
  std::ostringstream out, err;
  CHECK(run_command(cmd_simulate, opts, out, err) == 0);
  CHECK(field(out.str(), "n") == "300");
  CHECK(field(out.str(), "seed") == "5");
  CHECK(count_lines(slurp(tmp.path / "a.jsonl")) == 300);

  opts.out = tmp.path / "b.jsonl";
  CHECK(run_command(cmd_simulate, opts, out, err) == 0);
  CHECK(slurp(tmp.path / "a.jsonl") == slurp(tmp.path / "b.jsonl"));

  opts.out = tmp.path / "c.jsonl";
  opts.seed = 6;
  CHECK(run_command(cmd_simulate, opts, out, err) == 0);
  CHECK(slurp(tmp.path / "a.jsonl") != slurp(tmp.path / "c.jsonl"));

  std::string zero = gaussian_config("");
  zero.replace(zero.find("\"n_rounds\": 300"), 15, "\"n_rounds\": 0");
  opts.config = tmp.write("zero.json", zero);
  std::ostringstream err2;
  CHECK(run_command(cmd_simulate, opts, out, err2) != 0);
  CHECK(err2.str().rfind("error: ", 0) == 0);
  CHECK(count_lines(err2.str()) == 1);

  opts.config = config;
  opts.out = tmp.path / "missing_dir" / "x.jsonl";
  std::ostringstream err3;
  CHECK(run_command(cmd_simulate, opts, out, err3) == 4);
}

TEST_CASE("estimate command") {
  TempDir tmp;
  const fs::path sim_config = tmp.write("sim.json", gaussian_config(""));
  std::ostringstream out, err;
  REQUIRE(run_command(cmd_simulate, {sim_config, std::nullopt, tmp.path / "d.jsonl", std::nullopt}, out, err) == 0);
  const Dataset d = io::load_dataset(tmp.path / "d.jsonl");
  const double mean_reward = logging_mean(d).value;

  const auto estimate = [&](const std::string& estimator) {
    const fs::path cfg = tmp.write("est.json", gaussian_config(", \"estimator\": " + estimator));
    std::ostringstream report, errors;
    const int code = run_command(cmd_estimate, {cfg, tmp.path / "d.jsonl", std::nullopt, std::nullopt}, report, errors);
    REQUIRE_MESSAGE(code == 0, errors.str());
    return report.str();
  };

  const std::string limit = estimate(R"({"type": "dcips", "upper": 1, "lower": 1})");
  CHECK(std::stod(field(limit, "value")) == mean_reward);
  CHECK(field(limit, "n_used") == "300");

  const std::string inf = estimate(R"({"type": "cips", "upper": "inf"})");
  const std::string plain = estimate(R"({"type": "ips"})");
  CHECK(field(inf, "value") == field(plain, "value"));
  CHECK(field(inf, "clipped_above") == "0");

  const std::string clipped = estimate(R"({"type": "dcips", "upper": 2, "lower": 2})");
  CHECK(std::stoul(field(clipped, "clipped_above")) + std::stoul(field(clipped, "clipped_below")) +
            std::stoul(field(clipped, "unclipped")) ==
        300);

  SUBCASE("json output") {
    const fs::path cfg = tmp.write("est.json", gaussian_config(R"(, "estimator": {"type": "ips"})"));
    std::ostringstream report;
    REQUIRE(run_command(cmd_estimate, {cfg, tmp.path / "d.jsonl", tmp.path / "e.json", std::nullopt}, report, err) == 0);
    CHECK(slurp(tmp.path / "e.json").find("\"estimator\": \"ips\"") != std::string::npos);
  }

  SUBCASE("malformed dataset") {
    std::ofstream(tmp.path / "d.jsonl", std::ios::app) << "{\"action\": \n";
    const fs::path cfg = tmp.write("est.json", gaussian_config(R"(, "estimator": {"type": "ips"})"));
    std::ostringstream report, errors;
    CHECK(run_command(cmd_estimate, {cfg, tmp.path / "d.jsonl", std::nullopt, std::nullopt}, report, errors) == 3);
    CHECK(errors.str().find("line 301") != std::string::npos);
  }

  SUBCASE("sampled tabular dataset matches the exact expectation") {
    const fs::path cfg = tmp.write("tab.json", tabular_config(R"({"type": "cips", "upper": 2})"));
    REQUIRE(run_command(cmd_simulate, {cfg, std::nullopt, tmp.path / "t.jsonl", std::nullopt}, out, err) == 0);
    std::ostringstream report;
    REQUIRE(run_command(cmd_estimate, {cfg, tmp.path / "t.jsonl", std::nullopt, std::nullopt}, report, err) == 0);
    const double value = std::stod(field(report.str(), "value"));
    // Per record, r * min(w, 2) is 5/9 with probability 0.9 and 2 with probability 0.1.
    const double mean = 0.9 * (5.0 / 9.0) + 0.1 * 2.0;
    const double var = 0.9 * std::pow(5.0 / 9.0 - mean, 2) + 0.1 * std::pow(2.0 - mean, 2);
    CHECK(std::abs(value - 0.7) <= 5.0 * std::sqrt(var / 100000.0));
    CHECK(std::abs(mean - 0.7) <= 1e-15);
  }
}

TEST_CASE("sweep command") {
  TempDir tmp;
  const std::string sweep = R"(, "sweep": {"mode": "unison", "grid": {"min": 1, "max": 100, "points": 25},
      "repetitions": 5, "true_reward_samples": 20000})";
  const fs::path cfg = tmp.write("sweep.json", gaussian_config(sweep));
  std::ostringstream out, err;
  REQUIRE(run_command(cmd_sweep, {cfg, std::nullopt, tmp.path / "a.csv", std::nullopt}, out, err) == 0);
  CHECK(out.str().find("min_mse cips: U=") != std::string::npos);
  CHECK(out.str().find("min_mse dcips: U=") != std::string::npos);
  const std::string a = slurp(tmp.path / "a.csv");
  CHECK(std::count(a.begin(), a.end(), '\n') == 9 + 1 + 50);

  REQUIRE(run_command(cmd_sweep, {cfg, std::nullopt, tmp.path / "b.csv", std::nullopt}, out, err) == 0);
  CHECK(a == slurp(tmp.path / "b.csv"));

  SUBCASE("U = L = 1 bias equals the logging gap") {
    const fs::path one = tmp.write("one.json", gaussian_config(R"(, "sweep": {"mode": "explicit",
        "grid": [[1, 1]], "repetitions": 10, "true_reward_samples": 20000})"));
    REQUIRE(run_command(cmd_sweep, {one, std::nullopt, tmp.path / "one.csv", std::nullopt}, out, err) == 0);
    const std::string text = slurp(tmp.path / "one.csv");
    const double truth = std::stod(field(text, "# true_reward"));
    const double logging = std::stod(field(text, "# logging_mean_of_means"));
    const auto row = text.substr(text.find("\n1,1,dcips,") + 1);
    std::vector<std::string> cols;
    std::stringstream ss(row.substr(0, row.find('\n')));
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    REQUIRE(cols.size() == 8);
    CHECK(std::stod(cols[5]) == doctest::Approx((logging - truth) * (logging - truth)).epsilon(1e-12));
  }

  SUBCASE("missing sweep section") {
    const fs::path none = tmp.write("none.json", gaussian_config(""));
    std::ostringstream errors;
    CHECK(run_command(cmd_sweep, {none, std::nullopt, tmp.path / "x.csv", std::nullopt}, out, errors) == 2);
  }
}

TEST_CASE("oracle command") {
  TempDir tmp;
  const auto report = [&](const std::string& estimator) {
    const fs::path cfg = tmp.write("o.json", tabular_config(estimator));
    std::ostringstream out, err;
    REQUIRE(run_command(cmd_oracle, {cfg, std::nullopt, tmp.path / "cells.csv", std::nullopt}, out, err) == 0);
    return out.str();
  };
  const std::string cips = report(R"({"type": "cips", "upper": 2})");
  CHECK(std::abs(std::stod(field(cips, "bias_total")) + 0.3) <= 1e-12);
  CHECK(std::stod(field(cips, "residual")) <= 1e-12);
  CHECK(count_lines(slurp(tmp.path / "cells.csv")) == 3);

  const std::string dc = report(R"({"type": "dcips", "upper": 2, "lower": 1})");
  CHECK(std::abs(std::stod(field(dc, "bias_total")) - 0.1) <= 1e-12);
  CHECK(std::abs(std::stod(field(dc, "upper_term")) + 0.3) <= 1e-12);
  CHECK(std::abs(std::stod(field(dc, "lower_term")) - 0.4) <= 1e-12);

  CHECK(std::stod(field(report(R"({"type": "cips", "upper": 1e9})"), "bias_total")) == 0.0);

  const fs::path gauss = tmp.write("g.json", gaussian_config(""));
  std::ostringstream out, err;
  CHECK(run_command(cmd_oracle, {gauss, std::nullopt, std::nullopt, std::nullopt}, out, err) == 2);
  CHECK(err.str().find("tabular") != std::string::npos);
}
