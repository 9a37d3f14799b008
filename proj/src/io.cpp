#include "clipope/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace clipope::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const json& require(const json& node, const char* key, const std::string& where) {
  if (!node.is_object() || !node.contains(key)) {
    throw ParseError(where + ": missing key \"" + key + "\"");
  }
  return node.at(key);
}

double as_number(const json& node, const std::string& what) {
  if (!node.is_number()) {
    throw ParseError(what + " must be a number");
  }
  return node.get<double>();
}

std::size_t as_count(const json& node, const std::string& what) {
  if (!node.is_number_integer() || node.get<long long>() < 0) {
    throw ParseError(what + " must be a non-negative integer");
  }
  return node.get<std::size_t>();
}

Eigen::VectorXd as_vector(const json& node, const std::string& what) {
  if (!node.is_array()) {
    throw ParseError(what + " must be an array of numbers");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = as_number(node[i], what);
  }
  return v;
}

Eigen::MatrixXd as_matrix(const json& node, const std::string& what) {
  if (!node.is_array() || node.empty() || !node[0].is_array()) {
    throw ParseError(what + " must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(node.size());
  const auto cols = static_cast<Eigen::Index>(node[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd row = as_vector(node[static_cast<std::size_t>(r)], what);
    if (row.size() != cols) {
      throw ParseError(what + " rows differ in length");
    }
    m.row(r) = row.transpose();
  }
  return m;
}

/// A number >= 1, or "inf" / "unbounded" / null for no clipping.
ClipConstant as_clip(const json& node, const std::string& what) {
  if (node.is_null()) {
    return ClipConstant::unbounded();
  }
  if (node.is_string()) {
    const auto s = node.get<std::string>();
    if (s == "inf" || s == "unbounded") {
      return ClipConstant::unbounded();
    }
    throw ParseError(what + ": expected a number or \"inf\", got \"" + s + "\"");
  }
  return ClipConstant(as_number(node, what));
}

LinearSoftmaxPolicy as_policy(const json& node, const std::string& what) {
  return {as_vector(require(node, "weights", what), what + ".weights")};
}

EstimatorSpec as_estimator(const json& node) {
  const auto type = require(node, "type", "estimator").get<std::string>();
  EstimatorSpec spec;
  const ClipConstant upper =
      node.contains("upper") ? as_clip(node["upper"], "estimator.upper") : ClipConstant::unbounded();
  const ClipConstant lower =
      node.contains("lower") ? as_clip(node["lower"], "estimator.lower") : ClipConstant::unbounded();
  if (type == "ips") {
    spec.kind = EstimatorKind::kIps;
  } else if (type == "cips") {
    spec.kind = EstimatorKind::kCips;
    if (lower.bounded()) {
      throw ConfigError("cips takes no lower clipping constant");
    }
    spec.clip = {upper, ClipConstant::unbounded()};
  } else if (type == "dcips") {
    spec.kind = EstimatorKind::kDcips;
    spec.clip = {upper, lower};
  } else {
    throw ParseError("unknown estimator type \"" + type + "\"");
  }
  return spec;
}

SweepConfig as_sweep(const json& node) {
  SweepConfig cfg;
  const auto mode = node.value("mode", std::string("unison"));
  if (node.contains("repetitions")) {
    cfg.repetitions = as_count(node["repetitions"], "sweep.repetitions");
  }
  if (node.contains("true_reward_samples")) {
    cfg.true_reward_samples = as_count(node["true_reward_samples"], "sweep.true_reward_samples");
  }
  if (node.contains("threads")) {
    cfg.threads = static_cast<unsigned>(as_count(node["threads"], "sweep.threads"));
  }
  const json grid = node.value("grid", json::object());
  if (mode == "unison") {
    cfg.mode = GridMode::kUnison;
    if (grid.is_array()) {
      for (const auto& c : grid) {
        const double v = as_number(c, "sweep.grid entry");
        cfg.grid.push_back(ClipConfig::unison(v));
      }
    } else {
      cfg.grid = log_unison_grid(grid.contains("min") ? as_number(grid["min"], "sweep.grid.min") : 1.0,
                                 grid.contains("max") ? as_number(grid["max"], "sweep.grid.max") : 100.0,
                                 grid.contains("points") ? as_count(grid["points"], "sweep.grid.points")
                                                         : 25);
    }
  } else if (mode == "explicit") {
    cfg.mode = GridMode::kExplicit;
    if (!grid.is_array()) {
      throw ParseError("explicit sweep grid must be an array of [U, L] pairs");
    }
    for (const auto& pair : grid) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ParseError("explicit sweep grid entries must be [U, L] pairs");
      }
      cfg.grid.push_back({as_clip(pair[0], "sweep U"), as_clip(pair[1], "sweep L")});
    }
  } else {
    throw ParseError("unknown sweep mode \"" + mode + "\"");
  }
  return cfg;
}

std::variant<GaussianScenario, TabularEnvironment<double>> as_environment(const json& root) {
  const json& env = require(root, "environment", "config");
  const auto type = require(env, "type", "environment").get<std::string>();
  if (type == "gaussian") {
    GaussianScenario s;
    s.env.num_actions = as_count(require(env, "num_actions", "environment"), "num_actions");
    s.env.feature_dim = env.contains("feature_dim") ? as_count(env["feature_dim"], "feature_dim")
                                                    : s.env.num_actions;
    s.env.sigma = as_number(require(env, "sigma", "environment"), "sigma");
    s.env.reward_weights =
        as_vector(require(env, "reward_weights", "environment"), "reward_weights");
    s.env.validate();
    s.logging_policy = as_policy(require(root, "logging_policy", "config"), "logging_policy");
    if (root.contains("target_policy")) {
      s.target_policy = as_policy(root["target_policy"], "target_policy");
    }
    const auto dim = static_cast<Eigen::Index>(s.env.feature_dim);
    if (s.logging_policy.weights.size() != dim ||
        (s.target_policy && s.target_policy->weights.size() != dim)) {
      throw ConfigError("policy weights must match the feature dimension");
    }
    return s;
  }
  if (type == "tabular") {
    TabularEnvironment<double> t;
    t.context_probs = as_vector(require(env, "context_probs", "environment"), "context_probs");
    t.logging_table = as_matrix(require(env, "logging_table", "environment"), "logging_table");
    t.target_table = as_matrix(require(env, "target_table", "environment"), "target_table");
    t.expected_rewards =
        as_matrix(require(env, "expected_rewards", "environment"), "expected_rewards");
    validate(t);
    return t;
  }
  throw ParseError("unknown environment type \"" + type + "\"");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kIps: return "ips";
    case EstimatorKind::kCips: return "cips";
    case EstimatorKind::kDcips: return "dcips";
  }
  return "unknown";
}

std::string format_number(double value) {
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw ParseError("config must be a JSON object");
  }
  try {
    if (root.contains("schema_version") && root["schema_version"] != kSchemaVersion) {
      throw ParseError("unsupported config schema_version " + root["schema_version"].dump());
    }
    RunConfig cfg;
    cfg.environment = as_environment(root);
    if (root.contains("seed")) {
      if (!root["seed"].is_number_unsigned()) {
        throw ParseError("seed must be a non-negative integer");
      }
      cfg.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("n_rounds")) {
      cfg.n_rounds = as_count(root["n_rounds"], "n_rounds");
    }
    if (cfg.n_rounds < 1) {
      throw ConfigError("n_rounds must be at least 1");
    }
    if (root.contains("estimator")) {
      cfg.estimator = as_estimator(root["estimator"]);
      const auto* g = std::get_if<GaussianScenario>(&cfg.environment);
      if (g && !g->target_policy) {
        throw ConfigError("an estimator needs a target_policy");
      }
    }
    if (root.contains("sweep")) {
      cfg.sweep = as_sweep(root["sweep"]);
      cfg.sweep->n_rounds = cfg.n_rounds;
      cfg.sweep->validate();
      const auto* g = std::get_if<GaussianScenario>(&cfg.environment);
      if (g && !g->target_policy) {
        throw ConfigError("a sweep needs a target_policy");
      }
    }
    if (root.contains("output")) {
      const json& out = root["output"];
      const auto path = [&](const char* key) -> std::optional<std::filesystem::path> {
        if (!out.contains(key)) {
          return std::nullopt;
        }
        return std::filesystem::path(out[key].get<std::string>());
      };
      cfg.dataset_path = path("dataset");
      cfg.sweep_path = path("sweep");
      cfg.estimate_path = path("estimate");
      cfg.oracle_path = path("oracle");
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path));
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  for (const LogRecord& r : dataset) {
    ordered_json line;
    line["schema_version"] = kSchemaVersion;
    line["context"] = r.context_id;
    if (r.features) {
      ordered_json rows = ordered_json::array();
      for (Eigen::Index j = 0; j < r.features->rows(); ++j) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index k = 0; k < r.features->cols(); ++k) {
          row.push_back((*r.features)(j, k));
        }
        rows.push_back(std::move(row));
      }
      line["features"] = std::move(rows);
    }
    line["action"] = r.action;
    line["reward"] = r.reward;
    ordered_json probs = ordered_json::array();
    if (r.logging_propensities.size() > 0) {
      for (Eigen::Index j = 0; j < r.logging_propensities.size(); ++j) {
        probs.push_back(r.logging_propensities[j]);
      }
    } else {
      line["logging_propensity"] = r.logging_propensity;
    }
    if (!probs.empty()) {
      line["logging_propensities"] = std::move(probs);
    }
    out << line.dump() << '\n';
  }
  if (!out) {
    throw IoError("failed writing dataset");
  }
}

Dataset read_dataset(std::istream& in) {
  std::vector<LogRecord> records;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      const json line = json::parse(text);
      if (!line.is_object()) {
        throw ParseError("record must be a JSON object", line_no);
      }
      if (line.value("schema_version", kSchemaVersion) != kSchemaVersion) {
        throw ParseError("unsupported schema_version", line_no);
      }
      LogRecord r;
      r.context_id = line.contains("context") ? as_count(line["context"], "context") : records.size();
      r.action = as_count(require(line, "action", "record"), "action");
      r.reward = as_number(require(line, "reward", "record"), "reward");
      if (line.contains("features")) {
        r.features = as_matrix(line["features"], "features");
      }
      if (line.contains("logging_propensities")) {
        r.logging_propensities = as_vector(line["logging_propensities"], "logging_propensities");
        if (r.action >= static_cast<std::size_t>(r.logging_propensities.size())) {
          throw ParseError("action outside logging_propensities");
        }
        r.logging_propensity = r.logging_propensities[static_cast<Eigen::Index>(r.action)];
      } else {
        r.logging_propensity =
            as_number(require(line, "logging_propensity", "record"), "logging_propensity");
      }
      records.push_back(std::move(r));
      // Validate each record as it arrives so the error names its line.
      Dataset(std::vector<LogRecord>{records.back()});
    } catch (const ParseError& e) {
      if (e.line() != 0) {
        throw;
      }
      throw ParseError(e.what(), line_no);
    } catch (const InputError& e) {
      throw ParseError(std::string(e.what()), line_no);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return Dataset(std::move(records));
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  return read_dataset(in);
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "# schema_version: " << kSchemaVersion << '\n'
      << "# seed: " << result.master_seed << '\n'
      << "# n: " << result.n_rounds << '\n'
      << "# repetitions: " << result.repetitions << '\n'
      << "# true_reward: " << format_number(result.true_reward) << '\n'
      << "# true_reward_se: " << format_number(result.true_reward_se) << '\n'
      << "# logging_mean_of_means: " << format_number(result.logging_mean_of_means) << '\n'
      << "# variance: population (divisor K); mse = bias_sq + variance\n"
      << "# std_error: sample standard deviation (divisor K-1) / sqrt(K)\n"
      << kSweepCsvColumns << '\n';
  const auto row = [&](const SweepPoint& p, const char* name, const EstimatorSummary& s) {
    const ClipConstant lower = std::string(name) == "cips" ? ClipConstant::unbounded() : p.clip.lower;
    out << to_string(p.clip.upper) << ',' << to_string(lower) << ',' << name << ','
        << format_number(s.mean_estimate) << ',' << format_number(s.std_error) << ','
        << format_number(s.bias_sq) << ',' << format_number(s.variance) << ','
        << format_number(s.mse) << '\n';
  };
  for (const SweepPoint& p : result.points) {
    row(p, "cips", p.cips);
  }
  for (const SweepPoint& p : result.points) {
    row(p, "dcips", p.dcips);
  }
  if (!out) {
    throw IoError("failed writing sweep CSV");
  }
}

void write_bias_csv(std::ostream& out, const oracle::BiasReport<double>& report) {
  out << kBiasCsvColumns << '\n';
  for (const auto& cell : report.per_cell) {
    out << cell.context << ',' << cell.action << ',' << format_number(cell.upper) << ','
        << format_number(cell.lower) << '\n';
  }
  if (!out) {
    throw IoError("failed writing bias CSV");
  }
}

}  // namespace clipope::io
