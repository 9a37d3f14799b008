#include "clipope/commands.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "clipope/io.hpp"

namespace clipope {

namespace {

io::RunConfig load(const CommandOptions& options) {
  io::RunConfig cfg = io::load_run_config(options.config);
  if (options.seed) {
    cfg.seed = *options.seed;
  }
  return cfg;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

std::filesystem::path pick(const std::optional<std::filesystem::path>& flag,
                           const std::optional<std::filesystem::path>& configured,
                           const char* what) {
  if (flag) {
    return *flag;
  }
  if (configured) {
    return *configured;
  }
  throw ConfigError(std::string("no ") + what + " path given (use --" +
                    (std::string(what) == "dataset" ? "dataset" : "out") + " or the config)");
}

std::string clip_label(const ClipConstant& c) { return to_string(c); }

}  // namespace

int cmd_simulate(const CommandOptions& options, std::ostream& out) {
  const io::RunConfig cfg = load(options);
  const std::filesystem::path path = pick(options.out, cfg.dataset_path, "output");
  const Seed seed{cfg.seed, 0};
  Dataset dataset;
  if (const auto* g = std::get_if<io::GaussianScenario>(&cfg.environment)) {
    dataset = simulate(g->env, g->logging_policy, cfg.n_rounds, seed);
  } else {
    dataset = tabular_simulate(std::get<TabularEnvironment<double>>(cfg.environment),
                               cfg.n_rounds, seed);
  }
  std::ofstream file = open_output(path);
  io::write_dataset(file, dataset);
  file.close();
  if (!file) {
    throw IoError("failed writing " + path.string());
  }
  out << "n: " << dataset.size() << '\n' << "seed: " << cfg.seed << '\n';
  return 0;
}

int cmd_estimate(const CommandOptions& options, std::ostream& out) {
  const io::RunConfig cfg = load(options);
  if (!cfg.estimator) {
    throw ConfigError("config has no estimator section");
  }
  const Dataset dataset = io::load_dataset(pick(options.dataset, cfg.dataset_path, "dataset"));
  std::vector<double> target;
  if (const auto* g = std::get_if<io::GaussianScenario>(&cfg.environment)) {
    target = evaluate_target_propensities(dataset, *g->target_policy);
  } else {
    target = evaluate_target_propensities(
        dataset, std::get<TabularEnvironment<double>>(cfg.environment).target_table);
  }
  const std::vector<ImportanceWeight> weights = importance_weights(dataset, target);
  const io::EstimatorSpec& spec = *cfg.estimator;
  Estimate est;
  switch (spec.kind) {
    case io::EstimatorKind::kIps: est = ips(dataset, weights); break;
    case io::EstimatorKind::kCips: est = cips(dataset, weights, spec.clip.upper); break;
    case io::EstimatorKind::kDcips: est = dcips(dataset, weights, spec.clip); break;
  }
  out << "estimator: " << io::to_string(spec.kind) << '\n'
      << "U: " << clip_label(spec.clip.upper) << '\n'
      << "L: " << clip_label(spec.clip.lower) << '\n'
      << "value: " << io::format_number(est.value) << '\n'
      << "n_used: " << est.n_used << '\n'
      << "clipped_above: " << est.clip_stats.clipped_above << '\n'
      << "clipped_below: " << est.clip_stats.clipped_below << '\n'
      << "unclipped: " << est.clip_stats.unclipped << '\n';

  const auto json_path = options.out ? options.out : cfg.estimate_path;
  if (json_path) {
    nlohmann::ordered_json j;
    j["schema_version"] = io::kSchemaVersion;
    j["estimator"] = io::to_string(spec.kind);
    j["U"] = clip_label(spec.clip.upper);
    j["L"] = clip_label(spec.clip.lower);
    j["value"] = est.value;
    j["n_used"] = est.n_used;
    j["clipped_above"] = est.clip_stats.clipped_above;
    j["clipped_below"] = est.clip_stats.clipped_below;
    j["unclipped"] = est.clip_stats.unclipped;
    std::ofstream file = open_output(*json_path);
    file << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_sweep(const CommandOptions& options, std::ostream& out) {
  const io::RunConfig cfg = load(options);
  if (!cfg.sweep) {
    throw ConfigError("config has no sweep section");
  }
  const std::filesystem::path path = pick(options.out, cfg.sweep_path, "output");
  SweepResult result;
  if (const auto* g = std::get_if<io::GaussianScenario>(&cfg.environment)) {
    result = run_sweep(g->env, g->logging_policy, *g->target_policy, *cfg.sweep, cfg.seed);
  } else {
    result = run_sweep(std::get<TabularEnvironment<double>>(cfg.environment), *cfg.sweep, cfg.seed);
  }
  std::ofstream file = open_output(path);
  io::write_sweep_csv(file, result);
  file.close();
  if (!file) {
    throw IoError("failed writing " + path.string());
  }

  const auto best = [&](auto member) {
    const SweepPoint* winner = &result.points.front();
    for (const SweepPoint& p : result.points) {
      if ((p.*member).mse < (winner->*member).mse) {
        winner = &p;
      }
    }
    return winner;
  };
  const SweepPoint* c = best(&SweepPoint::cips);
  const SweepPoint* d = best(&SweepPoint::dcips);
  out << fmt::format("true_reward: {} (se {})\n", io::format_number(result.true_reward),
                     io::format_number(result.true_reward_se))
      << fmt::format("min_mse cips: U={} mse={}\n", clip_label(c->clip.upper),
                     io::format_number(c->cips.mse))
      << fmt::format("min_mse dcips: U={} L={} mse={}\n", clip_label(d->clip.upper),
                     clip_label(d->clip.lower), io::format_number(d->dcips.mse));
  return 0;
}

int cmd_oracle(const CommandOptions& options, std::ostream& out) {
  const io::RunConfig cfg = load(options);
  const auto* env = std::get_if<TabularEnvironment<double>>(&cfg.environment);
  if (!env) {
    throw UnsupportedError("the exact oracle needs a tabular environment");
  }
  const ClipConfig clip = cfg.estimator ? cfg.estimator->clip : ClipConfig::none();
  const auto report = oracle::bias_dcips_exact(*env, clip);
  const double expected = oracle::exact_expected_estimate(*env, clip);
  const double truth = oracle::exact_true_reward(*env);
  const double residual = std::abs(expected - truth - report.bias_total);
  out << "U: " << clip_label(clip.upper) << '\n'
      << "L: " << clip_label(clip.lower) << '\n'
      << "bias_total: " << io::format_number(report.bias_total) << '\n'
      << "upper_term: " << io::format_number(report.upper_term) << '\n'
      << "lower_term: " << io::format_number(report.lower_term) << '\n'
      << "expected_estimate: " << io::format_number(expected) << '\n'
      << "true_reward: " << io::format_number(truth) << '\n'
      << "residual: " << io::format_number(residual) << '\n';
  const auto csv_path = options.out ? options.out : cfg.oracle_path;
  if (csv_path) {
    std::ofstream file = open_output(*csv_path);
    io::write_bias_csv(file, report);
  }
  return 0;
}

int run_command(Command command, const CommandOptions& options, std::ostream& out,
                std::ostream& err) {
  try {
    return command(options, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace clipope
