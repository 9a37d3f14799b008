#include <iostream>

#include <CLI11.hpp>

#include "clipope/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Clipped importance-weighting estimators for off-policy bandit evaluation"};
  app.require_subcommand(1);

  clipope::CommandOptions options;
  std::string dataset;
  std::string out;
  std::uint64_t seed = 0;

  const auto add = [&](const char* name, const char* description) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", options.config, "Run configuration (JSON)")->required();
    sub->add_option("--dataset", dataset, "Dataset file (JSON lines)");
    sub->add_option("--out", out, "Output file");
    sub->add_option("--seed", seed, "Master seed, overrides the config");
    return sub;
  };
  CLI::App* simulate = add("simulate", "Simulate a logged dataset");
  CLI::App* estimate = add("estimate", "Evaluate an estimator on a dataset");
  CLI::App* sweep = add("sweep", "Sweep clipping constants over repeated datasets");
  CLI::App* oracle = add("oracle", "Exact bias decomposition on a tabular environment");

  CLI11_PARSE(app, argc, argv);

  for (CLI::App* sub : {simulate, estimate, sweep, oracle}) {
    if (sub->count("--dataset") > 0) options.dataset = dataset;
    if (sub->count("--out") > 0) options.out = out;
    if (sub->count("--seed") > 0) options.seed = seed;
  }

  clipope::Command command = nullptr;
  if (simulate->parsed()) command = clipope::cmd_simulate;
  if (estimate->parsed()) command = clipope::cmd_estimate;
  if (sweep->parsed()) command = clipope::cmd_sweep;
  if (oracle->parsed()) command = clipope::cmd_oracle;
  return clipope::run_command(command, options, std::cout, std::cerr);
}
