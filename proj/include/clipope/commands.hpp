#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace clipope {

/// Flags shared by the subcommands; unused ones are ignored.
struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
};

// Each command writes its report to `out` and returns 0, or throws a
// clipope::Error. `run_command` wraps them with the one-line diagnostic and
// exit-code policy of the CLI.

/// Simulates n_rounds of the configured environment and writes the dataset.
int cmd_simulate(const CommandOptions& options, std::ostream& out);
/// Evaluates the configured estimator on a dataset file.
int cmd_estimate(const CommandOptions& options, std::ostream& out);
/// Runs the clipping sweep and writes the CSV.
int cmd_sweep(const CommandOptions& options, std::ostream& out);
/// Prints the exact bias decomposition for a tabular environment.
int cmd_oracle(const CommandOptions& options, std::ostream& out);

using Command = int (*)(const CommandOptions&, std::ostream&);

/// Returns the command's status, or a nonzero code after printing
/// "error: <diagnostic>" to `err`.
int run_command(Command command, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace clipope
