#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>

#include "clipope/clip.hpp"
#include "clipope/core.hpp"
#include "clipope/harness.hpp"
#include "clipope/oracle.hpp"
#include "clipope/synth.hpp"
#include "clipope/tabular.hpp"

namespace clipope::io {

inline constexpr int kSchemaVersion = 1;

/// Fixed column order of the sweep CSV.
inline constexpr const char* kSweepCsvColumns = "U,L,estimator,mean,std_error,bias_sq,variance,mse";
inline constexpr const char* kBiasCsvColumns = "context,action,upper_contribution,lower_contribution";

enum class EstimatorKind { kIps, kCips, kDcips };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::kDcips;
  ClipConfig clip;
};

/// Gaussian-feature bandit with its policy pair.
struct GaussianScenario {
  GaussianFeatureEnv env;
  LinearSoftmaxPolicy logging_policy;
  std::optional<LinearSoftmaxPolicy> target_policy;
};

struct RunConfig {
  std::variant<GaussianScenario, TabularEnvironment<double>> environment;
  std::optional<EstimatorSpec> estimator;
  std::optional<SweepConfig> sweep;
  std::uint64_t seed = 0;
  std::size_t n_rounds = 300;
  /// Dataset written by `simulate` and read by `estimate`.
  std::optional<std::filesystem::path> dataset_path;
  std::optional<std::filesystem::path> sweep_path;
  std::optional<std::filesystem::path> estimate_path;
  std::optional<std::filesystem::path> oracle_path;

  bool is_tabular() const { return std::holds_alternative<TabularEnvironment<double>>(environment); }
};

/// Parses a JSON run configuration. Throws ParseError on malformed JSON or
/// wrong types and ConfigError when values break their invariants.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// One JSON object per line:
///   {"schema_version":1,"context":..,"features":[[..]],"action":..,"reward":..,
///    "logging_propensities":[..]}
/// "features" is omitted for tabular records. Numbers are written in their
/// shortest round-trip decimal form, so reading back reproduces every double.
void write_dataset(std::ostream& out, const Dataset& dataset);
/// Throws ParseError naming the 1-based line of the first bad record.
Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

/// Metadata block of `# key: value` lines followed by kSweepCsvColumns and one
/// row per grid point per estimator (cips first).
void write_sweep_csv(std::ostream& out, const SweepResult& result);

void write_bias_csv(std::ostream& out, const oracle::BiasReport<double>& report);

std::string to_string(EstimatorKind kind);
/// %.17g, with "inf" for infinities.
std::string format_number(double value);

}  // namespace clipope::io
