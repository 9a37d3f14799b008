#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "clipope/clip.hpp"
#include "clipope/error.hpp"
#include "clipope/synth.hpp"
#include "clipope/tabular.hpp"

namespace clipope {

enum class GridMode {
  kUnison,    // U = L at every grid point
  kExplicit,  // arbitrary (U, L) pairs
};

struct SweepConfig {
  std::vector<ClipConfig> grid;
  std::size_t n_rounds = 300;
  std::size_t repetitions = 100;
  GridMode mode = GridMode::kUnison;
  std::size_t true_reward_samples = 1'000'000;
  /// Worker threads for the repetitions; 0 picks the hardware concurrency.
  unsigned threads = 0;

  /// Throws ConfigError on an empty grid, repetitions < 2, n_rounds < 1, or
  /// a unison grid point with U != L.
  void validate() const;
};

/// `points` values of U = L spaced evenly in log10 between lo and hi inclusive.
std::vector<ClipConfig> log_unison_grid(double lo, double hi, std::size_t points);

/// n = 300 rounds, 100 repetitions, 25 log-spaced U = L from 1 to 100, 10^6 truth samples.
SweepConfig paper_sweep_config();

struct ErrorDecomposition {
  double bias_sq = 0.0;
  double variance = 0.0;
  double mse = 0.0;
};

/// Population-style decomposition (divisor K), so mse == bias_sq + variance
/// up to rounding. Throws InputError for fewer than two estimates.
template <typename Scalar>
ErrorDecomposition decompose_error(std::span<const Scalar> estimates, Scalar truth) {
  if (estimates.size() < 2) {
    throw InputError("error decomposition needs at least two estimates");
  }
  if (!std::isfinite(static_cast<double>(truth))) {
    throw InputError("truth must be finite");
  }
  const auto k = static_cast<Scalar>(estimates.size());
  Scalar sum = 0;
  for (Scalar e : estimates) {
    sum += e;
  }
  const Scalar mean = sum / k;
  Scalar spread = 0;
  Scalar error = 0;
  for (Scalar e : estimates) {
    spread += (e - mean) * (e - mean);
    error += (e - truth) * (e - truth);
  }
  ErrorDecomposition out;
  out.bias_sq = static_cast<double>((mean - truth) * (mean - truth));
  out.variance = static_cast<double>(spread / k);
  out.mse = static_cast<double>(error / k);
  return out;
}

/// Sample standard deviation (divisor K - 1) over sqrt(K).
double standard_error(std::span<const double> estimates);

struct EstimatorSummary {
  double mean_estimate = 0.0;
  double std_error = 0.0;
  double bias_sq = 0.0;
  double variance = 0.0;
  double mse = 0.0;
};

struct SweepPoint {
  ClipConfig clip;
  EstimatorSummary cips;
  EstimatorSummary dcips;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double true_reward = 0.0;
  /// Zero when the truth is exact (tabular environments).
  double true_reward_se = 0.0;
  double logging_mean_of_means = 0.0;

  std::uint64_t master_seed = 0;
  std::size_t n_rounds = 0;
  std::size_t repetitions = 0;

  /// repetitions x grid points, row k from the dataset of stream k.
  Eigen::MatrixXd cips_estimates;
  Eigen::MatrixXd dcips_estimates;
  /// Logging mean of each repetition's dataset.
  Eigen::VectorXd logging_means;

  friend bool operator==(const SweepResult& a, const SweepResult& b);
};

/// Repetition k simulates a dataset from Seed{master_seed, k}; every grid point
/// is evaluated on the same K datasets. R(pi) is a Monte Carlo value drawn from
/// Seed{master_seed, kTruthStream}.
SweepResult run_sweep(const GaussianFeatureEnv& env, const LinearSoftmaxPolicy& logging_policy,
                      const LinearSoftmaxPolicy& target_policy, const SweepConfig& cfg,
                      std::uint64_t master_seed);

/// Tabular variant; R(pi) is the exact enumeration under env.target_table.
SweepResult run_sweep(const TabularEnvironment<double>& env, const SweepConfig& cfg,
                      std::uint64_t master_seed);

}  // namespace clipope
