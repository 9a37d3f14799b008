#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "clipope/core.hpp"
#include "clipope/tabular.hpp"

namespace clipope::testing {

/// Random distribution over n outcomes with every entry >= floor before
/// normalization. Entries are renormalized so the sum is 1 within a few ulps.
inline Eigen::VectorXd random_distribution(std::mt19937_64& rng, Eigen::Index n, double floor = 1e-3) {
  std::exponential_distribution<double> draw(1.0);
  Eigen::VectorXd p(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p[i] = floor + draw(rng);
  }
  return p / p.sum();
}

/// Full-support tabular environment with <= max_contexts x max_actions cells
/// and expected rewards in [0, 1].
inline TabularEnvironment<double> random_tabular(std::mt19937_64& rng, int max_contexts = 5,
                                                 int max_actions = 8) {
  std::uniform_int_distribution<int> contexts(1, max_contexts);
  std::uniform_int_distribution<int> actions(2, max_actions);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index nx = contexts(rng);
  const Eigen::Index ny = actions(rng);
  TabularEnvironment<double> env;
  env.context_probs = random_distribution(rng, nx);
  env.logging_table.resize(nx, ny);
  env.target_table.resize(nx, ny);
  env.expected_rewards.resize(nx, ny);
  for (Eigen::Index x = 0; x < nx; ++x) {
    // Skewed policies so that weights span well below and above 1.
    env.logging_table.row(x) = random_distribution(rng, ny, 0.01 * unit(rng)).transpose();
    env.target_table.row(x) = random_distribution(rng, ny, 0.01 * unit(rng)).transpose();
    for (Eigen::Index y = 0; y < ny; ++y) {
      env.expected_rewards(x, y) = unit(rng);
    }
  }
  return env;
}

/// The single-context, two-action environment used as the worked example:
/// pi0 = (0.9, 0.1), pi = (0.5, 0.5), E[r] = (1, 1).
inline TabularEnvironment<double> worked_example() {
  TabularEnvironment<double> env;
  env.context_probs = Eigen::VectorXd::Ones(1);
  env.logging_table.resize(1, 2);
  env.logging_table << 0.9, 0.1;
  env.target_table.resize(1, 2);
  env.target_table << 0.5, 0.5;
  env.expected_rewards.resize(1, 2);
  env.expected_rewards << 1.0, 1.0;
  return env;
}

struct WeightedDataset {
  Dataset dataset;
  std::vector<ImportanceWeight> weights;
};

/// Random dataset of 1..max_n records with non-negative rewards (some zero)
/// and weights spread over several orders of magnitude.
inline WeightedDataset random_weighted_dataset(std::mt19937_64& rng, int max_n = 50) {
  std::uniform_int_distribution<int> size(1, max_n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> log_w(-3.0, 3.0);
  const int n = size(rng);
  std::vector<LogRecord> records;
  std::vector<ImportanceWeight> weights;
  for (int i = 0; i < n; ++i) {
    LogRecord r;
    r.context_id = static_cast<std::size_t>(i);
    r.reward = unit(rng) < 0.2 ? 0.0 : 5.0 * unit(rng);
    r.logging_propensity = 0.01 + 0.99 * unit(rng);
    records.push_back(r);
    weights.push_back({unit(rng) < 0.05 ? 0.0 : std::pow(10.0, log_w(rng))});
  }
  return {Dataset(std::move(records)), std::move(weights)};
}

/// Dataset from explicit (reward, propensity) pairs.
inline Dataset make_dataset(const std::vector<std::pair<double, double>>& rows) {
  std::vector<LogRecord> records;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    LogRecord r;
    r.context_id = i;
    r.reward = rows[i].first;
    r.logging_propensity = rows[i].second;
    records.push_back(r);
  }
  return Dataset(std::move(records));
}

}  // namespace clipope::testing
