#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "clipope/core.hpp"
#include "clipope/rng.hpp"
#include "clipope/softmax.hpp"
#include "clipope/tabular.hpp"

namespace clipope {

/// Linear scoring policy: scores = features * weights, actions ~ softmax(scores).
struct LinearSoftmaxPolicy {
  Eigen::VectorXd weights;
};

/// Multi-armed bandit whose context is a fresh random feature matrix each round.
///
/// Row j of the feature matrix is drawn from N(one_hot(j), sigma^2 I), and the
/// reward of action j is 1 when row_j . reward_weights > 0, else 0.
struct GaussianFeatureEnv {
  std::size_t num_actions = 8;
  std::size_t feature_dim = 8;
  double sigma = 1.0;
  Eigen::VectorXd reward_weights;

  /// Throws ConfigError unless num_actions >= 2, feature_dim == num_actions,
  /// sigma > 0 and reward_weights has feature_dim entries.
  void validate() const;
};

/// 8 actions, sigma = 1, reward weights [0, 0.5, 0, 0.5, 0, 0, 0, 0].
GaussianFeatureEnv paper_environment();
/// weights [1/9, 2/9, ..., 8/9].
LinearSoftmaxPolicy paper_logging_policy();
/// weights [8/9, 7/9, ..., 1/9].
LinearSoftmaxPolicy paper_target_policy();

/// softmax(features * policy.weights). Throws InputError on a dimension mismatch.
Eigen::VectorXd softmax_propensities(const LinearSoftmaxPolicy& policy,
                                     const FeatureMatrix& features);

FeatureMatrix sample_features(const GaussianFeatureEnv& env, Rng& rng);
FeatureMatrix sample_features(const GaussianFeatureEnv& env, const Seed& seed);

/// 1 if features_row . reward_weights > 0 (strictly), else 0.
double realize_reward(const Eigen::Ref<const Eigen::VectorXd>& features_row,
                      const Eigen::Ref<const Eigen::VectorXd>& reward_weights);

/// Index drawn from a probability vector with one uniform variate.
std::size_t sample_action(const Eigen::Ref<const Eigen::VectorXd>& probs, Rng& rng);

/// n logged rounds of `logging_policy` in `env`. Each record keeps its feature
/// matrix and the full logging distribution; context_id is the round index.
Dataset simulate(const GaussianFeatureEnv& env, const LinearSoftmaxPolicy& logging_policy,
                 std::size_t n, const Seed& seed);

/// pi(y_i | Phi_i) for every record, recomputed from the stored features.
std::vector<double> evaluate_target_propensities(const Dataset& dataset,
                                                 const LinearSoftmaxPolicy& target_policy);

/// pi(y_i | x_i) looked up by context_id in a contexts x actions table.
std::vector<double> evaluate_target_propensities(const Dataset& dataset,
                                                 const Eigen::MatrixXd& target_table);

struct MonteCarloValue {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo R(pi) = E_Phi[sum_j pi(j|Phi) 1{phi_j . reward_weights > 0}].
/// Propensities and rewards share each draw of Phi.
MonteCarloValue true_reward_mc(const GaussianFeatureEnv& env, const LinearSoftmaxPolicy& policy,
                               std::size_t num_samples, const Seed& seed);

/// Samples x ~ context_probs, y ~ logging_table(x, .), r ~ Bernoulli(E[r|x,y]).
/// Throws ConfigError when an expected reward lies outside [0, 1].
Dataset tabular_simulate(const TabularEnvironment<double>& env, std::size_t n, const Seed& seed);

}  // namespace clipope
