#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "clipope/error.hpp"
#include "clipope/softmax.hpp"

namespace clipope {

/// Finite contexts and actions with every probability known exactly.
///
/// Tables are contexts x actions. `target_table` is the default target policy;
/// the oracle functions also accept any other table of the same shape.
template <typename Scalar = double>
struct TabularEnvironment {
  using Vector = VectorX<Scalar>;
  using Table = MatrixX<Scalar>;

  Vector context_probs;
  Table logging_table;
  Table target_table;
  /// E[r | x, y] >= 0.
  Table expected_rewards;

  Eigen::Index num_contexts() const { return context_probs.size(); }
  Eigen::Index num_actions() const { return logging_table.cols(); }

  template <typename NewScalar>
  TabularEnvironment<NewScalar> cast() const {
    return {context_probs.template cast<NewScalar>(), logging_table.template cast<NewScalar>(),
            target_table.template cast<NewScalar>(), expected_rewards.template cast<NewScalar>()};
  }
};

namespace detail {

template <typename Scalar, typename Derived>
void check_distribution(const Eigen::MatrixBase<Derived>& p, const std::string& what) {
  if (!p.allFinite() || (p.array() < Scalar(0)).any()) {
    throw ConfigError(what + " has negative or non-finite entries");
  }
  using std::abs;
  if (abs(p.sum() - Scalar(1)) > Scalar(1e-12)) {
    throw ConfigError(what + " does not sum to 1");
  }
}

}  // namespace detail

/// Throws ConfigError on a malformed policy table (shape, entries, normalization)
/// and OverlapError when pi0(y|x) == 0 < pi(y|x).
template <typename Scalar>
void validate_policy_table(const TabularEnvironment<Scalar>& env,
                           const typename TabularEnvironment<Scalar>::Table& policy,
                           const std::string& name) {
  if (policy.rows() != env.num_contexts() || policy.cols() != env.num_actions()) {
    throw ConfigError(name + " table has the wrong shape");
  }
  for (Eigen::Index x = 0; x < policy.rows(); ++x) {
    detail::check_distribution<Scalar>(policy.row(x), name + " row " + std::to_string(x));
    for (Eigen::Index y = 0; y < policy.cols(); ++y) {
      if (policy(x, y) > Scalar(0) && !(env.logging_table(x, y) > Scalar(0))) {
        throw OverlapError("context " + std::to_string(x) + ", action " + std::to_string(y) +
                           ": " + name + " plays an action the logging policy never plays");
      }
    }
  }
}

template <typename Scalar>
void validate(const TabularEnvironment<Scalar>& env) {
  if (env.num_contexts() < 1 || env.num_actions() < 1) {
    throw ConfigError("tabular environment needs at least one context and one action");
  }
  detail::check_distribution<Scalar>(env.context_probs, "context distribution");
  if (env.logging_table.rows() != env.num_contexts()) {
    throw ConfigError("logging table has the wrong shape");
  }
  for (Eigen::Index x = 0; x < env.num_contexts(); ++x) {
    detail::check_distribution<Scalar>(env.logging_table.row(x),
                                       "logging row " + std::to_string(x));
  }
  if (env.expected_rewards.rows() != env.num_contexts() ||
      env.expected_rewards.cols() != env.num_actions()) {
    throw ConfigError("expected reward table has the wrong shape");
  }
  if (!env.expected_rewards.allFinite() || (env.expected_rewards.array() < Scalar(0)).any()) {
    throw ConfigError("expected rewards must be finite and non-negative");
  }
  validate_policy_table(env, env.target_table, "target");
}

}  // namespace clipope
