#include "clipope/synth.hpp"

#include <string>

namespace clipope {

namespace {

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

void GaussianFeatureEnv::validate() const {
  if (num_actions < 2) {
    throw ConfigError("environment needs at least two actions");
  }
  if (feature_dim != num_actions) {
    throw ConfigError("feature dimension must equal the number of actions");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("feature noise sigma must be positive");
  }
  if (static_cast<std::size_t>(reward_weights.size()) != feature_dim) {
    throw ConfigError("reward weights must have one entry per feature");
  }
}

GaussianFeatureEnv paper_environment() {
  GaussianFeatureEnv env;
  env.reward_weights = Eigen::VectorXd::Zero(8);
  env.reward_weights[1] = 0.5;
  env.reward_weights[3] = 0.5;
  return env;
}

LinearSoftmaxPolicy paper_logging_policy() {
  return {Eigen::VectorXd::LinSpaced(8, 1.0, 8.0) / 9.0};
}

LinearSoftmaxPolicy paper_target_policy() {
  return {Eigen::VectorXd::LinSpaced(8, 8.0, 1.0) / 9.0};
}

Eigen::VectorXd softmax_propensities(const LinearSoftmaxPolicy& policy,
                                     const FeatureMatrix& features) {
  if (features.cols() != policy.weights.size()) {
    throw InputError("policy has " + std::to_string(policy.weights.size()) +
                     " weights but features have dimension " + std::to_string(features.cols()));
  }
  return softmax(features * policy.weights);
}

FeatureMatrix sample_features(const GaussianFeatureEnv& env, Rng& rng) {
  const auto rows = static_cast<Eigen::Index>(env.num_actions);
  const auto cols = static_cast<Eigen::Index>(env.feature_dim);
  std::normal_distribution<double> noise(0.0, env.sigma);
  FeatureMatrix phi(rows, cols);
  // Row-major fill so the draw order does not depend on the storage order.
  for (Eigen::Index j = 0; j < rows; ++j) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      phi(j, k) = (j == k ? 1.0 : 0.0) + noise(rng);
    }
  }
  return phi;
}

FeatureMatrix sample_features(const GaussianFeatureEnv& env, const Seed& seed) {
  env.validate();
  Rng rng = make_rng(seed);
  return sample_features(env, rng);
}

double realize_reward(const Eigen::Ref<const Eigen::VectorXd>& features_row,
                      const Eigen::Ref<const Eigen::VectorXd>& reward_weights) {
  if (features_row.size() != reward_weights.size()) {
    throw InputError("feature row and reward weights differ in dimension");
  }
  return features_row.dot(reward_weights) > 0.0 ? 1.0 : 0.0;
}

std::size_t sample_action(const Eigen::Ref<const Eigen::VectorXd>& probs, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  Eigen::Index last_supported = 0;
  for (Eigen::Index j = 0; j < probs.size(); ++j) {
    if (probs[j] > 0.0) {
      last_supported = j;
    }
    cumulative += probs[j];
    if (u < cumulative) {
      return static_cast<std::size_t>(j);
    }
  }
  // Rounding left the cumulative sum just short of 1.
  return static_cast<std::size_t>(last_supported);
}

Dataset simulate(const GaussianFeatureEnv& env, const LinearSoftmaxPolicy& logging_policy,
                 std::size_t n, const Seed& seed) {
  env.validate();
  if (n < 1) {
    throw ConfigError("number of rounds must be at least 1");
  }
  if (static_cast<std::size_t>(logging_policy.weights.size()) != env.feature_dim) {
    throw InputError("logging policy dimension does not match the environment");
  }
  Rng rng = make_rng(seed);
  std::vector<LogRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureMatrix phi = sample_features(env, rng);
    Eigen::VectorXd probs = softmax_propensities(logging_policy, phi);
    const std::size_t action = sample_action(probs, rng);
    LogRecord r;
    r.context_id = i;
    r.action = action;
    r.reward = realize_reward(phi.row(static_cast<Eigen::Index>(action)).transpose(),
                              env.reward_weights);
    r.logging_propensity = probs[static_cast<Eigen::Index>(action)];
    r.logging_propensities = std::move(probs);
    r.features = std::move(phi);
    records.push_back(std::move(r));
  }
  return Dataset(std::move(records));
}

std::vector<double> evaluate_target_propensities(const Dataset& dataset,
                                                 const LinearSoftmaxPolicy& target_policy) {
  std::vector<double> out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const LogRecord& r = dataset[i];
    if (!r.features) {
      throw InputError("record " + std::to_string(i) + " has no stored features");
    }
    out.push_back(softmax_propensities(target_policy, *r.features)[static_cast<Eigen::Index>(r.action)]);
  }
  return out;
}

std::vector<double> evaluate_target_propensities(const Dataset& dataset,
                                                 const Eigen::MatrixXd& target_table) {
  std::vector<double> out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const LogRecord& r = dataset[i];
    if (r.context_id >= static_cast<std::size_t>(target_table.rows()) ||
        r.action >= static_cast<std::size_t>(target_table.cols())) {
      throw InputError("record " + std::to_string(i) + " lies outside the target table");
    }
    out.push_back(target_table(static_cast<Eigen::Index>(r.context_id),
                               static_cast<Eigen::Index>(r.action)));
  }
  return out;
}

MonteCarloValue true_reward_mc(const GaussianFeatureEnv& env, const LinearSoftmaxPolicy& policy,
                               std::size_t num_samples, const Seed& seed) {
  env.validate();
  if (num_samples < 1) {
    throw ConfigError("Monte Carlo truth needs at least one sample");
  }
  Rng rng = make_rng(seed);
  // Welford running mean and sum of squared deviations.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < num_samples; ++s) {
    const FeatureMatrix phi = sample_features(env, rng);
    const Eigen::VectorXd probs = softmax_propensities(policy, phi);
    const Eigen::VectorXd dots = phi * env.reward_weights;
    const double v = (dots.array() > 0.0).select(probs.array(), 0.0).sum();
    const double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  MonteCarloValue out;
  out.value = mean;
  if (num_samples > 1) {
    const double k = static_cast<double>(num_samples);
    out.standard_error = std::sqrt(m2 / (k - 1.0) / k);
  }
  return out;
}

Dataset tabular_simulate(const TabularEnvironment<double>& env, std::size_t n, const Seed& seed) {
  validate(env);
  if (n < 1) {
    throw ConfigError("number of rounds must be at least 1");
  }
  if ((env.expected_rewards.array() > 1.0).any()) {
    throw ConfigError("Bernoulli rewards need expected rewards in [0, 1]");
  }
  Rng rng = make_rng(seed);
  std::vector<LogRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = sample_action(env.context_probs, rng);
    const auto xi = static_cast<Eigen::Index>(x);
    Eigen::VectorXd probs = env.logging_table.row(xi).transpose();
    const std::size_t y = sample_action(probs, rng);
    const auto yi = static_cast<Eigen::Index>(y);
    LogRecord r;
    r.context_id = x;
    r.action = y;
    r.reward = uniform01(rng) < env.expected_rewards(xi, yi) ? 1.0 : 0.0;
    r.logging_propensity = probs[yi];
    r.logging_propensities = std::move(probs);
    records.push_back(std::move(r));
  }
  return Dataset(std::move(records));
}

}  // namespace clipope
