#include "clipope/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "clipope/core.hpp"
#include "clipope/oracle.hpp"

namespace clipope {

namespace {

struct Repetition {
  Dataset dataset;
  std::vector<ImportanceWeight> weights;
};

using RepetitionFactory = std::function<Repetition(std::size_t)>;

/// Runs body(k) for k in [0, count) on up to `threads` workers. The first
/// exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) {
      body(k);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
          next = count;
        }
      }
    });
  }
  workers.clear();
  if (failure) {
    std::rethrow_exception(failure);
  }
}

EstimatorSummary summarize(const Eigen::VectorXd& column, double truth) {
  std::span<const double> values(column.data(), static_cast<std::size_t>(column.size()));
  const ErrorDecomposition parts = decompose_error(values, truth);
  EstimatorSummary s;
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  s.mean_estimate = sum / static_cast<double>(values.size());
  s.std_error = standard_error(values);
  s.bias_sq = parts.bias_sq;
  s.variance = parts.variance;
  s.mse = parts.mse;
  return s;
}

SweepResult sweep(const RepetitionFactory& make_repetition, const SweepConfig& cfg, double truth,
                  double truth_se, std::uint64_t master_seed) {
  const auto reps = static_cast<Eigen::Index>(cfg.repetitions);
  const auto points = static_cast<Eigen::Index>(cfg.grid.size());
  SweepResult result;
  result.master_seed = master_seed;
  result.n_rounds = cfg.n_rounds;
  result.repetitions = cfg.repetitions;
  result.true_reward = truth;
  result.true_reward_se = truth_se;
  result.cips_estimates.resize(reps, points);
  result.dcips_estimates.resize(reps, points);
  result.logging_means.resize(reps);

  // Each repetition writes only its own row.
  parallel_for(cfg.repetitions, cfg.threads, [&](std::size_t k) {
    const Repetition rep = make_repetition(k);
    const auto row = static_cast<Eigen::Index>(k);
    result.logging_means[row] = logging_mean(rep.dataset).value;
    for (Eigen::Index g = 0; g < points; ++g) {
      const ClipConfig& clip = cfg.grid[static_cast<std::size_t>(g)];
      result.cips_estimates(row, g) = cips(rep.dataset, rep.weights, clip.upper).value;
      result.dcips_estimates(row, g) = dcips(rep.dataset, rep.weights, clip).value;
    }
  });

  double sum = 0.0;
  for (Eigen::Index k = 0; k < reps; ++k) {
    sum += result.logging_means[k];
  }
  result.logging_mean_of_means = sum / static_cast<double>(reps);

  result.points.reserve(cfg.grid.size());
  for (Eigen::Index g = 0; g < points; ++g) {
    SweepPoint p;
    p.clip = cfg.grid[static_cast<std::size_t>(g)];
    p.cips = summarize(result.cips_estimates.col(g), truth);
    p.dcips = summarize(result.dcips_estimates.col(g), truth);
    result.points.push_back(p);
  }
  return result;
}

}  // namespace

void SweepConfig::validate() const {
  if (grid.empty()) {
    throw ConfigError("sweep grid is empty");
  }
  if (repetitions < 2) {
    throw ConfigError("sweep needs at least two repetitions");
  }
  if (n_rounds < 1) {
    throw ConfigError("sweep needs at least one round per repetition");
  }
  if (mode == GridMode::kUnison) {
    for (const ClipConfig& c : grid) {
      if (!(c.upper == c.lower)) {
        throw ConfigError("unison grid requires U == L at every point");
      }
    }
  }
}

std::vector<ClipConfig> log_unison_grid(double lo, double hi, std::size_t points) {
  if (!(lo >= 1.0) || !(hi >= lo) || !std::isfinite(hi) || points < 1) {
    throw ConfigError("log grid needs 1 <= lo <= hi < inf and at least one point");
  }
  std::vector<ClipConfig> grid;
  grid.reserve(points);
  if (points == 1) {
    grid.push_back(ClipConfig::unison(lo));
    return grid;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i) {
    double c;
    if (i == 0) {
      c = lo;
    } else if (i + 1 == points) {
      c = hi;
    } else {
      c = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    grid.push_back(ClipConfig::unison(c));
  }
  return grid;
}

SweepConfig paper_sweep_config() {
  SweepConfig cfg;
  cfg.grid = log_unison_grid(1.0, 100.0, 25);
  return cfg;
}

double standard_error(std::span<const double> estimates) {
  if (estimates.size() < 2) {
    throw InputError("standard error needs at least two estimates");
  }
  const auto k = static_cast<double>(estimates.size());
  double sum = 0.0;
  for (double e : estimates) {
    sum += e;
  }
  const double mean = sum / k;
  double spread = 0.0;
  for (double e : estimates) {
    spread += (e - mean) * (e - mean);
  }
  return std::sqrt(spread / (k - 1.0)) / std::sqrt(k);
}

bool operator==(const SweepResult& a, const SweepResult& b) {
  const auto same_summary = [](const EstimatorSummary& x, const EstimatorSummary& y) {
    return x.mean_estimate == y.mean_estimate && x.std_error == y.std_error &&
           x.bias_sq == y.bias_sq && x.variance == y.variance && x.mse == y.mse;
  };
  if (a.points.size() != b.points.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (!(a.points[i].clip == b.points[i].clip) ||
        !same_summary(a.points[i].cips, b.points[i].cips) ||
        !same_summary(a.points[i].dcips, b.points[i].dcips)) {
      return false;
    }
  }
  return a.true_reward == b.true_reward && a.true_reward_se == b.true_reward_se &&
         a.logging_mean_of_means == b.logging_mean_of_means && a.master_seed == b.master_seed &&
         a.n_rounds == b.n_rounds && a.repetitions == b.repetitions &&
         a.cips_estimates == b.cips_estimates && a.dcips_estimates == b.dcips_estimates &&
         a.logging_means == b.logging_means;
}

SweepResult run_sweep(const GaussianFeatureEnv& env, const LinearSoftmaxPolicy& logging_policy,
                      const LinearSoftmaxPolicy& target_policy, const SweepConfig& cfg,
                      std::uint64_t master_seed) {
  cfg.validate();
  env.validate();
  const MonteCarloValue truth = true_reward_mc(env, target_policy, cfg.true_reward_samples,
                                               Seed{master_seed, kTruthStream});
  const auto make = [&](std::size_t k) {
    Dataset d = simulate(env, logging_policy, cfg.n_rounds, Seed{master_seed, k});
    std::vector<double> props = evaluate_target_propensities(d, target_policy);
    std::vector<ImportanceWeight> w = importance_weights(d, props);
    return Repetition{std::move(d), std::move(w)};
  };
  return sweep(make, cfg, truth.value, truth.standard_error, master_seed);
}

SweepResult run_sweep(const TabularEnvironment<double>& env, const SweepConfig& cfg,
                      std::uint64_t master_seed) {
  cfg.validate();
  validate(env);
  const double truth = oracle::exact_true_reward(env);
  const auto make = [&](std::size_t k) {
    Dataset d = tabular_simulate(env, cfg.n_rounds, Seed{master_seed, k});
    std::vector<double> props = evaluate_target_propensities(d, env.target_table);
    std::vector<ImportanceWeight> w = importance_weights(d, props);
    return Repetition{std::move(d), std::move(w)};
  };
  return sweep(make, cfg, truth, 0.0, master_seed);
}

}  // namespace clipope
