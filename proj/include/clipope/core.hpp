#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "clipope/clip.hpp"
#include "clipope/error.hpp"

namespace clipope {

/// Feature matrix of one round: row j is the feature vector of action j.
using FeatureMatrix = Eigen::MatrixXd;

/// One logged interaction (x_i, y_i, r_i, pi0(.|x_i)).
struct LogRecord {
  /// Opaque context key. Tabular datasets use the context index; simulated
  /// bandit datasets use the round index.
  std::size_t context_id = 0;
  std::size_t action = 0;
  double reward = 0.0;
  /// pi0(action | context), in (0, 1].
  double logging_propensity = 1.0;
  /// Full logging distribution pi0(.|context); empty when not recorded.
  Eigen::VectorXd logging_propensities;
  /// Action features of the round; absent for tabular contexts.
  std::optional<FeatureMatrix> features;
};

/// Immutable, validated sequence of log records.
class Dataset {
 public:
  Dataset() = default;
  /// Throws InputError when a record breaks reward >= 0, 0 < propensity <= 1,
  /// or is inconsistent with its own stored propensity vector.
  explicit Dataset(std::vector<LogRecord> records);

  std::span<const LogRecord> records() const noexcept { return records_; }
  const LogRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

 private:
  std::vector<LogRecord> records_;
};

/// w = pi(y|x) / pi0(y|x). Zero is legal (target never plays the action).
struct ImportanceWeight {
  double value = 1.0;

  friend bool operator==(const ImportanceWeight&, const ImportanceWeight&) = default;
};

struct ClipStats {
  std::size_t clipped_above = 0;
  std::size_t clipped_below = 0;
  std::size_t unclipped = 0;
};

struct Estimate {
  double value = 0.0;
  std::size_t n_used = 0;
  ClipStats clip_stats;
};

/// Throws OverlapError when logging_prop <= 0 and InputError when either
/// propensity lies outside [0, 1].
ImportanceWeight importance_weight(double target_prop, double logging_prop);

/// Weights for every record given the target propensity of each logged action.
std::vector<ImportanceWeight> importance_weights(const Dataset& dataset,
                                                 std::span<const double> target_propensities);

// The estimators below sum in record order. Anything that reduces in a
// different order (pairwise, parallel) must be compared at 1e-12, not exactly.

/// (1/n) sum r_i w_i.
Estimate ips(const Dataset& dataset, std::span<const ImportanceWeight> weights);

/// (1/n) sum r_i min(w_i, U).
Estimate cips(const Dataset& dataset, std::span<const ImportanceWeight> weights,
              const ClipConstant& upper);

/// (1/n) sum r_i max(min(w_i, U), 1/L).
Estimate dcips(const Dataset& dataset, std::span<const ImportanceWeight> weights,
               const ClipConfig& clip);

/// (1/n) sum r_i, the reward the logging policy actually collected.
Estimate logging_mean(const Dataset& dataset);

}  // namespace clipope
