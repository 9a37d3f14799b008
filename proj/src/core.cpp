#include "clipope/core.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace clipope {

namespace {

void validate_record(const LogRecord& r, std::size_t index) {
  const std::string where = "record " + std::to_string(index) + ": ";
  if (!(r.reward >= 0.0) || !std::isfinite(r.reward)) {
    throw InputError(where + "reward must be finite and non-negative");
  }
  if (!(r.logging_propensity > 0.0 && r.logging_propensity <= 1.0)) {
    throw InputError(where + "logging propensity must lie in (0, 1]");
  }
  if (r.logging_propensities.size() > 0) {
    if (r.action >= static_cast<std::size_t>(r.logging_propensities.size())) {
      throw InputError(where + "action outside the stored propensity vector");
    }
    if (r.logging_propensities[static_cast<Eigen::Index>(r.action)] != r.logging_propensity) {
      throw InputError(where + "logging propensity disagrees with the stored distribution");
    }
  }
  if (r.features && r.action >= static_cast<std::size_t>(r.features->rows())) {
    throw InputError(where + "action outside the feature matrix");
  }
}

void check_aligned(const Dataset& dataset, std::size_t n_weights) {
  if (dataset.empty()) {
    throw InputError("cannot estimate from an empty dataset");
  }
  if (dataset.size() != n_weights) {
    throw InputError("weights (" + std::to_string(n_weights) + ") not aligned with records (" +
                     std::to_string(dataset.size()) + ")");
  }
}

template <typename EffectiveWeight>
Estimate weighted_mean(const Dataset& dataset, std::span<const ImportanceWeight> weights,
                       const ClipConfig& clip, EffectiveWeight&& effective) {
  check_aligned(dataset, weights.size());
  Estimate out;
  double sum = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double w = weights[i].value;
    sum += dataset[i].reward * effective(w);
    switch (classify_weight(w, clip)) {
      case ClipSide::kAbove: ++out.clip_stats.clipped_above; break;
      case ClipSide::kBelow: ++out.clip_stats.clipped_below; break;
      case ClipSide::kInside: ++out.clip_stats.unclipped; break;
    }
  }
  out.n_used = dataset.size();
  out.value = sum / static_cast<double>(dataset.size());
  return out;
}

}  // namespace

Dataset::Dataset(std::vector<LogRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    validate_record(records_[i], i);
  }
}

ImportanceWeight importance_weight(double target_prop, double logging_prop) {
  if (!(logging_prop > 0.0)) {
    throw OverlapError("logging propensity " + std::to_string(logging_prop) +
                       " leaves the action without support");
  }
  if (logging_prop > 1.0 || !(target_prop >= 0.0 && target_prop <= 1.0)) {
    throw InputError("propensities must lie in [0, 1]");
  }
  return {target_prop / logging_prop};
}

std::vector<ImportanceWeight> importance_weights(const Dataset& dataset,
                                                 std::span<const double> target_propensities) {
  if (target_propensities.size() != dataset.size()) {
    throw InputError("target propensities not aligned with records");
  }
  std::vector<ImportanceWeight> out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out.push_back(importance_weight(target_propensities[i], dataset[i].logging_propensity));
  }
  return out;
}

Estimate ips(const Dataset& dataset, std::span<const ImportanceWeight> weights) {
  return weighted_mean(dataset, weights, ClipConfig::none(), [](double w) { return w; });
}

Estimate cips(const Dataset& dataset, std::span<const ImportanceWeight> weights,
              const ClipConstant& upper) {
  const ClipConfig clip{upper, ClipConstant::unbounded()};
  return weighted_mean(dataset, weights, clip,
                       [&clip](double w) { return effective_weight(w, clip); });
}

Estimate dcips(const Dataset& dataset, std::span<const ImportanceWeight> weights,
               const ClipConfig& clip) {
  return weighted_mean(dataset, weights, clip,
                       [&clip](double w) { return effective_weight(w, clip); });
}

Estimate logging_mean(const Dataset& dataset) {
  if (dataset.empty()) {
    throw InputError("cannot average an empty dataset");
  }
  Estimate out;
  double sum = 0.0;
  for (const auto& r : dataset) {
    sum += r.reward;
  }
  out.n_used = dataset.size();
  out.clip_stats.unclipped = dataset.size();
  out.value = sum / static_cast<double>(dataset.size());
  return out;
}

std::string to_string(const ClipConstant& c) {
  if (!c.bounded()) {
    return "inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", c.value());
  return buf;
}

}  // namespace clipope
