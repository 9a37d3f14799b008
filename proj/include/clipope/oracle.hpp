#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "clipope/clip.hpp"
#include "clipope/tabular.hpp"

/// Exact expectations on tabular environments, by enumerating every
/// (context, action) cell. All routines are templated on the scalar so the
/// same enumeration can be replayed in extended precision.
namespace clipope::oracle {

template <typename Scalar>
using Table = typename TabularEnvironment<Scalar>::Table;

/// Contribution of one cell to the bias, already weighted by P(x).
template <typename Scalar>
struct CellBias {
  std::size_t context = 0;
  std::size_t action = 0;
  Scalar upper = 0;
  Scalar lower = 0;
};

/// Bias = E[estimate] - R(pi), split into the upper-clipping part (<= 0) and
/// the lower-clipping part (>= 0).
template <typename Scalar>
struct BiasReport {
  Scalar bias_total = 0;
  Scalar upper_term = 0;
  Scalar lower_term = 0;
  std::vector<CellBias<Scalar>> per_cell;
};

template <typename Scalar>
struct IdentityCheck {
  Scalar lhs = 0;
  Scalar rhs = 0;
  Scalar abs_diff = 0;
};

namespace detail {

template <typename Scalar>
void require_overlap(Scalar logging, Scalar target, Eigen::Index x, Eigen::Index y) {
  if (target > Scalar(0) && !(logging > Scalar(0))) {
    throw OverlapError("context " + std::to_string(x) + ", action " + std::to_string(y) +
                       ": target policy plays an action without logging support");
  }
}

template <typename Scalar>
void require_shape(const TabularEnvironment<Scalar>& env, const Table<Scalar>& table) {
  if (table.rows() != env.num_contexts() || table.cols() != env.num_actions()) {
    throw InputError("table shape does not match the environment");
  }
}

}  // namespace detail

/// R(pi) = sum_x P(x) sum_y pi(y|x) E[r|x,y].
template <typename Scalar>
Scalar exact_true_reward(const TabularEnvironment<Scalar>& env, const Table<Scalar>& target) {
  detail::require_shape(env, target);
  Scalar total = 0;
  for (Eigen::Index x = 0; x < env.num_contexts(); ++x) {
    Scalar inner = 0;
    for (Eigen::Index y = 0; y < env.num_actions(); ++y) {
      inner += target(x, y) * env.expected_rewards(x, y);
    }
    total += env.context_probs[x] * inner;
  }
  return total;
}

template <typename Scalar>
Scalar exact_true_reward(const TabularEnvironment<Scalar>& env) {
  return exact_true_reward(env, env.target_table);
}

/// Mean reward of the logging policy, the U = L = 1 limit of the double-clipped estimator.
template <typename Scalar>
Scalar exact_logging_reward(const TabularEnvironment<Scalar>& env) {
  return exact_true_reward(env, env.logging_table);
}

/// Expectation of a single-sample clipped estimate:
/// sum_x P(x) sum_y pi0(y|x) E[r|x,y] max(min(w, U), 1/L).
/// With both constants unbounded this is plain IPS.
template <typename Scalar>
Scalar exact_expected_estimate(const TabularEnvironment<Scalar>& env, const Table<Scalar>& target,
                               const ClipConfig& clip) {
  detail::require_shape(env, target);
  Scalar total = 0;
  for (Eigen::Index x = 0; x < env.num_contexts(); ++x) {
    Scalar inner = 0;
    for (Eigen::Index y = 0; y < env.num_actions(); ++y) {
      const Scalar p0 = env.logging_table(x, y);
      const Scalar p = target(x, y);
      detail::require_overlap(p0, p, x, y);
      if (!(p0 > Scalar(0))) {
        continue;  // never logged
      }
      inner += p0 * env.expected_rewards(x, y) * effective_weight(p / p0, clip);
    }
    total += env.context_probs[x] * inner;
  }
  return total;
}

template <typename Scalar>
Scalar exact_expected_estimate(const TabularEnvironment<Scalar>& env, const ClipConfig& clip) {
  return exact_expected_estimate(env, env.target_table, clip);
}

/// Bias of the double-clipped estimator, summed under the target policy:
///   upper: E_x E_{y~pi}[1{w > U} (U/w - 1) E[r|x,y]]
///   lower: E_x E_{y~pi}[1{w L < 1} (1/(w L) - 1) E[r|x,y]]
/// A cell with pi(y|x) = 0 has w = 0; its lower contribution is taken at the
/// limit pi (1/(w L) - 1) -> pi0(y|x) / L.
template <typename Scalar>
BiasReport<Scalar> bias_dcips_exact(const TabularEnvironment<Scalar>& env,
                                    const Table<Scalar>& target, const ClipConfig& clip) {
  detail::require_shape(env, target);
  const Scalar upper = static_cast<Scalar>(clip.upper.value());
  const Scalar lower = static_cast<Scalar>(clip.lower.value());
  BiasReport<Scalar> report;
  for (Eigen::Index x = 0; x < env.num_contexts(); ++x) {
    for (Eigen::Index y = 0; y < env.num_actions(); ++y) {
      const Scalar p0 = env.logging_table(x, y);
      const Scalar p = target(x, y);
      detail::require_overlap(p0, p, x, y);
      if (!(p0 > Scalar(0))) {
        continue;
      }
      const Scalar px = env.context_probs[x];
      const Scalar reward = env.expected_rewards(x, y);
      const Scalar w = p / p0;
      CellBias<Scalar> cell{static_cast<std::size_t>(x), static_cast<std::size_t>(y), 0, 0};
      if (clip.upper.bounded() && w > upper) {
        cell.upper = px * p * (upper / w - Scalar(1)) * reward;
      }
      if (clip.lower.bounded() && w * lower < Scalar(1)) {
        cell.lower = p > Scalar(0) ? px * p * (Scalar(1) / (w * lower) - Scalar(1)) * reward
                                   : px * p0 / lower * reward;
      }
      report.upper_term += cell.upper;
      report.lower_term += cell.lower;
      report.per_cell.push_back(cell);
    }
  }
  report.bias_total = report.upper_term + report.lower_term;
  return report;
}

template <typename Scalar>
BiasReport<Scalar> bias_dcips_exact(const TabularEnvironment<Scalar>& env, const ClipConfig& clip) {
  return bias_dcips_exact(env, env.target_table, clip);
}

/// Bias of the upper-clipped estimator; lower_term is always 0.
template <typename Scalar>
BiasReport<Scalar> bias_cips_exact(const TabularEnvironment<Scalar>& env,
                                   const Table<Scalar>& target, const ClipConstant& upper) {
  return bias_dcips_exact(env, target, ClipConfig{upper, ClipConstant::unbounded()});
}

template <typename Scalar>
BiasReport<Scalar> bias_cips_exact(const TabularEnvironment<Scalar>& env,
                                   const ClipConstant& upper) {
  return bias_cips_exact(env, env.target_table, upper);
}

/// Both sides of E_{y~pi0}[f w] = E_{y~pi}[f], each averaged over P(x).
template <typename Scalar>
IdentityCheck<Scalar> check_is_identity(const TabularEnvironment<Scalar>& env,
                                        const Table<Scalar>& target, const Table<Scalar>& f) {
  detail::require_shape(env, target);
  detail::require_shape(env, f);
  IdentityCheck<Scalar> out;
  for (Eigen::Index x = 0; x < env.num_contexts(); ++x) {
    Scalar lhs = 0;
    Scalar rhs = 0;
    for (Eigen::Index y = 0; y < env.num_actions(); ++y) {
      const Scalar p0 = env.logging_table(x, y);
      const Scalar p = target(x, y);
      detail::require_overlap(p0, p, x, y);
      if (p0 > Scalar(0)) {
        lhs += p0 * f(x, y) * (p / p0);
      }
      rhs += p * f(x, y);
    }
    out.lhs += env.context_probs[x] * lhs;
    out.rhs += env.context_probs[x] * rhs;
  }
  using std::abs;
  out.abs_diff = abs(out.lhs - out.rhs);
  return out;
}

/// Piecewise form of the clipped weight:
///   1{w > U} U + 1{1/L <= w <= U} w + 1{w < 1/L} (1/L).
/// Boundary values stay in the middle piece.
template <typename Scalar>
Scalar clip_decomposition(Scalar w, const ClipConfig& clip) {
  const bool above = clip.upper.bounded() && w > static_cast<Scalar>(clip.upper.value());
  const bool below =
      clip.lower.bounded() && w < Scalar(1) / static_cast<Scalar>(clip.lower.value());
  const Scalar indicator_above = above ? Scalar(1) : Scalar(0);
  const Scalar indicator_inside = (!above && !below) ? Scalar(1) : Scalar(0);
  const Scalar indicator_below = below ? Scalar(1) : Scalar(0);
  Scalar out = indicator_inside * w;
  if (above) {
    out += indicator_above * static_cast<Scalar>(clip.upper.value());
  }
  if (below) {
    out += indicator_below * (Scalar(1) / static_cast<Scalar>(clip.lower.value()));
  }
  return out;
}

/// True when max(min(w, U), 1/L) equals its piecewise decomposition exactly.
template <typename Scalar>
bool check_clip_decomposition(Scalar w, const ClipConfig& clip) {
  return effective_weight(w, clip) == clip_decomposition(w, clip);
}

}  // namespace clipope::oracle
