#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "clipope/error.hpp"

namespace clipope {

/// A clipping constant that is either a finite real >= 1 or explicitly unbounded.
///
/// Unbounded is a distinct state rather than a large float: an unbounded upper
/// constant never touches a weight and an unbounded lower constant never lifts
/// one, so the nesting identities between the estimators hold bit for bit.
class ClipConstant {
 public:
  static constexpr ClipConstant unbounded() noexcept { return ClipConstant(); }

  /// Accepts any value >= 1; `+inf` maps to the unbounded state.
  explicit ClipConstant(double value) : value_(value), bounded_(true) {
    if (std::isnan(value) || value < 1.0) {
      throw ConfigError("clipping constant must be >= 1, got " + std::to_string(value));
    }
    if (std::isinf(value)) {
      bounded_ = false;
    }
  }

  constexpr bool bounded() const noexcept { return bounded_; }

  /// The constant, or +inf when unbounded.
  constexpr double value() const noexcept {
    return bounded_ ? value_ : std::numeric_limits<double>::infinity();
  }

  friend constexpr bool operator==(const ClipConstant& a, const ClipConstant& b) noexcept {
    return a.bounded_ == b.bounded_ && (!a.bounded_ || a.value_ == b.value_);
  }

 private:
  constexpr ClipConstant() noexcept : value_(0.0), bounded_(false) {}

  double value_;
  bool bounded_;
};

/// Upper constant U and lower constant L. Weights are confined to [1/L, U].
///
/// Both constants are >= 1, which implies U >= 1/L.
struct ClipConfig {
  ClipConstant upper = ClipConstant::unbounded();
  ClipConstant lower = ClipConstant::unbounded();

  static ClipConfig none() { return {}; }
  static ClipConfig upper_only(double u) { return {ClipConstant(u), ClipConstant::unbounded()}; }
  static ClipConfig both(double u, double l) { return {ClipConstant(u), ClipConstant(l)}; }
  /// U = L = c, the single-knob heuristic.
  static ClipConfig unison(double c) { return both(c, c); }

  friend bool operator==(const ClipConfig&, const ClipConfig&) = default;
};

enum class ClipSide { kBelow, kInside, kAbove };

/// Which region of [1/L, U] a raw weight falls in. Boundary values count as inside.
template <typename Scalar>
ClipSide classify_weight(Scalar w, const ClipConfig& clip) {
  if (clip.upper.bounded() && w > static_cast<Scalar>(clip.upper.value())) {
    return ClipSide::kAbove;
  }
  if (clip.lower.bounded() && w < Scalar(1) / static_cast<Scalar>(clip.lower.value())) {
    return ClipSide::kBelow;
  }
  return ClipSide::kInside;
}

/// max(min(w, U), 1/L), with unbounded constants leaving the weight untouched.
template <typename Scalar>
Scalar effective_weight(Scalar w, const ClipConfig& clip) {
  Scalar out = w;
  if (clip.upper.bounded()) {
    out = std::min(out, static_cast<Scalar>(clip.upper.value()));
  }
  if (clip.lower.bounded()) {
    out = std::max(out, Scalar(1) / static_cast<Scalar>(clip.lower.value()));
  }
  return out;
}

std::string to_string(const ClipConstant& c);

}  // namespace clipope
