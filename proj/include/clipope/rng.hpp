#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace clipope {

/// (master_seed, stream_id) names one independent random stream.
///
/// Repetition k of an experiment uses stream k, so repetitions can run in any
/// order or in parallel and still reproduce bit for bit.
struct Seed {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// Stream reserved for the Monte Carlo ground truth of a sweep.
inline constexpr std::uint64_t kTruthStream = std::numeric_limits<std::uint64_t>::max();

using Rng = std::mt19937_64;

/// Deterministic engine for a seed. The state is derived through std::seed_seq,
/// whose mixing algorithm is fixed by the standard.
inline Rng make_rng(const Seed& seed) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed.master_seed), hi(seed.master_seed), lo(seed.stream_id),
                    hi(seed.stream_id)};
  return Rng(seq);
}

}  // namespace clipope
