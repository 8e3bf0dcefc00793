#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace shrinklab {

// Counter-based pseudo-random words (Philox-2x64 style bijection).
// The value at (key, counter) never depends on call order, thread
// placement, or how many workers share the job, which is what makes
// every Monte Carlo result here bit-stable under --workers changes.
namespace philox {

inline constexpr std::uint64_t kMultiplier = 0xD2B74407B1CE6E93ull;
inline constexpr std::uint64_t kWeylStep = 0x9E3779B97F4A7C15ull;
inline constexpr int kRounds = 10;

inline std::pair<std::uint64_t, std::uint64_t> block(std::uint64_t key,
                                                     std::uint64_t c0,
                                                     std::uint64_t c1) {
  std::uint64_t x0 = c0;
  std::uint64_t x1 = c1;
  std::uint64_t k = key;
  for (int round = 0; round < kRounds; ++round) {
    const unsigned __int128 prod =
        static_cast<unsigned __int128>(kMultiplier) * x0;
    const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
    const std::uint64_t lo = static_cast<std::uint64_t>(prod);
    x0 = hi ^ k ^ x1;
    x1 = lo;
    k += kWeylStep;
  }
  return {x0, x1};
}

}  // namespace philox

// Purpose tags keep seed spaces of different pipeline stages disjoint.
enum class StreamPurpose : std::uint64_t {
  kPathGen = 1,
  kSolverPool = 2,
  kEvalPool = 3,
  kMeanEstimate = 4,
  kScratch = 7,
};

// A keyed substream: uniform/normal variates addressed by
// (time index, lane). Each consumer owns all lanes of the indices it
// draws from; kLanesPerIndex bounds the lane budget per index.
struct RngStream {
  static constexpr std::uint64_t kLanesPerIndex = 8;

  std::uint64_t key = 0;     // user seed
  std::uint64_t stream = 0;  // purpose/replicate fold

  std::uint64_t raw(std::uint64_t index, std::uint32_t lane) const {
    return philox::block(key, stream, index * kLanesPerIndex + lane).first;
  }

  // Open-interval (0, 1): never returns 0 or 1 exactly.
  double uniform(std::uint64_t index, std::uint32_t lane) const {
    const std::uint64_t bits = raw(index, lane) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  // One N(0,1) variate via Box-Muller, consuming lanes lane0 and
  // lane0+1. Structurally never returns exactly 0.
  double normal(std::uint64_t index, std::uint32_t lane0) const {
    const double u1 = uniform(index, lane0);
    const double u2 = uniform(index, lane0 + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
};

inline RngStream make_stream(std::uint64_t seed, StreamPurpose purpose,
                             std::uint64_t replicate) {
  return RngStream{seed, (static_cast<std::uint64_t>(purpose) << 56) +
                             replicate};
}

// Folds a replicate id into a fresh 64-bit seed so that path
// generation inside one pool stays keyed by (seed, replicate, index).
inline std::uint64_t derive_replicate_seed(std::uint64_t seed,
                                           StreamPurpose purpose,
                                           std::uint64_t replicate) {
  return philox::block(seed, static_cast<std::uint64_t>(purpose), replicate)
      .first;
}

}  // namespace shrinklab
