#pragma once

#include <cstdint>

namespace truckmorl {

enum class SeedPurpose : std::uint64_t {
  rollout = 1,
  update = 2,
  evaluation = 3,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream seed for (master, index, purpose). Iteration-level streams are recomputed
/// from these three values, so a resumed run needs no saved generator state.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, SeedPurpose purpose) {
  return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(purpose))) + index);
}

// Environment reset seeds: the top bit separates evaluation episodes from training episodes.
inline constexpr std::uint64_t kEvaluationSeedBit = 1ULL << 63;

inline std::uint64_t training_episode_seed(std::uint64_t raw) { return raw & ~kEvaluationSeedBit; }

/// Seed of the k-th evaluation episode; shared by every policy evaluated under `master`.
inline std::uint64_t evaluation_episode_seed(std::uint64_t master, std::uint64_t k) {
  return derive_seed(master, k, SeedPurpose::evaluation) | kEvaluationSeedBit;
}

}  // namespace truckmorl
