#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "truckmorl/autodiff/adam.hpp"
#include "truckmorl/autodiff/network.hpp"

// Binary checkpoint layout (all integers and floats little-endian):
//
//   "TMRLCKPT"  u32 version  u32 scalar_bytes  u64 spec_hash
//   NetworkSpec fields
//   u32 block_count, then per block: u32 name_len, name, u32 rows, u32 cols, rows*cols scalars (column-major)
//   u8 has_adam, then: f64 lr, f64 beta1, f64 beta2, f64 epsilon, i64 step, first and second moments per block
//
// Loading verifies the magic, the version, the scalar width and that the stored hash
// matches the hash recomputed from the stored spec.

namespace truckmorl::ad {

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename Scalar>
struct LoadedCheckpoint {
  ActorCritic<Scalar> network;
  std::optional<AdamState<Scalar>> adam;
};

template <typename Scalar>
void save_checkpoint(const std::filesystem::path& path, const ActorCritic<Scalar>& network,
                     const AdamState<Scalar>* adam = nullptr);

template <typename Scalar>
LoadedCheckpoint<Scalar> load_checkpoint(const std::filesystem::path& path);

/// Scalar width (4 or 8) stored in a checkpoint header.
int checkpoint_scalar_bytes(const std::filesystem::path& path);

}  // namespace truckmorl::ad
