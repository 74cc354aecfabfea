#pragma once

#include <filesystem>
#include <vector>

#include "mpgan/data/samples.hpp"

namespace mpgan::data {

// Shard file: "MPSH", u32 version, u32 kind (0 spatial, 1 temporal),
// u32 record count, then per record u32 axis, sim, frame, j, volume count,
// and per volume u32 nx, ny, channels followed by little-endian f32
// samples (channel fastest). Spatial records hold input, target and an
// optional flow; temporal records hold 3 inputs, 3 targets, 3 flows.

inline constexpr std::uint32_t kShardVersion = 1;

enum class ShardKind : std::uint32_t { Spatial = 0, Temporal = 1 };

void write_spatial_shard(const std::filesystem::path& path, const std::vector<SliceSample>& samples);
void write_temporal_shard(const std::filesystem::path& path, const std::vector<TripletSample>& samples);

std::vector<SliceSample> read_spatial_shard(const std::filesystem::path& path);
std::vector<TripletSample> read_temporal_shard(const std::filesystem::path& path);

/// Conventional shard file names for a curriculum factor j.
std::string spatial_shard_name(int j);
std::string temporal_shard_name(int j);

}  // namespace mpgan::data
