#pragma once

#include <cstdint>
#include <filesystem>

#include "mpgan/core/volume.hpp"

namespace mpgan {

/// FVOL on-disk format: "FVOL", u32 version (1), u32 nx, ny, nz, u32 channels,
/// then nx*ny*nz*channels little-endian f32, channel fastest, then x, y, z.
inline constexpr std::uint32_t kFvolVersion = 1;

void write_fvol(const std::filesystem::path& path, const Volume& volume);
Volume read_fvol(const std::filesystem::path& path);

/// Rounds every sample through f32, i.e. what a write/read cycle returns.
Volume quantize_f32(const Volume& volume);

}  // namespace mpgan
