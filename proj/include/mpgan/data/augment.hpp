#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "mpgan/core/volume.hpp"

namespace mpgan::data {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Element of the group generated by quarter turns about the gravity (y)
/// axis and mirrors of x and z. Applied as: rotate, then flip x, then flip z.
struct VolumeTransform {
  int quarter_turns = 0;  ///< about +y; one turn maps +x to -z
  bool flip_x = false;
  bool flip_z = false;

  Mat3 matrix() const;
  bool is_identity() const { return (quarter_turns % 4 + 4) % 4 == 0 && !flip_x && !flip_z; }
};

Vec3 transform_vector(const VolumeTransform& t, const Vec3& v);

/// Applies the transform to a volume. Channels [velocity_channel,
/// velocity_channel + 3) are treated as a world-space vector and rotated
/// along with the grid; pass -1 for purely scalar volumes. Quarter turns
/// swap nx and nz.
Volume transform_volume(const Volume& volume, const VolumeTransform& t, int velocity_channel);

struct AugmentConfig {
  double scale_min = 0.85;
  double scale_max = 1.15;
  bool enable_rot90_gravity_axis = true;
  bool enable_flips = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// In-plane tile augmentation applied at extraction time.
struct TileTransform {
  double scale = 1.0;
  bool flip = false;  ///< mirror the tile's horizontal axis
};

VolumeTransform draw_volume_transform(const AugmentConfig& cfg, std::mt19937_64& rng);
TileTransform draw_tile_transform(const AugmentConfig& cfg, std::mt19937_64& rng);

}  // namespace mpgan::data
