#pragma once

#include <vector>

#include "mpgan/core/volume.hpp"

namespace mpgan::data {

/// In-plane layout of a slice. Slices are stored as Volumes with nz == 1
/// whose x index is the `horizontal` world axis and y index the `vertical`
/// one. Gravity (world y) stays vertical whenever it lies in the plane.
struct PlaneAxes {
  int horizontal;
  int vertical;
};

/// Z-normal: (x, y). X-normal: (z, y). Y-normal: (x, z).
PlaneAxes plane_axes(Axis normal);

/// Slice k of the split along `normal` is the plane at index k; all channels are kept.
std::vector<Volume> slice_volume(const Volume& volume, Axis normal);

/// Inverse of `slice_volume`.
Volume restack_slices(const std::vector<Volume>& slices, Axis normal);

/// Single slice without materialising the whole split.
Volume extract_slice(const Volume& volume, Axis normal, int index);

/// Mean of channel 0 (density).
double mean_density(const Volume& slice);

inline constexpr double kSliceDensityThreshold = 0.005;

/// Indices of slices whose mean density is >= threshold (inclusive).
std::vector<int> filter_slices(const std::vector<Volume>& slices, double threshold = kSliceDensityThreshold);

}  // namespace mpgan::data
