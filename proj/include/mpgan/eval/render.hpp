#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mpgan/core/volume.hpp"

namespace mpgan::eval {

/// 8-bit grayscale image, rows top to bottom.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  std::optional<double> density_max;  ///< from the PNG text chunk, when present
};

/// Channel 0 of slice `index` along `normal`, mapped linearly from [0, max]
/// to [0, 255] (max over the slice; an all-non-positive slice is black).
/// World y points up in the image whenever it lies in the plane.
GrayImage slice_image(const Volume& volume, Axis normal, int index);

/// Writes the slice as PNG; the mapping maximum is stored in a
/// `density_max` text chunk. Returns that maximum.
double render_slice(const Volume& volume, Axis normal, int index, const std::filesystem::path& out_png);

void write_png(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_png(const std::filesystem::path& path);

}  // namespace mpgan::eval
