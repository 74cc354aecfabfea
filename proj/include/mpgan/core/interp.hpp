#pragma once

#include <array>
#include <vector>

#include "mpgan/core/volume.hpp"

namespace mpgan {

// All resampling here is cell-centred: output sample I of an f-times finer
// grid sits at source coordinate (I + 0.5) / f - 0.5; lookups outside the
// grid clamp to the border sample.

/// Catmull-Rom weights for taps at offsets -1, 0, 1, 2 from floor(position).
std::array<double, 4> catmull_rom_weights(double t);

/// Source coordinate of output sample `i` when up-sampling by `factor`.
inline double upsample_source_coord(int i, int factor) { return (i + 0.5) / factor - 0.5; }

/// Bilinear sample of a 2D slice (nz == 1) at (u, v) in pixel-index space.
double sample_bilinear(const Volume& slice, double u, double v, int channel = 0);

/// Dense (n_src * factor) x n_src matrix of the 1D Catmull-Rom up-sampler,
/// row-major; up-sampling a line is a matrix-vector product with it.
std::vector<double> cubic_upsample_matrix(int n_src, int factor);

/// Bicubic (Catmull-Rom) up-sampling of every XY plane by `factor`, all channels.
Volume upsample_bicubic_xy(const Volume& volume, int factor);

/// Linear up-sampling along a single axis by `factor`, all channels.
Volume upsample_linear_axis(const Volume& volume, Axis axis, int factor);

/// Linear along z followed by bicubic in XY: the interpolation the two
/// generator passes reduce to when both predict zero residual.
Volume upsample_separable(const Volume& volume, int factor);

}  // namespace mpgan
