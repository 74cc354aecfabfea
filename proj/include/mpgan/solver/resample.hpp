#pragma once

#include "mpgan/core/volume.hpp"

namespace mpgan::solver {

/// Block mean over factor^3 cells, per channel.
Volume downsample_box(const Volume& volume, int factor);

/// Box-downsampled cell-centred velocity, rescaled to coarse-cell units (divided by factor).
Volume downsample_velocity(const Volume& centered_velocity, int factor);

}  // namespace mpgan::solver
