#pragma once

#include <array>
#include <string>

#include "mpgan/core/volume.hpp"

namespace mpgan::infer {

/// Linear up-sampling along z only (cell-centred, clamped); f = 1 is the identity.
Volume upsample_linear_z(const Volume& volume, int factor);

/// Linear up-sampling along all three axes (the RES / CRES reference input).
Volume upsample_trilinear(const Volume& volume, int factor);

/// Velocities recorded at simulation step dt_sim, expressed for the
/// training step: multiplied by dt_train / dt_sim.
Volume rescale_velocity(const Volume& velocity, double dt_train, double dt_sim);

enum class CombineMode { Avg, Max, Res, Cres };

CombineMode parse_combine_mode(const std::string& s);

/// Merges three single-axis up-scaled volumes (indexed by slicing axis).
/// AVG / MAX are per-cell; RES adds to the base-axis output the residuals
/// (output - upsampled input) of the two other axes; CRES clamps those
/// residuals at zero first. `upsampled_input` is only read for RES / CRES.
Volume combine_axes(const std::array<Volume, 3>& outputs, CombineMode mode, Axis base_axis,
                    const Volume& upsampled_input);

}  // namespace mpgan::infer
