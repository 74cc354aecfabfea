#pragma once

#include "mpgan/core/volume.hpp"

namespace mpgan::solver {

// Positions are in cell-index space: the centre of cell (i, j, k) sits at
// (i, j, k); the x-face u(i, j, k) sits at (i - 0.5, j, k).

/// Trilinear sample of a single-channel grid at grid-index position `p`,
/// clamped to the grid extent.
double sample_trilinear(const Volume& grid, const Vec3& p);

/// Min/max over the (up to) 8 samples used by `sample_trilinear` at `p`.
std::pair<double, double> trilinear_neighbor_range(const Volume& grid, const Vec3& p);

/// Velocity at a cell-index-space position (each component interpolated on its face grid).
Vec3 sample_velocity(const MacVelocity& vel, const Vec3& p);

/// Semi-Lagrangian advection of a single-channel cell-centred field.
Volume advect_semi_lagrangian(const Volume& field, const MacVelocity& vel, double dt);
MacVelocity advect_semi_lagrangian(const MacVelocity& field, const MacVelocity& vel, double dt);

/// MacCormack advection with the neighbour-extrema clamp.
Volume advect_maccormack(const Volume& field, const MacVelocity& vel, double dt);
MacVelocity advect_maccormack(const MacVelocity& field, const MacVelocity& vel, double dt);

/// vel += dt * force * (density averaged to each face). Zero force axes are left untouched.
MacVelocity add_buoyancy(const MacVelocity& vel, const Volume& density, const Vec3& force, double dt);

}  // namespace mpgan::solver
