#pragma once

#include "mpgan/core/volume.hpp"

namespace mpgan::solver {

struct ProjectionResult {
  MacVelocity velocity;
  Volume pressure;
  double residual = 0.0;  ///< final max-norm residual of the pressure system
  int iterations = 0;
  bool converged = true;
};

/// Closed-box pressure projection. Normal velocities on the walls are zeroed,
/// the 7-point Neumann Poisson system A p = -div(u) is solved with
/// Jacobi-preconditioned CG, and the pressure gradient is subtracted.
///
/// CG stops once max|r| <= tolerance * max|div(u)|. The returned pressure has
/// zero mean. Non-convergence within `max_iter` is reported through
/// `converged = false` with the best iterate; NaN input throws NumericalError.
ProjectionResult project_cg(const MacVelocity& vel, double tolerance, int max_iter);

/// Applies the Neumann Laplacian operator used by `project_cg` (diag = number of
/// open neighbours, off-diagonal -1).
Volume apply_pressure_operator(const Volume& p);

/// Zeroes the wall-normal velocity faces.
void enforce_closed_walls(MacVelocity& vel);

}  // namespace mpgan::solver
