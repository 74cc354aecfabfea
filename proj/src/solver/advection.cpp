#include "mpgan/solver/advection.hpp"

#include <algorithm>
#include <cmath>

namespace mpgan::solver {
namespace {

struct Corner {
  int i0, i1;
  double t;
};

Corner locate(double g, int n) {
  g = std::clamp(g, 0.0, static_cast<double>(n - 1));
  int i0 = static_cast<int>(std::floor(g));
  i0 = std::min(i0, n - 1);
  const int i1 = std::min(i0 + 1, n - 1);
  return {i0, i1, g - i0};
}

// Face grids are offset by half a cell along their own axis.
Vec3 face_offset(int axis) {
  Vec3 o{};
  if (axis >= 0) o[axis] = -0.5;
  return o;
}

void check_compatible(const Dims& field_cells, const MacVelocity& vel) {
  require_same_dims(field_cells, vel.cells, "advection");
}

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("advection: dt must be positive and finite");
}

Volume advect_grid(const Volume& src, const Vec3& offset, const MacVelocity& vel, double dt) {
  Volume out(src.dims());
  const Dims d = src.dims();
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const Vec3 p = Vec3{double(x), double(y), double(z)} + offset;
        const Vec3 back = p - sample_velocity(vel, p) * dt;
        out.at(x, y, z) = sample_trilinear(src, back - offset);
      }
  return out;
}

Volume maccormack_grid(const Volume& src, const Vec3& offset, const MacVelocity& vel, double dt) {
  const Volume fwd = advect_grid(src, offset, vel, dt);
  const Volume bwd = advect_grid(fwd, offset, vel, -dt);
  Volume out(src.dims());
  const Dims d = src.dims();
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const double corrected = fwd.at(x, y, z) + 0.5 * (src.at(x, y, z) - bwd.at(x, y, z));
        const Vec3 p = Vec3{double(x), double(y), double(z)} + offset;
        const Vec3 back = p - sample_velocity(vel, p) * dt;
        const auto [lo, hi] = trilinear_neighbor_range(src, back - offset);
        out.at(x, y, z) = std::clamp(corrected, lo, hi);
      }
  return out;
}

}  // namespace

double sample_trilinear(const Volume& g, const Vec3& p) {
  const Corner cx = locate(p.x, g.nx()), cy = locate(p.y, g.ny()), cz = locate(p.z, g.nz());
  const double c00 = g.at(cx.i0, cy.i0, cz.i0) * (1 - cx.t) + g.at(cx.i1, cy.i0, cz.i0) * cx.t;
  const double c10 = g.at(cx.i0, cy.i1, cz.i0) * (1 - cx.t) + g.at(cx.i1, cy.i1, cz.i0) * cx.t;
  const double c01 = g.at(cx.i0, cy.i0, cz.i1) * (1 - cx.t) + g.at(cx.i1, cy.i0, cz.i1) * cx.t;
  const double c11 = g.at(cx.i0, cy.i1, cz.i1) * (1 - cx.t) + g.at(cx.i1, cy.i1, cz.i1) * cx.t;
  const double c0 = c00 * (1 - cy.t) + c10 * cy.t;
  const double c1 = c01 * (1 - cy.t) + c11 * cy.t;
  return c0 * (1 - cz.t) + c1 * cz.t;
}

std::pair<double, double> trilinear_neighbor_range(const Volume& g, const Vec3& p) {
  const Corner cx = locate(p.x, g.nx()), cy = locate(p.y, g.ny()), cz = locate(p.z, g.nz());
  double lo = g.at(cx.i0, cy.i0, cz.i0), hi = lo;
  for (int k : {cz.i0, cz.i1})
    for (int j : {cy.i0, cy.i1})
      for (int i : {cx.i0, cx.i1}) {
        const double v = g.at(i, j, k);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  return {lo, hi};
}

Vec3 sample_velocity(const MacVelocity& vel, const Vec3& p) {
  return {sample_trilinear(vel.u, p - face_offset(0)), sample_trilinear(vel.v, p - face_offset(1)),
          sample_trilinear(vel.w, p - face_offset(2))};
}

Volume advect_semi_lagrangian(const Volume& field, const MacVelocity& vel, double dt) {
  check_compatible(field.dims(), vel);
  check_dt(dt);
  if (field.channels() != 1) throw ValidationError("advection expects a single-channel field");
  return advect_grid(field, face_offset(-1), vel, dt);
}

MacVelocity advect_semi_lagrangian(const MacVelocity& field, const MacVelocity& vel, double dt) {
  check_compatible(field.cells, vel);
  check_dt(dt);
  MacVelocity out(field.cells);
  for (int a = 0; a < 3; ++a) out.component(a) = advect_grid(field.component(a), face_offset(a), vel, dt);
  return out;
}

Volume advect_maccormack(const Volume& field, const MacVelocity& vel, double dt) {
  check_compatible(field.dims(), vel);
  check_dt(dt);
  if (field.channels() != 1) throw ValidationError("advection expects a single-channel field");
  return maccormack_grid(field, face_offset(-1), vel, dt);
}

MacVelocity advect_maccormack(const MacVelocity& field, const MacVelocity& vel, double dt) {
  check_compatible(field.cells, vel);
  check_dt(dt);
  MacVelocity out(field.cells);
  for (int a = 0; a < 3; ++a) out.component(a) = maccormack_grid(field.component(a), face_offset(a), vel, dt);
  return out;
}

MacVelocity add_buoyancy(const MacVelocity& vel, const Volume& density, const Vec3& force, double dt) {
  require_same_dims(density.dims(), vel.cells, "add_buoyancy");
  MacVelocity out = vel;
  const Dims d = vel.cells;
  for (int axis = 0; axis < 3; ++axis) {
    if (force[axis] == 0.0) continue;
    Volume& comp = out.component(axis);
    const Dims fd = comp.dims();
    const double scale = dt * force[axis];
    for (int z = 0; z < fd.nz; ++z)
      for (int y = 0; y < fd.ny; ++y)
        for (int x = 0; x < fd.nx; ++x) {
          int lo[3] = {x, y, z};
          int hi[3] = {x, y, z};
          lo[axis] = std::max(lo[axis] - 1, 0);
          const int n = axis == 0 ? d.nx : (axis == 1 ? d.ny : d.nz);
          hi[axis] = std::min(hi[axis], n - 1);
          const double face_density = 0.5 * (density.at(lo[0], lo[1], lo[2]) + density.at(hi[0], hi[1], hi[2]));
          comp.at(x, y, z) += scale * face_density;
        }
  }
  return out;
}

}  // namespace mpgan::solver
