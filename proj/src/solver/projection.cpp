#include "mpgan/solver/projection.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mpgan::solver {
namespace {

int open_neighbors(const Dims& d, int x, int y, int z) {
  return (x > 0) + (x < d.nx - 1) + (y > 0) + (y < d.ny - 1) + (z > 0) + (z < d.nz - 1);
}

void apply_operator(const Dims& d, const std::vector<double>& p, std::vector<double>& out) {
  const std::size_t sx = 1, sy = static_cast<std::size_t>(d.nx), sz = sy * static_cast<std::size_t>(d.ny);
  std::size_t i = 0;
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x, ++i) {
        const double c = p[i];
        double acc = 0.0;
        if (x > 0) acc += c - p[i - sx];
        if (x < d.nx - 1) acc += c - p[i + sx];
        if (y > 0) acc += c - p[i - sy];
        if (y < d.ny - 1) acc += c - p[i + sy];
        if (z > 0) acc += c - p[i - sz];
        if (z < d.nz - 1) acc += c - p[i + sz];
        out[i] = acc;
      }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void remove_mean(std::vector<double>& a) {
  double mean = 0.0;
  for (double v : a) mean += v;
  mean /= static_cast<double>(a.size());
  for (double& v : a) v -= mean;
}

}  // namespace

void enforce_closed_walls(MacVelocity& vel) {
  const Dims d = vel.cells;
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y) {
      vel.u.at(0, y, z) = 0.0;
      vel.u.at(d.nx, y, z) = 0.0;
    }
  for (int z = 0; z < d.nz; ++z)
    for (int x = 0; x < d.nx; ++x) {
      vel.v.at(x, 0, z) = 0.0;
      vel.v.at(x, d.ny, z) = 0.0;
    }
  for (int y = 0; y < d.ny; ++y)
    for (int x = 0; x < d.nx; ++x) {
      vel.w.at(x, y, 0) = 0.0;
      vel.w.at(x, y, d.nz) = 0.0;
    }
}

Volume apply_pressure_operator(const Volume& p) {
  Volume out(p.dims());
  apply_operator(p.dims(), p.storage(), out.storage());
  return out;
}

ProjectionResult project_cg(const MacVelocity& vel, double tolerance, int max_iter) {
  if (!(tolerance > 0.0)) throw ValidationError("project_cg: tolerance must be positive");
  if (max_iter < 0) throw ValidationError("project_cg: max_iter must be non-negative");
  if (!vel.all_finite()) throw NumericalError("project_cg: non-finite velocity input");

  const Dims d = vel.cells;
  ProjectionResult result{vel, Volume(d), 0.0, 0, true};
  enforce_closed_walls(result.velocity);

  // A p = b with b = -div(u); b sums to zero once the walls are closed.
  std::vector<double> b = divergence(result.velocity).storage();
  for (double& v : b) v = -v;
  remove_mean(b);

  const std::size_t n = b.size();
  std::vector<double> diag(n);
  {
    std::size_t i = 0;
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x, ++i) diag[i] = std::max(1, open_neighbors(d, x, y, z));
  }

  std::vector<double>& p = result.pressure.storage();
  std::vector<double> r = b;
  const double threshold = tolerance * max_abs(b);
  result.residual = max_abs(r);
  if (result.residual <= threshold || result.residual == 0.0) {
    result.residual = max_abs(r);
    return result;
  }

  std::vector<double> z(n), s(n), as(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  s = z;
  double rz = dot(r, z);
  std::vector<double> best_p = p;
  double best_residual = result.residual;

  int it = 0;
  bool converged = false;
  while (it < max_iter) {
    apply_operator(d, s, as);
    const double sas = dot(s, as);
    if (!(sas > 0.0)) break;
    const double alpha = rz / sas;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] += alpha * s[i];
      r[i] -= alpha * as[i];
    }
    ++it;
    const double res = max_abs(r);
    if (!std::isfinite(res)) throw NumericalError("project_cg: residual became non-finite");
    if (res < best_residual) {
      best_residual = res;
      best_p = p;
    }
    if (res <= threshold) {
      converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) s[i] = z[i] + beta * s[i];
  }
  if (!converged) p = best_p;
  remove_mean(p);

  // Subtract the pressure gradient from interior faces.
  MacVelocity& u = result.velocity;
  const Volume& pr = result.pressure;
  for (int zz = 0; zz < d.nz; ++zz)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 1; x < d.nx; ++x) u.u.at(x, y, zz) -= pr.at(x, y, zz) - pr.at(x - 1, y, zz);
  for (int zz = 0; zz < d.nz; ++zz)
    for (int y = 1; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) u.v.at(x, y, zz) -= pr.at(x, y, zz) - pr.at(x, y - 1, zz);
  for (int zz = 1; zz < d.nz; ++zz)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) u.w.at(x, y, zz) -= pr.at(x, y, zz) - pr.at(x, y, zz - 1);

  result.iterations = it;
  result.converged = converged;
  result.residual = converged ? max_abs(r) : best_residual;
  return result;
}

}  // namespace mpgan::solver
