#include "mpgan/core/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mpgan {

std::string Dims::str() const {
  return std::to_string(nx) + "x" + std::to_string(ny) + "x" + std::to_string(nz);
}

Axis parse_axis(const std::string& name) {
  if (name == "x" || name == "X") return Axis::X;
  if (name == "y" || name == "Y") return Axis::Y;
  if (name == "z" || name == "Z") return Axis::Z;
  throw ValidationError("unknown axis '" + name + "' (expected x, y or z)");
}

const char* axis_name(Axis axis) {
  switch (axis) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (!(a == b)) {
    throw ValidationError(std::string(what) + ": dimension mismatch " + a.str() + " vs " + b.str());
  }
}

Volume::Volume(Dims dims, int channels, double fill) : dims_(dims), channels_(channels) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0 || channels <= 0) {
    throw ValidationError("volume dims must be positive, got " + dims.str() + " x " + std::to_string(channels));
  }
  data_.assign(dims.count() * static_cast<std::size_t>(channels), fill);
}

Volume Volume::channel(int c) const {
  Volume out(dims_, 1);
  const std::size_t n = dims_.count();
  for (std::size_t i = 0; i < n; ++i) out.data_[i] = data_[i * channels_ + c];
  return out;
}

void Volume::set_channel(int c, const Volume& src) {
  require_same_dims(dims_, src.dims(), "set_channel");
  const std::size_t n = dims_.count();
  for (std::size_t i = 0; i < n; ++i) data_[i * channels_ + c] = src.data_[i];
}

double Volume::min() const { return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end()); }
double Volume::max() const { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }

double Volume::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Volume::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

bool Volume::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

MacVelocity::MacVelocity(Dims c)
    : cells(c),
      u(Dims{c.nx + 1, c.ny, c.nz}),
      v(Dims{c.nx, c.ny + 1, c.nz}),
      w(Dims{c.nx, c.ny, c.nz + 1}) {}

Volume MacVelocity::centered() const {
  Volume out(cells, 3);
  for (int z = 0; z < cells.nz; ++z)
    for (int y = 0; y < cells.ny; ++y)
      for (int x = 0; x < cells.nx; ++x) {
        out.at(x, y, z, 0) = 0.5 * (u.at(x, y, z) + u.at(x + 1, y, z));
        out.at(x, y, z, 1) = 0.5 * (v.at(x, y, z) + v.at(x, y + 1, z));
        out.at(x, y, z, 2) = 0.5 * (w.at(x, y, z) + w.at(x, y, z + 1));
      }
  return out;
}

MacVelocity MacVelocity::from_centered(const Volume& c) {
  if (c.channels() != 3) throw ValidationError("from_centered: expected 3 channels");
  const Dims d = c.dims();
  MacVelocity vel(d);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x <= d.nx; ++x) {
        const int a = std::max(x - 1, 0), b = std::min(x, d.nx - 1);
        vel.u.at(x, y, z) = 0.5 * (c.at(a, y, z, 0) + c.at(b, y, z, 0));
      }
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y <= d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const int a = std::max(y - 1, 0), b = std::min(y, d.ny - 1);
        vel.v.at(x, y, z) = 0.5 * (c.at(x, a, z, 1) + c.at(x, b, z, 1));
      }
  for (int z = 0; z <= d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const int a = std::max(z - 1, 0), b = std::min(z, d.nz - 1);
        vel.w.at(x, y, z) = 0.5 * (c.at(x, y, a, 2) + c.at(x, y, b, 2));
      }
  return vel;
}

double MacVelocity::max_abs() const { return std::max({u.max_abs(), v.max_abs(), w.max_abs()}); }

bool MacVelocity::all_finite() const { return u.all_finite() && v.all_finite() && w.all_finite(); }

Volume divergence(const MacVelocity& vel) {
  const Dims d = vel.cells;
  Volume div(d);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        div.at(x, y, z) = (vel.u.at(x + 1, y, z) - vel.u.at(x, y, z)) + (vel.v.at(x, y + 1, z) - vel.v.at(x, y, z)) +
                          (vel.w.at(x, y, z + 1) - vel.w.at(x, y, z));
      }
  return div;
}

}  // namespace mpgan
