#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpgan {

/// Input that violates a documented precondition (shape, range, format).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown: NaN/Inf inputs, divergence, failed solves.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  bool operator==(const Dims&) const = default;
  std::string str() const;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Vec3&) const = default;
};

enum class Axis { X = 0, Y = 1, Z = 2 };

Axis parse_axis(const std::string& name);
const char* axis_name(Axis axis);

/// Dense multi-channel 3D grid. Layout: channel fastest, then x, y, z.
/// A one-channel volume is the density (scalar) field; a three-channel
/// volume holds cell-centred velocity.
class Volume {
 public:
  Volume() = default;
  Volume(Dims dims, int channels = 1, double fill = 0.0);

  const Dims& dims() const { return dims_; }
  int channels() const { return channels_; }
  int nx() const { return dims_.nx; }
  int ny() const { return dims_.ny; }
  int nz() const { return dims_.nz; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int x, int y, int z, int c = 0) const {
    return static_cast<std::size_t>(c) +
           static_cast<std::size_t>(channels_) *
               (static_cast<std::size_t>(x) +
                static_cast<std::size_t>(dims_.nx) *
                    (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims_.ny) * static_cast<std::size_t>(z)));
  }
  double& at(int x, int y, int z, int c = 0) { return data_[index(x, y, z, c)]; }
  double at(int x, int y, int z, int c = 0) const { return data_[index(x, y, z, c)]; }
  // Slice (nz == 1) shorthand for channel 0.
  double& at(int x, int y) { return data_[index(x, y, 0, 0)]; }
  double at(int x, int y) const { return data_[index(x, y, 0, 0)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  /// Single channel copy.
  Volume channel(int c) const;
  void set_channel(int c, const Volume& src);

  double min() const;
  double max() const;
  double max_abs() const;
  double sum() const;
  bool all_finite() const;

  bool operator==(const Volume&) const = default;

 private:
  Dims dims_{};
  int channels_ = 1;
  std::vector<double> data_;
};

using ScalarField = Volume;

/// MAC-staggered velocity. u lives on x-faces (nx+1, ny, nz), v on y-faces,
/// w on z-faces; units are cells per time unit.
struct MacVelocity {
  Dims cells{};
  Volume u;
  Volume v;
  Volume w;

  MacVelocity() = default;
  explicit MacVelocity(Dims cell_dims);

  Volume& component(int axis) { return axis == 0 ? u : (axis == 1 ? v : w); }
  const Volume& component(int axis) const { return axis == 0 ? u : (axis == 1 ? v : w); }

  /// Face-average to cell centres: three-channel volume (vx, vy, vz).
  Volume centered() const;
  /// Inverse of `centered` for interior faces; boundary faces copy the adjacent cell.
  static MacVelocity from_centered(const Volume& centered);

  double max_abs() const;
  bool all_finite() const;
  bool operator==(const MacVelocity&) const = default;
};

/// Per-cell discrete divergence with unit spacing.
Volume divergence(const MacVelocity& vel);

void require_same_dims(const Dims& a, const Dims& b, const char* what);

}  // namespace mpgan
