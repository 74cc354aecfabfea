#include "mpgan/data/augment.hpp"

namespace mpgan::data {
namespace {

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

constexpr Mat3 kIdentity{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
constexpr Mat3 kQuarterTurnY{{{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}}};

Volume rotate_once(const Volume& in, int vc) {
  const Dims d = in.dims();
  const int ch = in.channels();
  Volume out(Dims{d.nz, d.ny, d.nx}, ch);
  for (int zo = 0; zo < d.nx; ++zo)
    for (int y = 0; y < d.ny; ++y)
      for (int xo = 0; xo < d.nz; ++xo) {
        const int x = d.nx - 1 - zo, z = xo;
        for (int c = 0; c < ch; ++c) out.at(xo, y, zo, c) = in.at(x, y, z, c);
        if (vc >= 0) {
          const double vx = in.at(x, y, z, vc), vz = in.at(x, y, z, vc + 2);
          out.at(xo, y, zo, vc) = vz;
          out.at(xo, y, zo, vc + 2) = -vx;
        }
      }
  return out;
}

Volume flip(const Volume& in, int axis, int vc) {
  const Dims d = in.dims();
  const int ch = in.channels();
  Volume out(d, ch);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const int sx = axis == 0 ? d.nx - 1 - x : x;
        const int sz = axis == 2 ? d.nz - 1 - z : z;
        for (int c = 0; c < ch; ++c) out.at(x, y, z, c) = in.at(sx, y, sz, c);
        if (vc >= 0) out.at(x, y, z, vc + axis) = -out.at(x, y, z, vc + axis);
      }
  return out;
}

}  // namespace

Mat3 VolumeTransform::matrix() const {
  Mat3 m = kIdentity;
  const int k = (quarter_turns % 4 + 4) % 4;
  for (int i = 0; i < k; ++i) m = multiply(kQuarterTurnY, m);
  if (flip_x) m = multiply(Mat3{{{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, m);
  if (flip_z) m = multiply(Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, -1}}}, m);
  return m;
}

Vec3 transform_vector(const VolumeTransform& t, const Vec3& v) {
  const Mat3 m = t.matrix();
  Vec3 r;
  for (int i = 0; i < 3; ++i) r[i] = m[i][0] * v.x + m[i][1] * v.y + m[i][2] * v.z;
  return r;
}

Volume transform_volume(const Volume& volume, const VolumeTransform& t, int vc) {
  if (vc >= 0 && vc + 3 > volume.channels()) throw ValidationError("transform_volume: velocity channels out of range");
  Volume out = volume;
  const int k = (t.quarter_turns % 4 + 4) % 4;
  for (int i = 0; i < k; ++i) out = rotate_once(out, vc);
  if (t.flip_x) out = flip(out, 0, vc);
  if (t.flip_z) out = flip(out, 2, vc);
  return out;
}

void AugmentConfig::validate() const {
  if (!(scale_min > 0.0) || scale_max < scale_min) throw ValidationError("augmentation scale range must be positive");
}

VolumeTransform draw_volume_transform(const AugmentConfig& cfg, std::mt19937_64& rng) {
  VolumeTransform t;
  if (cfg.enable_rot90_gravity_axis) t.quarter_turns = std::uniform_int_distribution<int>(0, 3)(rng);
  if (cfg.enable_flips) t.flip_z = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  return t;
}

TileTransform draw_tile_transform(const AugmentConfig& cfg, std::mt19937_64& rng) {
  TileTransform t;
  t.scale = std::uniform_real_distribution<double>(cfg.scale_min, cfg.scale_max)(rng);
  if (cfg.enable_flips) t.flip = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  return t;
}

}  // namespace mpgan::data
