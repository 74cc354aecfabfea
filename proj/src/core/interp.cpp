#include "mpgan/core/interp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mpgan {
namespace {

struct Taps {
  std::array<int, 4> index;
  std::array<double, 4> weight;
};

std::vector<Taps> cubic_taps(int n_src, int factor) {
  std::vector<Taps> taps(static_cast<std::size_t>(n_src) * factor);
  for (int i = 0; i < n_src * factor; ++i) {
    const double pos = upsample_source_coord(i, factor);
    const double fl = std::floor(pos);
    const auto w = catmull_rom_weights(pos - fl);
    Taps& t = taps[i];
    for (int k = 0; k < 4; ++k) {
      t.index[k] = std::clamp(static_cast<int>(fl) - 1 + k, 0, n_src - 1);
      t.weight[k] = w[k];
    }
  }
  return taps;
}

}  // namespace

std::array<double, 4> catmull_rom_weights(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t), 0.5 * (t3 - t2)};
}

double sample_bilinear(const Volume& s, double u, double v, int c) {
  u = std::clamp(u, 0.0, static_cast<double>(s.nx() - 1));
  v = std::clamp(v, 0.0, static_cast<double>(s.ny() - 1));
  const int u0 = static_cast<int>(std::floor(u)), v0 = static_cast<int>(std::floor(v));
  const int u1 = std::min(u0 + 1, s.nx() - 1), v1 = std::min(v0 + 1, s.ny() - 1);
  const double tu = u - u0, tv = v - v0;
  const double a = s.at(u0, v0, 0, c) * (1 - tu) + s.at(u1, v0, 0, c) * tu;
  const double b = s.at(u0, v1, 0, c) * (1 - tu) + s.at(u1, v1, 0, c) * tu;
  return a * (1 - tv) + b * tv;
}

std::vector<double> cubic_upsample_matrix(int n_src, int factor) {
  if (n_src < 1 || factor < 1) throw ValidationError("cubic_upsample_matrix: sizes must be positive");
  const auto taps = cubic_taps(n_src, factor);
  std::vector<double> m(static_cast<std::size_t>(n_src) * factor * n_src, 0.0);
  for (int i = 0; i < n_src * factor; ++i)
    for (int k = 0; k < 4; ++k) m[static_cast<std::size_t>(i) * n_src + taps[i].index[k]] += taps[i].weight[k];
  return m;
}

Volume upsample_bicubic_xy(const Volume& vol, int factor) {
  if (factor < 1) throw ValidationError("upsample factor must be >= 1");
  if (factor == 1) return vol;
  const Dims d = vol.dims();
  const int ch = vol.channels();
  const auto tx = cubic_taps(d.nx, factor);
  const auto ty = cubic_taps(d.ny, factor);
  // Separable: along x into a temporary, then along y.
  Volume tmp(Dims{d.nx * factor, d.ny, d.nz}, ch);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx * factor; ++x)
        for (int c = 0; c < ch; ++c) {
          double s = 0.0;
          for (int k = 0; k < 4; ++k) s += tx[x].weight[k] * vol.at(tx[x].index[k], y, z, c);
          tmp.at(x, y, z, c) = s;
        }
  Volume out(Dims{d.nx * factor, d.ny * factor, d.nz}, ch);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny * factor; ++y)
      for (int x = 0; x < d.nx * factor; ++x)
        for (int c = 0; c < ch; ++c) {
          double s = 0.0;
          for (int k = 0; k < 4; ++k) s += ty[y].weight[k] * tmp.at(x, ty[y].index[k], z, c);
          out.at(x, y, z, c) = s;
        }
  return out;
}

Volume upsample_linear_axis(const Volume& vol, Axis axis, int factor) {
  if (factor < 1) throw ValidationError("upsample factor must be >= 1");
  if (factor == 1) return vol;
  const Dims d = vol.dims();
  const int a = static_cast<int>(axis);
  Dims od = d;
  (a == 0 ? od.nx : (a == 1 ? od.ny : od.nz)) *= factor;
  const int n_src = a == 0 ? d.nx : (a == 1 ? d.ny : d.nz);
  const int ch = vol.channels();
  Volume out(od, ch);
  for (int z = 0; z < od.nz; ++z)
    for (int y = 0; y < od.ny; ++y)
      for (int x = 0; x < od.nx; ++x) {
        const int i = a == 0 ? x : (a == 1 ? y : z);
        const double pos = std::clamp(upsample_source_coord(i, factor), 0.0, static_cast<double>(n_src - 1));
        const int i0 = std::min(static_cast<int>(std::floor(pos)), n_src - 1);
        const int i1 = std::min(i0 + 1, n_src - 1);
        const double t = pos - i0;
        int p0[3] = {x, y, z}, p1[3] = {x, y, z};
        p0[a] = i0;
        p1[a] = i1;
        for (int c = 0; c < ch; ++c) {
          out.at(x, y, z, c) = vol.at(p0[0], p0[1], p0[2], c) * (1 - t) + vol.at(p1[0], p1[1], p1[2], c) * t;
        }
      }
  return out;
}

Volume upsample_separable(const Volume& vol, int factor) {
  return upsample_bicubic_xy(upsample_linear_axis(vol, Axis::Z, factor), factor);
}

}  // namespace mpgan
