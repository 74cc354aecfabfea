#include "mpgan/solver/resample.hpp"

namespace mpgan::solver {

Volume downsample_box(const Volume& volume, int factor) {
  if (factor < 1) throw ValidationError("downsample_box: factor must be >= 1");
  const Dims d = volume.dims();
  if (d.nx % factor || d.ny % factor || d.nz % factor) {
    throw ValidationError("downsample_box: dims " + d.str() + " not divisible by " + std::to_string(factor));
  }
  if (factor == 1) return volume;
  const Dims od{d.nx / factor, d.ny / factor, d.nz / factor};
  const int ch = volume.channels();
  Volume out(od, ch);
  const double inv = 1.0 / (static_cast<double>(factor) * factor * factor);
  for (int z = 0; z < od.nz; ++z)
    for (int y = 0; y < od.ny; ++y)
      for (int x = 0; x < od.nx; ++x)
        for (int c = 0; c < ch; ++c) {
          double s = 0.0;
          for (int k = 0; k < factor; ++k)
            for (int j = 0; j < factor; ++j)
              for (int i = 0; i < factor; ++i) s += volume.at(x * factor + i, y * factor + j, z * factor + k, c);
          out.at(x, y, z, c) = s * inv;
        }
  return out;
}

Volume downsample_velocity(const Volume& centered_velocity, int factor) {
  Volume out = downsample_box(centered_velocity, factor);
  const double s = 1.0 / factor;
  for (double& v : out.data()) v *= s;
  return out;
}

}  // namespace mpgan::solver
