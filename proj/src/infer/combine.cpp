#include "mpgan/infer/combine.hpp"

#include <algorithm>

#include "mpgan/core/interp.hpp"

namespace mpgan::infer {

Volume upsample_linear_z(const Volume& volume, int factor) {
  if (factor < 1) throw ValidationError("up-sampling factor must be >= 1");
  if (factor == 1) return volume;
  return upsample_linear_axis(volume, Axis::Z, factor);
}

Volume upsample_trilinear(const Volume& volume, int factor) {
  if (factor < 1) throw ValidationError("up-sampling factor must be >= 1");
  if (factor == 1) return volume;
  Volume v = upsample_linear_axis(volume, Axis::X, factor);
  v = upsample_linear_axis(v, Axis::Y, factor);
  return upsample_linear_axis(v, Axis::Z, factor);
}

Volume rescale_velocity(const Volume& velocity, double dt_train, double dt_sim) {
  if (!(dt_train > 0.0) || !(dt_sim > 0.0)) throw ValidationError("time steps must be positive");
  Volume out = velocity;
  const double s = dt_train / dt_sim;
  if (s != 1.0)
    for (double& v : out.data()) v *= s;
  return out;
}

CombineMode parse_combine_mode(const std::string& s) {
  if (s == "avg") return CombineMode::Avg;
  if (s == "max") return CombineMode::Max;
  if (s == "res") return CombineMode::Res;
  if (s == "cres") return CombineMode::Cres;
  throw ValidationError("unknown combine mode '" + s + "' (avg, max, res, cres)");
}

Volume combine_axes(const std::array<Volume, 3>& outputs, CombineMode mode, Axis base_axis,
                    const Volume& upsampled_input) {
  for (const auto& v : outputs) {
    require_same_dims(outputs[0].dims(), v.dims(), "combine_axes");
    if (v.channels() != outputs[0].channels()) throw ValidationError("combine_axes: channel counts differ");
  }
  const bool residual = mode == CombineMode::Res || mode == CombineMode::Cres;
  if (residual) {
    require_same_dims(outputs[0].dims(), upsampled_input.dims(), "combine_axes");
    if (upsampled_input.channels() != outputs[0].channels()) throw ValidationError("combine_axes: channel counts differ");
  }
  const int base = static_cast<int>(base_axis);
  Volume out(outputs[0].dims(), outputs[0].channels());
  const auto a = outputs[0].data(), b = outputs[1].data(), c = outputs[2].data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    switch (mode) {
      case CombineMode::Avg: o[i] = (a[i] + b[i] + c[i]) / 3.0; break;
      case CombineMode::Max: o[i] = std::max({a[i], b[i], c[i]}); break;
      case CombineMode::Res:
      case CombineMode::Cres: {
        double v = outputs[base].data()[i];
        for (int k = 0; k < 3; ++k) {
          if (k == base) continue;
          double r = outputs[k].data()[i] - upsampled_input.data()[i];
          if (mode == CombineMode::Cres) r = std::max(r, 0.0);
          v += r;
        }
        o[i] = v;
        break;
      }
    }
  }
  return out;
}

}  // namespace mpgan::infer
