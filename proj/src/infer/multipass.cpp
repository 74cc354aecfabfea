#include "mpgan/infer/multipass.hpp"

#include <algorithm>

#include "mpgan/core/interp.hpp"
#include "mpgan/data/slicing.hpp"
#include "mpgan/infer/combine.hpp"
#include "mpgan/nets/layers.hpp"

namespace mpgan::infer {

using data::plane_axes;

bool TiledPlan::covers_exactly() const {
  if (width <= 0 || height <= 0) return false;
  std::vector<int> hits(static_cast<std::size_t>(width) * height, 0);
  for (const Tile& t : tiles) {
    if (t.w <= 0 || t.h <= 0 || t.x0 < 0 || t.y0 < 0 || t.x0 + t.w > width || t.y0 + t.h > height) return false;
    if (t.wx0 > t.x0 || t.wy0 > t.y0 || t.wx0 + t.ww < t.x0 + t.w || t.wy0 + t.wh < t.y0 + t.h) return false;
    if (t.wx0 < 0 || t.wy0 < 0 || t.wx0 + t.ww > width || t.wy0 + t.wh > height) return false;
    for (int y = t.y0; y < t.y0 + t.h; ++y)
      for (int x = t.x0; x < t.x0 + t.w; ++x) ++hits[static_cast<std::size_t>(y) * width + x];
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

TiledPlan make_plan(int width, int height, int tile, int overlap) {
  if (width <= 0 || height <= 0) throw ValidationError("make_plan: empty slice");
  if (tile <= 0) throw ValidationError("make_plan: tile side must be positive");
  if (overlap < 0) throw ValidationError("make_plan: overlap must be >= 0");
  TiledPlan p{width, height, tile, overlap, {}};
  for (int y0 = 0; y0 < height; y0 += tile) {
    for (int x0 = 0; x0 < width; x0 += tile) {
      Tile t;
      t.x0 = x0;
      t.y0 = y0;
      t.w = std::min(tile, width - x0);
      t.h = std::min(tile, height - y0);
      t.wx0 = std::max(0, x0 - overlap);
      t.wy0 = std::max(0, y0 - overlap);
      t.ww = std::min(width, x0 + t.w + overlap) - t.wx0;
      t.wh = std::min(height, y0 + t.h + overlap) - t.wy0;
      p.tiles.push_back(t);
    }
  }
  return p;
}

int paper_overlap(int pass) {
  if (pass == 1) return 4;
  if (pass == 2) return 16;
  throw ValidationError("pass must be 1 or 2");
}

int pass_overlap(const nets::NetworkSpec& spec, int pass) {
  return std::max(paper_overlap(pass), nets::required_overlap(spec));
}

namespace {

// Dims as an axis-indexed array and back.
std::array<int, 3> dims_array(const Dims& d) { return {d.nx, d.ny, d.nz}; }

Dims dims_from(const std::array<int, 3>& a) { return {a[0], a[1], a[2]}; }

}  // namespace

Volume apply_pass(const SliceFn& slices, int count, Axis normal, const Dims& out_dims, const Generator& g,
                  const PassOptions& opt) {
  const nets::NetworkSpec& spec = g.spec;
  if (spec.role != nets::Role::Generator) throw ValidationError("apply_pass: " + spec.name + " is not a generator");
  if (count <= 0) throw ValidationError("apply_pass: no slices");
  if (opt.batch < 1) throw ValidationError("apply_pass: batch must be >= 1");
  const auto growth = nets::GrowthState::make(spec.final_stage(), 1.0);
  const int scale = nets::generator_scale(spec, spec.final_stage());
  const auto axes = plane_axes(normal);

  Volume first = slices(0);
  const int w = first.nx(), h = first.ny();
  if (first.nz() != 1 || first.channels() != spec.in_channels)
    throw ValidationError("apply_pass: slices must be " + std::to_string(spec.in_channels) + "-channel planes");
  auto od = dims_array(out_dims);
  if (od[axes.horizontal] != w * scale || od[axes.vertical] != h * scale || od[static_cast<int>(normal)] != count)
    throw ValidationError("apply_pass: output dims " + out_dims.str() + " do not match " + std::to_string(count) +
                          " slices of " + std::to_string(w) + "x" + std::to_string(h) + " scaled by " +
                          std::to_string(scale));

  TiledPlan plan;
  if (opt.tiled) {
    const int tile = opt.tile > 0 ? opt.tile : spec.input_size;
    const int overlap = opt.overlap >= 0 ? opt.overlap : nets::required_overlap(spec);
    if (tile + 2 * overlap < nets::receptive_field(spec).extent)
      throw ValidationError("apply_pass: tile " + std::to_string(tile) + " with overlap " + std::to_string(overlap) +
                            " is smaller than the receptive field of " + spec.name);
    plan = make_plan(w, h, tile, overlap);
  } else {
    plan = make_plan(w, h, std::max(w, h), 0);
  }

  Volume out(out_dims, 1);
  const auto ow = static_cast<std::size_t>(w) * scale, oh = static_cast<std::size_t>(h) * scale;
  torch::NoGradGuard no_grad;
  const torch::Dtype dtype = g.weights.tensors().empty() ? torch::kFloat32 : g.weights.tensors().begin()->second.scalar_type();

  for (int start = 0; start < count; start += opt.batch) {
    const int n = std::min(opt.batch, count - start);
    std::vector<torch::Tensor> ins;
    ins.reserve(n);
    for (int i = 0; i < n; ++i) {
      Volume s = (start + i == 0) ? first : slices(start + i);
      if (s.nx() != w || s.ny() != h || s.nz() != 1 || s.channels() != spec.in_channels)
        throw ValidationError("apply_pass: slice " + std::to_string(start + i) + " differs in shape");
      ins.push_back(nets::slice_to_tensor(s, dtype));
    }
    const torch::Tensor batch = torch::stack(ins);  // [n, C, h, w]
    torch::Tensor result = torch::empty({n, static_cast<long>(oh), static_cast<long>(ow)}, torch::kFloat64);
    for (const Tile& t : plan.tiles) {
      const torch::Tensor win = batch.narrow(2, t.wy0, t.wh).narrow(3, t.wx0, t.ww);
      const torch::Tensor y = nets::generate(spec, g.weights, win, growth).to(torch::kFloat64);
      const torch::Tensor crop =
          y.select(1, 0).narrow(1, (t.y0 - t.wy0) * scale, t.h * scale).narrow(2, (t.x0 - t.wx0) * scale, t.w * scale);
      result.narrow(1, static_cast<long>(t.y0) * scale, t.h * scale).narrow(2, static_cast<long>(t.x0) * scale, t.w * scale).copy_(crop);
    }
    const torch::Tensor r = result.contiguous();
    const double* p = r.data_ptr<double>();
    for (int i = 0; i < n; ++i) {
      std::array<int, 3> idx{};
      idx[static_cast<int>(normal)] = start + i;
      for (std::size_t v = 0; v < oh; ++v) {
        idx[axes.vertical] = static_cast<int>(v);
        for (std::size_t u = 0; u < ow; ++u) {
          idx[axes.horizontal] = static_cast<int>(u);
          out.at(idx[0], idx[1], idx[2]) = p[(static_cast<std::size_t>(i) * oh + v) * ow + u];
        }
      }
    }
  }
  return out;
}

Volume apply_pass(const Volume& input, Axis normal, const Generator& g, const PassOptions& opt) {
  const auto axes = plane_axes(normal);
  const int scale = nets::generator_scale(g.spec, g.spec.final_stage());
  auto d = dims_array(input.dims());
  const int count = d[static_cast<int>(normal)];
  d[axes.horizontal] *= scale;
  d[axes.vertical] *= scale;
  return apply_pass([&](int k) { return data::extract_slice(input, normal, k); }, count, normal, dims_from(d), g, opt);
}

Volume first_pass_input(const Volume& lr_density, const Volume& lr_velocity, int factor) {
  if (lr_density.channels() != 1) throw ValidationError("density must have one channel");
  if (lr_velocity.channels() != 3) throw ValidationError("velocity must have three channels");
  require_same_dims(lr_density.dims(), lr_velocity.dims(), "first_pass_input");
  Volume in(lr_density.dims(), 4);
  in.set_channel(0, lr_density);
  for (int c = 0; c < 3; ++c) in.set_channel(c + 1, lr_velocity.channel(c));
  return upsample_linear_z(in, factor);
}

Volume second_pass_slice(const Volume& zup, const Volume& g1_out, int x, int factor) {
  const int a = zup.nx(), b = zup.ny(), fc = zup.nz();
  if (zup.channels() != 4) throw ValidationError("second_pass_slice: expected 4 z-up-sampled channels");
  if (g1_out.channels() != 1 || g1_out.dims() != Dims{a * factor, b * factor, fc})
    throw ValidationError("second_pass_slice: first-pass output " + g1_out.dims().str() + " does not match");
  if (x < 0 || x >= a * factor) throw ValidationError("second_pass_slice: x out of range");
  const int fb = b * factor;
  // Catmull-Rom rows for this x and for every HR y.
  const double sx = upsample_source_coord(x, factor);
  const int x0 = static_cast<int>(std::floor(sx));
  const auto wx = catmull_rom_weights(sx - x0);
  std::vector<int> ylo(fb);
  std::vector<std::array<double, 4>> wy(fb);
  for (int y = 0; y < fb; ++y) {
    const double sy = upsample_source_coord(y, factor);
    ylo[y] = static_cast<int>(std::floor(sy));
    wy[y] = catmull_rom_weights(sy - ylo[y]);
  }
  auto clampi = [](int v, int n) { return std::clamp(v, 0, n - 1); };

  // X-normal plane: horizontal = z, vertical = y.
  Volume s(Dims{fc, fb, 1}, 5);
  std::vector<double> line(static_cast<std::size_t>(b) * 4);
  for (int z = 0; z < fc; ++z) {
    for (int yl = 0; yl < b; ++yl)
      for (int c = 0; c < 4; ++c) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += wx[k] * zup.at(clampi(x0 - 1 + k, a), yl, z, c);
        line[static_cast<std::size_t>(yl) * 4 + c] = acc;
      }
    for (int y = 0; y < fb; ++y) {
      for (int c = 0; c < 4; ++c) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += wy[y][k] * line[static_cast<std::size_t>(clampi(ylo[y] - 1 + k, b)) * 4 + c];
        s.at(z, y, 0, c) = acc;
      }
      s.at(z, y, 0, 4) = g1_out.at(x, y, z);
    }
  }
  return s;
}

Volume multipass_upscale(const Volume& lr_density, const Volume& lr_velocity, const Generator& g1,
                         const Generator* g2, int factor, const MultipassOptions& opt) {
  if (factor < 2) throw ValidationError("multipass_upscale: factor must be >= 2");
  if (nets::generator_scale(g1.spec, g1.spec.final_stage()) != factor)
    throw ValidationError(g1.spec.name + " does not up-scale by " + std::to_string(factor));
  if (g1.spec.in_channels != 4) throw ValidationError(g1.spec.name + ": first pass expects 4 input channels");
  if (g2 && (g2->spec.in_channels != 5 || nets::generator_scale(g2->spec, g2->spec.final_stage()) != 1))
    throw ValidationError(g2->spec.name + ": second pass expects a 5-channel same-resolution generator");
  if (!lr_density.all_finite() || !lr_velocity.all_finite()) throw NumericalError("multipass_upscale: non-finite input");

  const Volume vel = rescale_velocity(lr_velocity, opt.dt_train, opt.dt_sim);
  const Volume zup = first_pass_input(lr_density, vel, factor);
  Volume hr = apply_pass(zup, Axis::Z, g1, opt.pass1);
  if (g2) {
    const Dims od = hr.dims();
    hr = apply_pass([&](int x) { return second_pass_slice(zup, hr, x, factor); }, od.nx, Axis::X, od, *g2, opt.pass2);
  }
  for (double& v : hr.data()) v = std::max(v, 0.0);
  if (!hr.all_finite()) throw NumericalError("multipass_upscale: non-finite output");
  return hr;
}

Volume single_axis_upscale(const Volume& lr_density, const Volume& lr_velocity, const Generator& g1, int factor,
                           Axis normal, const PassOptions& opt) {
  if (nets::generator_scale(g1.spec, g1.spec.final_stage()) != factor)
    throw ValidationError(g1.spec.name + " does not up-scale by " + std::to_string(factor));
  Volume in = first_pass_input(lr_density, lr_velocity, 1);
  in = upsample_linear_axis(in, normal, factor);
  Volume hr = apply_pass(in, normal, g1, opt);
  for (double& v : hr.data()) v = std::max(v, 0.0);
  return hr;
}

Generator identity_generator(const nets::NetworkSpec& spec) {
  Generator g{spec, nets::WeightStore::initialize(spec, 0)};
  g.weights.zero();
  return g;
}

}  // namespace mpgan::infer
