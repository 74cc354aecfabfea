#include "mpgan/data/samples.hpp"

#include <cmath>

#include "mpgan/core/interp.hpp"
#include "mpgan/data/slicing.hpp"

namespace mpgan::data {
namespace {

void require_slice(const Volume& s, const char* what) {
  if (s.nz() != 1) throw ValidationError(std::string(what) + " must be a 2D slice (nz == 1)");
}

}  // namespace

TileOffset draw_tile_offset(int width, int height, int tile, std::mt19937_64& rng) {
  if (tile <= 0 || width < tile || height < tile) {
    throw ValidationError("slice " + std::to_string(width) + "x" + std::to_string(height) + " smaller than tile " +
                          std::to_string(tile));
  }
  TileOffset o;
  o.ox = std::uniform_int_distribution<int>(0, width - tile)(rng);
  o.oy = std::uniform_int_distribution<int>(0, height - tile)(rng);
  return o;
}

SliceSample cut_tile(const Volume& in, const Volume& tg, Axis normal, const TileRequest& req) {
  require_slice(in, "input slice");
  require_slice(tg, "target slice");
  const int t = req.tile, j = req.j, T = t * j;
  if (t <= 0 || j <= 0) throw ValidationError("tile side and factor must be positive");
  if (in.nx() < t || in.ny() < t) throw ValidationError("slice smaller than tile");
  if (tg.nx() != in.nx() * j || tg.ny() != in.ny() * j) {
    throw ValidationError("target slice " + tg.dims().str() + " is not " + std::to_string(j) + "x input " +
                          in.dims().str());
  }
  const TileOffset o = req.offset;
  if (o.ox < 0 || o.oy < 0 || o.ox + t > in.nx() || o.oy + t > in.ny()) throw ValidationError("tile offset out of range");
  const double s = req.transform.scale;
  if (!(s > 0.0)) throw ValidationError("tile scale must be positive");
  const int vc = req.velocity_channel;
  const int ch = in.channels();
  if (vc >= 0 && vc + 3 > ch) throw ValidationError("velocity channels out of range");
  const bool flip = req.transform.flip;
  const PlaneAxes pa = plane_axes(normal);

  SliceSample out;
  out.axis = normal;
  out.j = j;
  out.input = Volume(Dims{t, t, 1}, ch);
  out.target = Volume(Dims{T, T, 1}, tg.channels());
  const bool exact = s == 1.0 && !flip;

  // Physical tile centre and the map from an in-tile offset to slice coordinates.
  const double cx = o.ox + 0.5 * t, cy = o.oy + 0.5 * t;
  auto phys_x = [&](double local) { return cx + (flip ? -1.0 : 1.0) * (local - 0.5 * t) / s; };
  auto phys_y = [&](double local) { return cy + (local - 0.5 * t) / s; };

  for (int y = 0; y < t; ++y)
    for (int x = 0; x < t; ++x)
      for (int c = 0; c < ch; ++c)
        out.input.at(x, y, 0, c) = exact ? in.at(o.ox + x, o.oy + y, 0, c)
                                         : sample_bilinear(in, phys_x(x + 0.5) - 0.5, phys_y(y + 0.5) - 0.5, c);
  if (vc >= 0 && !exact) {
    for (int y = 0; y < t; ++y)
      for (int x = 0; x < t; ++x) {
        for (int a = 0; a < 3; ++a) out.input.at(x, y, 0, vc + a) *= s;
        if (flip) out.input.at(x, y, 0, vc + pa.horizontal) *= -1.0;
      }
  }

  for (int y = 0; y < T; ++y)
    for (int x = 0; x < T; ++x)
      for (int c = 0; c < tg.channels(); ++c)
        out.target.at(x, y, 0, c) =
            exact ? tg.at(o.ox * j + x, o.oy * j + y, 0, c)
                  : sample_bilinear(tg, phys_x((x + 0.5) / j) * j - 0.5, phys_y((y + 0.5) / j) * j - 0.5, c);

  if (req.with_flow) {
    if (vc < 0) throw ValidationError("flow requested without velocity channels");
    out.flow = Volume(Dims{T, T, 1}, 2);
    const double k = req.velocity_to_target * s;
    for (int y = 0; y < T; ++y)
      for (int x = 0; x < T; ++x) {
        const double u = phys_x((x + 0.5) / j) - 0.5, v = phys_y((y + 0.5) / j) - 0.5;
        const double vh = sample_bilinear(in, u, v, vc + pa.horizontal);
        const double vv = sample_bilinear(in, u, v, vc + pa.vertical);
        out.flow.at(x, y, 0, 0) = (flip ? -vh : vh) * k;
        out.flow.at(x, y, 0, 1) = vv * k;
      }
  }
  return out;
}

Volume warp2d(const Volume& tile, const Volume& flow, double dt) {
  require_slice(tile, "warp tile");
  if (flow.channels() != 2 || flow.nx() != tile.nx() || flow.ny() != tile.ny() || flow.nz() != 1) {
    throw ValidationError("flow " + flow.dims().str() + " does not match tile " + tile.dims().str());
  }
  if (!std::isfinite(dt)) throw ValidationError("warp dt must be finite");
  Volume out(tile.dims(), tile.channels());
  for (int y = 0; y < tile.ny(); ++y)
    for (int x = 0; x < tile.nx(); ++x) {
      const double u = x - dt * flow.at(x, y, 0, 0), v = y - dt * flow.at(x, y, 0, 1);
      for (int c = 0; c < tile.channels(); ++c) out.at(x, y, 0, c) = sample_bilinear(tile, u, v, c);
    }
  return out;
}

TripletSample build_warped_triplet(const std::array<SliceSample, 3>& f, double dt) {
  for (const auto& s : f) {
    if (s.flow.size() == 0) throw ValidationError("triplet frames need flow tiles");
    if (s.target.dims() != f[1].target.dims() || s.input.dims() != f[1].input.dims()) {
      throw ValidationError("triplet frames differ in shape");
    }
  }
  TripletSample t;
  t.axis = f[1].axis;
  t.sim_id = f[1].sim_id;
  t.frame_id = f[1].frame_id;
  t.j = f[1].j;
  for (int i = 0; i < 3; ++i) {
    t.inputs[i] = f[i].input;
    t.flows[i] = f[i].flow;
  }
  t.targets[0] = warp2d(f[0].target, f[0].flow, dt);
  t.targets[1] = f[1].target;
  t.targets[2] = warp2d(f[2].target, f[2].flow, -dt);
  return t;
}

}  // namespace mpgan::data
