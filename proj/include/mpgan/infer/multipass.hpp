#pragma once

#include <functional>
#include <vector>

#include "mpgan/core/volume.hpp"
#include "mpgan/nets/network.hpp"

namespace mpgan::infer {

/// A trained generator ready for inference (final stage, alpha 1).
struct Generator {
  nets::NetworkSpec spec;
  nets::WeightStore weights;
};

/// One tile: the interior it is responsible for and the clipped input
/// window it is evaluated on, both in input pixels.
struct Tile {
  int x0 = 0, y0 = 0, w = 0, h = 0;
  int wx0 = 0, wy0 = 0, ww = 0, wh = 0;
};

struct TiledPlan {
  int width = 0;
  int height = 0;
  int tile = 0;     ///< interior side
  int overlap = 0;  ///< context added on every side, clipped at the slice border
  std::vector<Tile> tiles;

  /// Every pixel lies in exactly one interior and each window contains its interior.
  bool covers_exactly() const;
};

/// Interiors on a regular `tile` grid (the last row / column may be smaller).
TiledPlan make_plan(int width, int height, int tile, int overlap);

/// Tile overlaps used in published runs, in generator-input pixels:
/// 4 LR cells for the first pass, 16 HR cells for the second.
int paper_overlap(int pass);
/// max(paper overlap, exact dependency radius of the network).
int pass_overlap(const nets::NetworkSpec& spec, int pass);

struct PassOptions {
  int tile = 0;       ///< interior side; 0 uses the network's training tile
  int overlap = -1;   ///< -1 uses required_overlap(spec)
  int batch = 8;      ///< slices evaluated together
  bool tiled = true;  ///< false evaluates whole slices
};

/// Produces slice `index` (nz == 1, generator input channels).
using SliceFn = std::function<Volume(int index)>;

/// Runs a generator over `count` slices normal to `normal` and stacks the
/// single-channel outputs into a volume of `out_dims`.
Volume apply_pass(const SliceFn& slices, int count, Axis normal, const Dims& out_dims, const Generator& g,
                  const PassOptions& opt);
/// Convenience form slicing `input` along `normal`.
Volume apply_pass(const Volume& input, Axis normal, const Generator& g, const PassOptions& opt);

struct MultipassOptions {
  PassOptions pass1;
  PassOptions pass2;
  double dt_train = 0.5;
  double dt_sim = 0.5;
};

/// First-pass input: LR density and velocity stacked (4 channels) and
/// linearly up-sampled along z by f.
Volume first_pass_input(const Volume& lr_density, const Volume& lr_velocity, int factor);

/// Second-pass X-normal slice at HR index `x`: bicubic (in x and y) of the
/// z-up-sampled LR fields plus the first-pass output as channel 4.
Volume second_pass_slice(const Volume& z_upsampled, const Volume& first_pass_output, int x, int factor);

/// Linear z up-sampling, pass 1 on XY slices, pass 2 on YZ slices; the
/// result has f times the input dims and is clamped at zero. Without a
/// second generator the first-pass output is returned (clamped).
Volume multipass_upscale(const Volume& lr_density, const Volume& lr_velocity, const Generator& g1,
                         const Generator* g2, int factor, const MultipassOptions& opt = {});

/// Single-network baseline along one axis: the 4-channel input is linearly
/// up-sampled along `normal`, then the first-pass generator up-scales every
/// slice normal to it.
Volume single_axis_upscale(const Volume& lr_density, const Volume& lr_velocity, const Generator& g1, int factor,
                           Axis normal, const PassOptions& opt = {});

/// Wraps a network spec with zero weights: a pure bicubic-base generator.
Generator identity_generator(const nets::NetworkSpec& spec);

}  // namespace mpgan::infer
