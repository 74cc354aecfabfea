#pragma once

#include <array>
#include <random>

#include "mpgan/core/volume.hpp"
#include "mpgan/data/augment.hpp"

namespace mpgan::data {

// Tiles and slices are Volumes with nz == 1. Coordinates are "physical"
// input-slice units: input pixel i covers [i, i + 1); target pixel I of a
// j-times finer slice covers [I / j, (I + 1) / j).

/// A generator-input tile paired with its target tile. For first-pass
/// samples `input` holds LR density + 3 velocity channels; second-pass
/// samples add the first-pass output as a fifth channel. `flow` is the
/// in-plane velocity at target resolution in target pixels per time unit
/// (horizontal, vertical); empty when not requested.
struct SliceSample {
  Volume input;
  Volume target;
  Volume flow;
  Axis axis = Axis::Z;
  int sim_id = 0;
  int frame_id = 0;
  int j = 1;
};

/// Three consecutive frames of one slice/tile. `targets` are warped
/// towards the middle frame; `flows` are the un-negated velocities of each
/// frame (the generator side warps its own outputs with them).
struct TripletSample {
  std::array<Volume, 3> inputs;
  std::array<Volume, 3> targets;
  std::array<Volume, 3> flows;
  Axis axis = Axis::Z;
  int sim_id = 0;
  int frame_id = 0;  ///< middle frame
  int j = 1;
};

struct TileOffset {
  int ox = 0;
  int oy = 0;
  bool operator==(const TileOffset&) const = default;
};

/// Uniform over all offsets keeping a `tile`-sided square inside the slice.
TileOffset draw_tile_offset(int width, int height, int tile, std::mt19937_64& rng);

struct TileRequest {
  int tile = 16;                 ///< input tile side
  int j = 4;                     ///< target / input resolution ratio
  TileOffset offset;
  TileTransform transform;       ///< in-plane scale about the tile centre and horizontal mirror
  int velocity_channel = 1;      ///< first world-velocity channel of the input; -1 if none
  double velocity_to_target = 4; ///< converts stored velocity to target pixels per time unit
  bool with_flow = false;
};

/// Cuts aligned input/target tiles out of full slices. `normal` selects
/// which world velocity components are in-plane. With an identity
/// transform the result is an exact crop; otherwise both tiles are
/// resampled bilinearly from the full slices around the same centre and
/// velocities are multiplied by the scale (and mirrored when flipped).
SliceSample cut_tile(const Volume& input_slice, const Volume& target_slice, Axis normal, const TileRequest& req);

/// 2D semi-Lagrangian warp: out(p) = bilinear(tile, p - dt * flow(p)),
/// clamped at the tile border. `flow` has two channels in pixels per time unit.
Volume warp2d(const Volume& tile, const Volume& flow, double dt);

/// Warps the outer targets towards the middle frame: t-1 with +v(t-1),
/// t+1 with -v(t+1); the middle target is passed through.
TripletSample build_warped_triplet(const std::array<SliceSample, 3>& frames, double dt);

}  // namespace mpgan::data
