#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "mpgan/data/augment.hpp"
#include "mpgan/data/samples.hpp"
#include "mpgan/data/slicing.hpp"

namespace mpgan::data {

/// One frame of one simulation as loaded from disk.
struct FrameData {
  Volume input;   ///< generator input channels; channels 1..3 are world velocity
  Volume target;  ///< density at the target resolution
};

struct SamplerConfig {
  Axis normal = Axis::Z;
  int tile = 16;                 ///< input tile side
  int j = 4;                     ///< in-plane target / input ratio
  int normal_upsample = 4;       ///< linear up-sampling of the input along `normal` (pass 1: j, pass 2: 1)
  double velocity_to_target = 4; ///< stored velocity units -> target pixels
  int samples_per_frame = 4;
  bool temporal = true;
  double dt = 0.5;
  double threshold = kSliceDensityThreshold;
  AugmentConfig augment;
};

/// Draws samples for one simulation. For every frame one volume transform
/// is drawn and applied to that frame and its neighbours; slices whose
/// input density mean falls below the threshold are never used. Frames
/// with both neighbours also yield a warped triplet sharing the tile of the
/// corresponding spatial sample.
void draw_samples(const std::vector<FrameData>& frames, int sim_id, const SamplerConfig& cfg, std::mt19937_64& rng,
                  std::vector<SliceSample>& spatial, std::vector<TripletSample>* temporal);

/// Lazily produced frames; at most three are held at a time.
using FrameSource = std::function<std::shared_ptr<const FrameData>(int frame)>;
void draw_samples(const FrameSource& frames, int frame_count, int sim_id, const SamplerConfig& cfg,
                  std::mt19937_64& rng, std::vector<SliceSample>& spatial, std::vector<TripletSample>* temporal);

/// Simulation directories (`sim_XXXX`) below `data_dir`, sorted.
std::vector<std::filesystem::path> list_simulations(const std::filesystem::path& data_dir);

/// Frame count recorded in a simulation's metadata.
int simulation_frames(const std::filesystem::path& sim_dir);

/// First-pass frame: LR density + LR velocity (4 channels) and density at level j.
FrameData load_pass1_frame(const std::filesystem::path& sim_dir, int frame, int j);

struct ShardBuildConfig {
  int factor = 4;
  std::vector<int> levels;  ///< curriculum factors to build; empty means {factor}
  int tile = 16;
  int samples_per_frame = 4;
  bool temporal = true;
  double dt = 0.5;
  AugmentConfig augment;
};

struct ShardBuildSummary {
  std::vector<int> levels;
  std::vector<std::size_t> spatial_counts;
  std::vector<std::size_t> temporal_counts;
};

/// Builds first-pass (Z-normal) shards for every requested level into `out_dir`.
ShardBuildSummary build_pass1_shards(const std::filesystem::path& data_dir, const std::filesystem::path& out_dir,
                                     const ShardBuildConfig& cfg);

}  // namespace mpgan::data
