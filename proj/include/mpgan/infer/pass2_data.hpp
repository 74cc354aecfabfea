#pragma once

#include <filesystem>

#include "mpgan/data/builder.hpp"
#include "mpgan/infer/multipass.hpp"

namespace mpgan::infer {

/// Second-pass frame: the 5-channel HR input built with a frozen first-pass
/// generator (bicubic LR density + velocity, then the first-pass output) and
/// the HR density target.
data::FrameData load_pass2_frame(const std::filesystem::path& sim_dir, int frame, const Generator& g1, int factor,
                                 const PassOptions& pass1 = {});

/// X-normal (YZ-plane) shards of 64^2 HR tiles for training the second
/// generator. Shards are named with j = 1 since input and target share the
/// resolution. `g1` is only read.
data::ShardBuildSummary build_pass2_shards(const std::filesystem::path& data_dir, const std::filesystem::path& out_dir,
                                           const Generator& g1, const data::ShardBuildConfig& cfg);

}  // namespace mpgan::infer
