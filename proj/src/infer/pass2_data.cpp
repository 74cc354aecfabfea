#include "mpgan/infer/pass2_data.hpp"

#include <random>

#include "mpgan/core/fvol.hpp"
#include "mpgan/data/shard.hpp"
#include "mpgan/infer/combine.hpp"
#include "mpgan/solver/simulation.hpp"

namespace mpgan::infer {

data::FrameData load_pass2_frame(const std::filesystem::path& sim_dir, int frame, const Generator& g1, int factor,
                                 const PassOptions& pass1) {
  const data::FrameData lr = data::load_pass1_frame(sim_dir, frame, factor);
  const Volume zup = upsample_linear_z(lr.input, factor);
  const Volume g1_out = apply_pass(zup, Axis::Z, g1, pass1);
  const Dims hd = g1_out.dims();
  if (lr.target.dims() != hd) throw ValidationError("HR target " + lr.target.dims().str() + " does not match " + hd.str());
  data::FrameData f;
  f.input = Volume(hd, 5);
  for (int x = 0; x < hd.nx; ++x) {
    const Volume s = second_pass_slice(zup, g1_out, x, factor);  // (z, y) plane
    for (int z = 0; z < hd.nz; ++z)
      for (int y = 0; y < hd.ny; ++y)
        for (int c = 0; c < 5; ++c) f.input.at(x, y, z, c) = s.at(z, y, 0, c);
  }
  f.target = lr.target;
  return f;
}

data::ShardBuildSummary build_pass2_shards(const std::filesystem::path& data_dir, const std::filesystem::path& out_dir,
                                           const Generator& g1, const data::ShardBuildConfig& cfg) {
  if (cfg.factor != 4 && cfg.factor != 8) throw ValidationError("factor must be 4 or 8");
  if (nets::generator_scale(g1.spec, g1.spec.final_stage()) != cfg.factor)
    throw ValidationError(g1.spec.name + " does not up-scale by " + std::to_string(cfg.factor));
  data::SamplerConfig sc;
  sc.normal = Axis::X;
  sc.tile = cfg.tile;
  sc.j = 1;
  sc.normal_upsample = 1;
  sc.velocity_to_target = cfg.factor;
  sc.samples_per_frame = cfg.samples_per_frame;
  sc.temporal = cfg.temporal;
  sc.dt = cfg.dt;
  sc.augment = cfg.augment;
  std::filesystem::create_directories(out_dir);
  std::mt19937_64 rng(cfg.augment.seed + 104729u);
  std::vector<data::SliceSample> spatial;
  std::vector<data::TripletSample> temporal;
  const auto sims = data::list_simulations(data_dir);
  for (std::size_t s = 0; s < sims.size(); ++s) {
    const data::FrameSource source = [&](int f) {
      return std::make_shared<const data::FrameData>(load_pass2_frame(sims[s], f, g1, cfg.factor));
    };
    data::draw_samples(source, data::simulation_frames(sims[s]), static_cast<int>(s), sc, rng, spatial,
                       cfg.temporal ? &temporal : nullptr);
  }
  data::write_spatial_shard(out_dir / data::spatial_shard_name(1), spatial);
  if (cfg.temporal) data::write_temporal_shard(out_dir / data::temporal_shard_name(1), temporal);
  data::ShardBuildSummary summary;
  summary.levels = {1};
  summary.spatial_counts = {spatial.size()};
  summary.temporal_counts = {temporal.size()};
  return summary;
}

}  // namespace mpgan::infer
