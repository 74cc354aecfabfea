#include "mpgan/data/builder.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "mpgan/core/fvol.hpp"
#include "mpgan/core/interp.hpp"
#include "mpgan/data/shard.hpp"
#include "mpgan/solver/simulation.hpp"

namespace mpgan::data {
namespace {

int extent(const Dims& d, Axis a) { return a == Axis::X ? d.nx : (a == Axis::Y ? d.ny : d.nz); }

struct Prepared {
  Volume input;
  Volume target;
};

Prepared prepare(const FrameData& f, const VolumeTransform& t, const SamplerConfig& cfg) {
  const int vc = f.input.channels() >= 4 ? 1 : -1;
  Prepared p;
  p.input = transform_volume(f.input, t, vc);
  if (cfg.normal_upsample > 1) p.input = upsample_linear_axis(p.input, cfg.normal, cfg.normal_upsample);
  p.target = transform_volume(f.target, t, -1);
  const PlaneAxes pa = plane_axes(cfg.normal);
  const Dims di = p.input.dims(), dt = p.target.dims();
  auto e = [](const Dims& d, int a) { return a == 0 ? d.nx : (a == 1 ? d.ny : d.nz); };
  if (extent(di, cfg.normal) != extent(dt, cfg.normal) || e(di, pa.horizontal) * cfg.j != e(dt, pa.horizontal) ||
      e(di, pa.vertical) * cfg.j != e(dt, pa.vertical)) {
    throw ValidationError("input " + di.str() + " and target " + dt.str() + " do not pair at factor " +
                          std::to_string(cfg.j));
  }
  return p;
}

}  // namespace

void draw_samples(const std::vector<FrameData>& frames, int sim_id, const SamplerConfig& cfg, std::mt19937_64& rng,
                  std::vector<SliceSample>& spatial, std::vector<TripletSample>* temporal) {
  const FrameSource source = [&frames](int t) {
    return std::shared_ptr<const FrameData>(&frames[static_cast<std::size_t>(t)], [](const FrameData*) {});
  };
  draw_samples(source, static_cast<int>(frames.size()), sim_id, cfg, rng, spatial, temporal);
}

void draw_samples(const FrameSource& source, int n, int sim_id, const SamplerConfig& cfg, std::mt19937_64& rng,
                  std::vector<SliceSample>& spatial, std::vector<TripletSample>* temporal) {
  cfg.augment.validate();
  std::map<int, std::shared_ptr<const FrameData>> cache;
  auto frame = [&](int t) -> const FrameData& {
    auto it = cache.find(t);
    if (it == cache.end()) it = cache.emplace(t, source(t)).first;
    return *it->second;
  };
  for (int t = 0; t < n; ++t) {
    while (!cache.empty() && cache.begin()->first < t - 1) cache.erase(cache.begin());
    const VolumeTransform xf = draw_volume_transform(cfg.augment, rng);
    const Prepared mid = prepare(frame(t), xf, cfg);

    std::vector<int> candidates;
    const int slices = extent(mid.input.dims(), cfg.normal);
    for (int k = 0; k < slices; ++k) {
      if (mean_density(extract_slice(mid.input, cfg.normal, k)) >= cfg.threshold * (1.0 - 1e-12)) candidates.push_back(k);
    }
    if (candidates.empty()) continue;

    const bool triplet = temporal && cfg.temporal && t >= 1 && t + 1 < n;
    Prepared prev, next;
    if (triplet) {
      prev = prepare(frame(t - 1), xf, cfg);
      next = prepare(frame(t + 1), xf, cfg);
    }
    for (int s = 0; s < cfg.samples_per_frame; ++s) {
      const int k = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
      const Volume in = extract_slice(mid.input, cfg.normal, k);
      TileRequest req;
      req.tile = cfg.tile;
      req.j = cfg.j;
      req.offset = draw_tile_offset(in.nx(), in.ny(), cfg.tile, rng);
      req.transform = draw_tile_transform(cfg.augment, rng);
      req.velocity_channel = in.channels() >= 4 ? 1 : -1;
      req.velocity_to_target = cfg.velocity_to_target;
      req.with_flow = triplet;

      auto cut = [&](const Prepared& p, const Volume* in_slice, int frame) {
        SliceSample smp = cut_tile(in_slice ? *in_slice : extract_slice(p.input, cfg.normal, k),
                                   extract_slice(p.target, cfg.normal, k), cfg.normal, req);
        smp.sim_id = sim_id;
        smp.frame_id = frame;
        return smp;
      };
      SliceSample centre = cut(mid, &in, t);
      if (triplet) {
        temporal->push_back(build_warped_triplet({cut(prev, nullptr, t - 1), centre, cut(next, nullptr, t + 1)}, cfg.dt));
        centre.flow = Volume();
      }
      spatial.push_back(std::move(centre));
    }
  }
}

std::vector<std::filesystem::path> list_simulations(const std::filesystem::path& data_dir) {
  if (!std::filesystem::is_directory(data_dir)) throw ValidationError("'" + data_dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(data_dir)) {
    if (e.is_directory() && e.path().filename().string().rfind("sim_", 0) == 0) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ValidationError("no sim_* directories in '" + data_dir.string() + "'");
  return out;
}

int simulation_frames(const std::filesystem::path& sim_dir) {
  const auto path = sim_dir / "simulation.meta.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return nlohmann::json::parse(in).at("frames").get<int>();
}

FrameData load_pass1_frame(const std::filesystem::path& sim_dir, int frame, int j) {
  const Volume d = read_fvol(sim_dir / solver::frame_file("density", 1, frame));
  const Volume v = read_fvol(sim_dir / solver::frame_file("velocity", 1, frame));
  if (d.dims() != v.dims() || v.channels() != 3) throw ValidationError("LR density/velocity mismatch in " + sim_dir.string());
  FrameData f;
  f.input = Volume(d.dims(), 4);
  f.input.set_channel(0, d);
  for (int c = 0; c < 3; ++c) f.input.set_channel(c + 1, v.channel(c));
  f.target = read_fvol(sim_dir / solver::frame_file("density", j, frame));
  return f;
}

ShardBuildSummary build_pass1_shards(const std::filesystem::path& data_dir, const std::filesystem::path& out_dir,
                                     const ShardBuildConfig& cfg) {
  if (cfg.factor != 4 && cfg.factor != 8) throw ValidationError("factor must be 4 or 8");
  ShardBuildSummary summary;
  summary.levels = cfg.levels.empty() ? std::vector<int>{cfg.factor} : cfg.levels;
  const auto exported = solver::export_levels(cfg.factor);
  for (int j : summary.levels) {
    if (j < 2 || std::find(exported.begin(), exported.end(), j) == exported.end()) {
      throw ValidationError("level " + std::to_string(j) + " is not exported for factor " + std::to_string(cfg.factor));
    }
  }
  std::filesystem::create_directories(out_dir);
  const auto sims = list_simulations(data_dir);
  for (std::size_t li = 0; li < summary.levels.size(); ++li) {
    const int j = summary.levels[li];
    SamplerConfig sc;
    sc.normal = Axis::Z;
    sc.tile = cfg.tile;
    sc.j = j;
    sc.normal_upsample = j;
    sc.velocity_to_target = j;
    sc.samples_per_frame = cfg.samples_per_frame;
    sc.temporal = cfg.temporal;
    sc.dt = cfg.dt;
    sc.augment = cfg.augment;
    std::mt19937_64 rng(cfg.augment.seed + 7919u * static_cast<std::uint64_t>(j));
    std::vector<SliceSample> spatial;
    std::vector<TripletSample> temporal;
    for (std::size_t s = 0; s < sims.size(); ++s) {
      const FrameSource source = [&](int f) {
        return std::make_shared<const FrameData>(load_pass1_frame(sims[s], f, j));
      };
      draw_samples(source, simulation_frames(sims[s]), static_cast<int>(s), sc, rng, spatial,
                   cfg.temporal ? &temporal : nullptr);
    }
    write_spatial_shard(out_dir / spatial_shard_name(j), spatial);
    if (cfg.temporal) write_temporal_shard(out_dir / temporal_shard_name(j), temporal);
    summary.spatial_counts.push_back(spatial.size());
    summary.temporal_counts.push_back(temporal.size());
  }
  return summary;
}

}  // namespace mpgan::data
