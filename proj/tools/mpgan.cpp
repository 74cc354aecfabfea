// Command-line front end: data generation, slicing, training, inference,
// baselines, benchmarks and inspection.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "mpgan/core/fvol.hpp"
#include "mpgan/data/builder.hpp"
#include "mpgan/data/shard.hpp"
#include "mpgan/eval/bench.hpp"
#include "mpgan/eval/metrics.hpp"
#include "mpgan/eval/render.hpp"
#include "mpgan/infer/combine.hpp"
#include "mpgan/infer/multipass.hpp"
#include "mpgan/infer/pass2_data.hpp"
#include "mpgan/solver/simulation.hpp"
#include "mpgan/train/checkpoint.hpp"
#include "mpgan/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace mpgan;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

// Accepts a checkpoint directory or a run directory holding one.
fs::path checkpoint_dir(const fs::path& p) {
  return fs::is_directory(p / "checkpoint") ? p / "checkpoint" : p;
}

infer::Generator load_gen(const fs::path& dir, int expected_pass) {
  train::GeneratorCheckpoint g = train::load_generator(checkpoint_dir(dir));
  if (g.pass != expected_pass)
    throw ValidationError(dir.string() + " holds a pass-" + std::to_string(g.pass) + " generator, expected pass " +
                          std::to_string(expected_pass));
  return {g.spec, g.weights};
}

std::vector<Dims> parse_sizes(const std::vector<int>& sides) {
  std::vector<Dims> out;
  for (int s : sides) {
    if (s < 1) throw ValidationError("sizes must be positive");
    out.push_back({s, s, s});
  }
  return out;
}

infer::Generator random_gen(const nets::NetworkSpec& spec, std::uint64_t seed) {
  return {spec, nets::WeightStore::initialize(spec, seed)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-pass GAN super-resolution for smoke volumes"};
  app.set_config("--config", "", "INI/TOML file with option values");
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Simulate paired LR/HR smoke sequences");
  fs::path gen_out;
  int gen_res = 0, gen_factor = 4, gen_frames = 120, gen_sims = 20;
  bool gen_desk = false;
  gen->add_option("--out", gen_out, "Output directory")->required();
  auto* gen_res_opt = gen->add_option("--resolution", gen_res, "HR grid side (default 256 / 512 for 4x / 8x)");
  gen->add_option("--factor", gen_factor, "Up-scaling factor (4 or 8)")->capture_default_str();
  auto* gen_frames_opt = gen->add_option("--frames", gen_frames, "Frames per simulation")->capture_default_str();
  auto* gen_sims_opt = gen->add_option("--sims", gen_sims, "Number of simulations")->capture_default_str();
  gen->add_flag("--desk-scale", gen_desk, "4 sims x 30 frames at HR 64 (4x) / 128 (8x) unless given explicitly");

  // slice
  auto* slice = app.add_subcommand("slice", "Cut augmented training tiles into shards");
  fs::path sl_data, sl_out, sl_g1;
  int sl_pass = 1, sl_factor = 4, sl_tile = 0, sl_spf = 4;
  std::vector<int> sl_levels;
  bool sl_no_temporal = false;
  slice->add_option("--data,--in", sl_data, "Dataset directory from gen-data")->required();
  slice->add_option("--out", sl_out, "Shard directory")->required();
  slice->add_option("--pass", sl_pass, "1: XY tiles, 2: YZ tiles from a frozen first pass")->capture_default_str();
  slice->add_option("--factor", sl_factor, "Up-scaling factor")->capture_default_str();
  slice->add_option("--g1", sl_g1, "First-pass checkpoint (pass 2)");
  slice->add_option("--tile", sl_tile, "Input tile side (default 16 for pass 1, 64 for pass 2)");
  slice->add_option("--levels", sl_levels, "Curriculum levels (pass 1)")->delimiter(',');
  slice->add_option("--samples-per-frame", sl_spf, "Tiles per frame")->capture_default_str();
  slice->add_flag("--no-temporal", sl_no_temporal, "Skip warped triplets");

  // train
  auto* tr = app.add_subcommand("train", "Train a generator with its critics");
  fs::path tr_shards, tr_out;
  int tr_pass = 1, tr_factor = 4, tr_level = 0;
  std::string tr_loss = "wgan";
  bool tr_desk = false, tr_no_temporal = false;
  fs::path tr_resume;
  std::int64_t tr_iters = 0, tr_ckpt_every = 1000;
  tr->add_option("--shards", tr_shards, "Shard directory")->required();
  tr->add_option("--out", tr_out, "Run directory (log + checkpoint)")->required();
  tr->add_option("--pass", tr_pass, "Generator pass")->capture_default_str();
  tr->add_option("--factor", tr_factor, "Up-scaling factor")->capture_default_str();
  tr->add_option("--level", tr_level, "Shard level (default: factor for pass 1, 1 for pass 2)");
  tr->add_option("--loss", tr_loss, "wgan, lsgan or tempo")->capture_default_str();
  tr->add_flag("--desk-scale,--desk", tr_desk, "Shrink the schedule for a desk-scale run");
  tr->add_option("--iterations", tr_iters, "Stop after this many iterations (0: full schedule)");
  tr->add_option("--checkpoint-every", tr_ckpt_every, "Checkpoint period")->capture_default_str();
  tr->add_option("--resume", tr_resume, "Checkpoint (or run directory) to continue from");
  tr->add_flag("--no-temporal", tr_no_temporal, "Train without the temporal critic");

  // infer
  auto* inf = app.add_subcommand("infer", "Up-scale a low-resolution frame");
  fs::path in_g1, in_g2, in_density, in_velocity, in_out;
  double in_dt_train = 0.5, in_dt_sim = 0.5;
  bool in_no_tile = false;
  int in_tile1 = 0, in_tile2 = 0, in_batch = 8, in_factor = 0;
  std::string in_single;
  inf->add_option("--g1,--ckpt1", in_g1, "First-pass checkpoint")->required();
  inf->add_option("--g2,--ckpt2", in_g2, "Second-pass checkpoint (omit for a single pass)");
  inf->add_option("--density,--in", in_density, "LR density FVOL")->required();
  inf->add_option("--velocity,--vel", in_velocity, "LR velocity FVOL (3 channels)")->required();
  inf->add_option("--factor", in_factor, "Expected up-scaling factor (checked against the checkpoint)");
  inf->add_option("--out", in_out, "Output FVOL")->required();
  inf->add_option("--dt-train", in_dt_train, "Time step the networks were trained with")->capture_default_str();
  inf->add_option("--dt-sim", in_dt_sim, "Time step of the input velocity")->capture_default_str();
  inf->add_flag("--no-tile", in_no_tile, "Evaluate whole slices");
  inf->add_option("--tile1", in_tile1, "First-pass tile side (LR)");
  inf->add_option("--tile2", in_tile2, "Second-pass tile side (HR)");
  inf->add_option("--batch", in_batch, "Slices per forward pass")->capture_default_str();
  inf->add_option("--single-axis", in_single, "x, y or z: one network along one axis (baseline)");

  // combine
  auto* comb = app.add_subcommand("combine", "Merge three single-axis outputs");
  std::vector<fs::path> cb_inputs;
  fs::path cb_lr, cb_out;
  std::string cb_mode = "avg", cb_base = "z";
  int cb_factor = 4;
  comb->add_option("--inputs", cb_inputs, "X-, Y- and Z-axis outputs")->required()->expected(3);
  comb->add_option("--mode", cb_mode, "avg, max, res or cres")->capture_default_str();
  comb->add_option("--base-axis", cb_base, "Base volume for res / cres")->capture_default_str();
  comb->add_option("--lr", cb_lr, "LR density (res / cres reference, linearly up-sampled)");
  comb->add_option("--factor", cb_factor, "Up-scaling factor of --lr")->capture_default_str();
  comb->add_option("--out", cb_out, "Output FVOL")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Time inference and the solver");
  std::vector<int> bn_sizes{32, 64, 96}, bn_solver_sizes;
  int bn_factor = 4, bn_frames = 3, bn_substeps = 0;
  fs::path bn_g1, bn_g2, bn_csv;
  bench->add_option("--sizes", bn_sizes, "LR input sides for inference")->delimiter(',')->capture_default_str();
  bench->add_option("--factor", bn_factor, "Up-scaling factor")->capture_default_str();
  bench->add_option("--frames", bn_frames, "Timed frames per size")->capture_default_str();
  bench->add_option("--g1", bn_g1, "First-pass checkpoint (default: random weights)");
  bench->add_option("--g2", bn_g2, "Second-pass checkpoint (default: random weights)");
  bench->add_option("--solver-sizes", bn_solver_sizes, "HR sides for the solver timing")->delimiter(',');
  bench->add_option("--substeps", bn_substeps, "Solver substeps per frame (default: factor)");
  bench->add_option("--csv", bn_csv, "Write records to this CSV");

  // render
  auto* render = app.add_subcommand("render", "Write one slice as a grayscale PNG");
  fs::path rn_in, rn_out;
  std::string rn_axis = "z";
  int rn_index = -1;
  render->add_option("--in", rn_in, "Volume FVOL")->required();
  render->add_option("--axis", rn_axis, "Slice normal")->capture_default_str();
  render->add_option("--index", rn_index, "Slice index (default: middle)");
  render->add_option("--out", rn_out, "PNG path")->required();

  // psnr
  auto* ps = app.add_subcommand("psnr", "Peak signal-to-noise ratio of two volumes");
  fs::path ps_a, ps_b;
  double ps_peak = 1.0;
  ps->add_option("a", ps_a, "First FVOL")->required();
  ps->add_option("b", ps_b, "Second FVOL")->required();
  ps->add_option("--peak", ps_peak, "Peak value")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) {
      if (gen_desk) {
        if (!gen_res_opt->count()) gen_res = gen_factor == 8 ? 128 : 64;
        if (!gen_frames_opt->count()) gen_frames = 30;
        if (!gen_sims_opt->count()) gen_sims = 4;
      }
      if (gen_res <= 0) gen_res = gen_factor == 8 ? 512 : 256;
      solver::SimConfig sc;
      sc.hr_resolution = {gen_res, gen_res, gen_res};
      sc.upscale_factor = gen_factor;
      sc.frames = gen_frames;
      sc.simulations = gen_sims;
      sc.seed = seed;
      sc.validate();
      const auto sims = solver::generate_dataset(sc, gen_out);
      int unconverged = 0;
      for (const auto& s : sims) unconverged += s.unconverged_steps;
      std::printf("wrote %zu simulations x %d frames to %s (%d unconverged steps)\n", sims.size(), gen_frames,
                  gen_out.c_str(), unconverged);
    } else if (*slice) {
      data::ShardBuildConfig bc;
      bc.factor = sl_factor;
      bc.samples_per_frame = sl_spf;
      bc.temporal = !sl_no_temporal;
      bc.augment.seed = seed;
      data::ShardBuildSummary summary;
      if (sl_pass == 1) {
        bc.tile = sl_tile > 0 ? sl_tile : 16;
        bc.levels = sl_levels;
        summary = data::build_pass1_shards(sl_data, sl_out, bc);
      } else if (sl_pass == 2) {
        if (sl_g1.empty()) throw ValidationError("slice --pass 2 needs --g1");
        bc.tile = sl_tile > 0 ? sl_tile : 64;
        summary = infer::build_pass2_shards(sl_data, sl_out, load_gen(sl_g1, 1), bc);
      } else {
        throw ValidationError("--pass must be 1 or 2");
      }
      for (std::size_t i = 0; i < summary.levels.size(); ++i)
        std::printf("level %d: %zu spatial, %zu temporal samples\n", summary.levels[i], summary.spatial_counts[i],
                    summary.temporal_counts[i]);
    } else if (*tr) {
      train::TrainConfig cfg = train::TrainConfig::make(tr_pass, tr_factor, train::parse_loss_kind(tr_loss), tr_desk);
      cfg.iterations = tr_iters;
      cfg.seed = seed;
      cfg.checkpoint_every = tr_ckpt_every;
      const int level = tr_level > 0 ? tr_level : (tr_pass == 1 ? tr_factor : 1);
      train::TrainData td;
      td.spatial = data::read_spatial_shard(tr_shards / data::spatial_shard_name(level));
      const fs::path tpath = tr_shards / data::temporal_shard_name(level);
      if (!tr_no_temporal && fs::exists(tpath)) td.temporal = data::read_temporal_shard(tpath);
      train::Trainer trainer(cfg, std::move(td));
      if (!tr_resume.empty())
        trainer.resume(train::load_checkpoint(checkpoint_dir(tr_resume)));
      const std::int64_t total = cfg.total_iterations();
      const std::int64_t every = std::max<std::int64_t>(1, total / 20);
      trainer.run(tr_out, [&](const train::StepRecord& r) {
        if (r.iteration % every == 0 || r.iteration == total) std::printf("%s\n", r.csv_row().c_str());
      });
      std::printf("trained %lld iterations into %s\n", static_cast<long long>(trainer.iteration()), tr_out.c_str());
    } else if (*inf) {
      const infer::Generator g1 = load_gen(in_g1, 1);
      const int factor = nets::generator_scale(g1.spec, g1.spec.final_stage());
      if (in_factor != 0 && in_factor != factor)
        throw ValidationError("--factor " + std::to_string(in_factor) + " but the checkpoint up-scales by " +
                              std::to_string(factor));
      const Volume d = read_fvol(in_density);
      const Volume v = read_fvol(in_velocity);
      infer::MultipassOptions opt;
      opt.dt_train = in_dt_train;
      opt.dt_sim = in_dt_sim;
      opt.pass1.tiled = opt.pass2.tiled = !in_no_tile;
      opt.pass1.batch = opt.pass2.batch = in_batch;
      opt.pass1.tile = in_tile1;
      opt.pass2.tile = in_tile2;
      opt.pass1.overlap = infer::pass_overlap(g1.spec, 1);
      Volume out;
      if (!in_single.empty()) {
        const Volume vs = infer::rescale_velocity(v, in_dt_train, in_dt_sim);
        out = infer::single_axis_upscale(d, vs, g1, factor, parse_axis(in_single), opt.pass1);
      } else if (!in_g2.empty()) {
        const infer::Generator g2 = load_gen(in_g2, 2);
        opt.pass2.overlap = infer::pass_overlap(g2.spec, 2);
        out = infer::multipass_upscale(d, v, g1, &g2, factor, opt);
      } else {
        out = infer::multipass_upscale(d, v, g1, nullptr, factor, opt);
      }
      write_fvol(in_out, out);
      std::printf("%s -> %s (%s)\n", d.dims().str().c_str(), out.dims().str().c_str(), in_out.c_str());
    } else if (*comb) {
      const std::array<Volume, 3> outs{read_fvol(cb_inputs[0]), read_fvol(cb_inputs[1]), read_fvol(cb_inputs[2])};
      const infer::CombineMode mode = infer::parse_combine_mode(cb_mode);
      Volume up;
      if (mode == infer::CombineMode::Res || mode == infer::CombineMode::Cres) {
        if (cb_lr.empty()) throw ValidationError("res / cres need --lr");
        up = infer::upsample_trilinear(read_fvol(cb_lr), cb_factor);
      }
      write_fvol(cb_out, infer::combine_axes(outs, mode, parse_axis(cb_base), up));
      std::printf("wrote %s\n", cb_out.c_str());
    } else if (*bench) {
      const bool eight = bn_factor == 8;
      if (bn_factor != 4 && !eight) throw ValidationError("--factor must be 4 or 8");
      const infer::Generator g1 =
          bn_g1.empty() ? random_gen(eight ? nets::build_g1_8x() : nets::build_g_4x(), seed) : load_gen(bn_g1, 1);
      const infer::Generator g2 =
          bn_g2.empty() ? random_gen(eight ? nets::build_g2_8x() : nets::build_g2_4x(), seed + 1) : load_gen(bn_g2, 2);
      infer::MultipassOptions opt;
      opt.pass1.overlap = infer::pass_overlap(g1.spec, 1);
      opt.pass2.overlap = infer::pass_overlap(g2.spec, 2);
      auto recs = eval::bench_inference(parse_sizes(bn_sizes), g1, &g2, bn_factor, bn_frames, opt, seed);
      std::vector<eval::BenchRecord> solver_recs;
      if (!bn_solver_sizes.empty())
        solver_recs = eval::bench_solver(parse_sizes(bn_solver_sizes), bn_substeps > 0 ? bn_substeps : bn_factor,
                                         bn_frames, 0.5, seed);
      std::fputs(eval::performance_table(solver_recs, recs).c_str(), stdout);
      if (recs.size() >= 2) {
        const auto fit = eval::time_fit(recs);
        std::printf("inference: seconds = %.3e * voxels + %.3f, R^2 = %.4f, log-log exponent %.3f\n", fit.slope,
                    fit.intercept, fit.r2, eval::scaling_exponent(recs));
      }
      if (solver_recs.size() >= 2)
        std::printf("solver: log-log exponent %.3f\n", eval::scaling_exponent(solver_recs));
      if (!bn_csv.empty()) {
        recs.insert(recs.end(), solver_recs.begin(), solver_recs.end());
        eval::write_bench_csv(bn_csv, recs);
      }
    } else if (*render) {
      const Volume v = read_fvol(rn_in);
      const Axis axis = parse_axis(rn_axis);
      const int n = axis == Axis::X ? v.nx() : (axis == Axis::Y ? v.ny() : v.nz());
      const int index = rn_index >= 0 ? rn_index : n / 2;
      const double mx = eval::render_slice(v, axis, index, rn_out);
      std::printf("wrote %s (density_max %.6g)\n", rn_out.c_str(), mx);
    } else if (*ps) {
      std::printf("%s\n", eval::format_psnr(eval::psnr(read_fvol(ps_a), read_fvol(ps_b), ps_peak)).c_str());
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
