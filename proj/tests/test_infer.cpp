#include "torch_doctest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "mpgan/core/interp.hpp"
#include "mpgan/data/shard.hpp"
#include "mpgan/data/slicing.hpp"
#include "mpgan/infer/combine.hpp"
#include "mpgan/infer/multipass.hpp"
#include "mpgan/infer/pass2_data.hpp"
#include "mpgan/solver/simulation.hpp"

using namespace mpgan;
using namespace mpgan::infer;

namespace {

Volume random_volume(Dims d, int channels, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Volume v(d, channels);
  for (double& x : v.data()) x = u(rng);
  return v;
}

// Smooth positive blob, so the first-pass base is representative.
Volume blob(Dims d) {
  Volume v(d, 1);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const double dx = (x - 0.4 * d.nx) / d.nx, dy = (y - 0.5 * d.ny) / d.ny, dz = (z - 0.6 * d.nz) / d.nz;
        v.at(x, y, z) = std::exp(-12.0 * (dx * dx + dy * dy + dz * dz));
      }
  return v;
}

double max_abs_diff(const Volume& a, const Volume& b) {
  REQUIRE(a.dims() == b.dims());
  REQUIRE(a.channels() == b.channels());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

Generator random_generator(const nets::NetworkSpec& spec, std::uint64_t seed) {
  return Generator{spec, nets::WeightStore::initialize(spec, seed)};
}

}  // namespace

TEST_CASE("tile plans cover every pixel exactly once") {
  for (int w : {1, 7, 16, 33, 64, 100})
    for (int h : {1, 16, 50})
      for (int tile : {1, 5, 16, 64})
        for (int overlap : {0, 3, 16}) {
          const TiledPlan p = make_plan(w, h, tile, overlap);
          CHECK(p.covers_exactly());
          const auto expected = static_cast<std::size_t>((w + tile - 1) / tile) * ((h + tile - 1) / tile);
          CHECK(p.tiles.size() == expected);
          for (const Tile& t : p.tiles) {
            CHECK(t.x0 - t.wx0 == std::min(overlap, t.x0));
            CHECK(t.y0 - t.wy0 == std::min(overlap, t.y0));
          }
        }
  TiledPlan broken = make_plan(32, 32, 16, 4);
  broken.tiles.pop_back();
  CHECK_FALSE(broken.covers_exactly());
  broken = make_plan(32, 32, 16, 4);
  broken.tiles.push_back(broken.tiles.front());
  CHECK_FALSE(broken.covers_exactly());
  CHECK_THROWS_AS(make_plan(0, 4, 4, 0), ValidationError);
  CHECK_THROWS_AS(make_plan(4, 4, 0, 0), ValidationError);
  CHECK_THROWS_AS(make_plan(4, 4, 4, -1), ValidationError);
}

TEST_CASE("published overlaps and the effective margin") {
  CHECK(paper_overlap(1) == 4);
  CHECK(paper_overlap(2) == 16);
  CHECK_THROWS_AS(paper_overlap(3), ValidationError);
  CHECK(pass_overlap(nets::build_g_4x(), 1) == 4);
  CHECK(pass_overlap(nets::build_g2_4x(), 2) == 16);
  CHECK(pass_overlap(nets::build_g2_8x(), 2) == 32);
  CHECK(pass_overlap(nets::build_g1_8x(), 1) >= 8);
}

TEST_CASE("axis combiners") {
  const Dims d{3, 2, 2};
  const Volume up = random_volume(d, 1, 1);
  const std::array<Volume, 3> outs{random_volume(d, 1, 2), random_volume(d, 1, 3), random_volume(d, 1, 4)};
  const Volume avg = combine_axes(outs, CombineMode::Avg, Axis::Z, up);
  const Volume mx = combine_axes(outs, CombineMode::Max, Axis::Z, up);
  const Volume res = combine_axes(outs, CombineMode::Res, Axis::Z, up);
  const Volume cres = combine_axes(outs, CombineMode::Cres, Axis::Z, up);
  const Volume res_x = combine_axes(outs, CombineMode::Res, Axis::X, up);
  for (std::size_t i = 0; i < up.size(); ++i) {
    const double a = outs[0].data()[i], b = outs[1].data()[i], c = outs[2].data()[i], u = up.data()[i];
    CHECK(avg.data()[i] == doctest::Approx((a + b + c) / 3.0).epsilon(1e-15));
    CHECK(mx.data()[i] == std::max({a, b, c}));
    CHECK(res.data()[i] == doctest::Approx(c + (a - u) + (b - u)).epsilon(1e-14));
    CHECK(cres.data()[i] == doctest::Approx(c + std::max(a - u, 0.0) + std::max(b - u, 0.0)).epsilon(1e-14));
    CHECK(res_x.data()[i] == doctest::Approx(a + (b - u) + (c - u)).epsilon(1e-14));
  }
  // Identical outputs: AVG and MAX reproduce them.
  const std::array<Volume, 3> same{up, up, up};
  CHECK(max_abs_diff(combine_axes(same, CombineMode::Avg, Axis::Y, up), up) <= 1e-15);
  CHECK(combine_axes(same, CombineMode::Cres, Axis::Y, up) == up);
  CHECK(parse_combine_mode("cres") == CombineMode::Cres);
  CHECK_THROWS_AS(parse_combine_mode("median"), ValidationError);
  const std::array<Volume, 3> mismatched{up, up, Volume(Dims{2, 2, 2})};
  CHECK_THROWS_AS(combine_axes(mismatched, CombineMode::Avg, Axis::Z, up), ValidationError);
}

TEST_CASE("velocity rescaling and z up-sampling") {
  const Volume v = random_volume(Dims{4, 3, 2}, 3, 9, -1.0, 1.0);
  CHECK(rescale_velocity(v, 0.5, 0.5) == v);
  const Volume s = rescale_velocity(v, 0.5, 0.25);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(s.data()[i] == 2.0 * v.data()[i]);
  CHECK_THROWS_AS(rescale_velocity(v, 0.0, 1.0), ValidationError);
  CHECK(upsample_linear_z(v, 1) == v);
  const Volume z = upsample_linear_z(v, 4);
  CHECK(z.dims() == Dims{4, 3, 8});
  CHECK(z == upsample_linear_axis(v, Axis::Z, 4));
}

TEST_CASE("second-pass slices match a materialised bicubic volume") {
  const int f = 4;
  const Volume lr_d = random_volume(Dims{5, 6, 3}, 1, 11);
  const Volume lr_v = random_volume(Dims{5, 6, 3}, 3, 12, -1.0, 1.0);
  const Volume zup = first_pass_input(lr_d, lr_v, f);
  CHECK(zup.dims() == Dims{5, 6, 12});
  const Volume g1_out = random_volume(Dims{20, 24, 12}, 1, 13);
  const Volume full = upsample_bicubic_xy(zup, f);
  double err = 0.0;
  for (int x = 0; x < 20; ++x) {
    const Volume s = second_pass_slice(zup, g1_out, x, f);
    REQUIRE(s.dims() == Dims{12, 24, 1});
    REQUIRE(s.channels() == 5);
    for (int z = 0; z < 12; ++z)
      for (int y = 0; y < 24; ++y) {
        for (int c = 0; c < 4; ++c) err = std::max(err, std::abs(s.at(z, y, 0, c) - full.at(x, y, z, c)));
        CHECK(s.at(z, y, 0, 4) == g1_out.at(x, y, z));
      }
  }
  CHECK(err <= 1e-12);
  CHECK_THROWS_AS(second_pass_slice(zup, g1_out, 20, f), ValidationError);
  CHECK_THROWS_AS(second_pass_slice(zup, Volume(Dims{20, 24, 11}), 0, f), ValidationError);
}

TEST_CASE("identity generators reproduce separable interpolation") {
  SUBCASE("4x") {
    const Volume d = blob(Dims{10, 12, 14});
    const Volume v = random_volume(d.dims(), 3, 5, -1.0, 1.0);
    const Generator g1 = identity_generator(nets::build_g_4x());
    const Generator g2 = identity_generator(nets::build_g2_4x());
    const Volume out = multipass_upscale(d, v, g1, &g2, 4);
    CHECK(out.dims() == Dims{40, 48, 56});
    Volume ref = upsample_separable(d, 4);
    for (double& x : ref.data()) x = std::max(x, 0.0);
    CHECK(max_abs_diff(out, ref) <= 1e-6);
  }
  SUBCASE("8x") {
    const Volume d = blob(Dims{6, 5, 4});
    const Volume v(d.dims(), 3);
    const Generator g1 = identity_generator(nets::build_g1_8x());
    const Generator g2 = identity_generator(nets::build_g2_8x());
    const Volume out = multipass_upscale(d, v, g1, &g2, 8);
    CHECK(out.dims() == Dims{48, 40, 32});
    Volume ref = upsample_separable(d, 8);
    for (double& x : ref.data()) x = std::max(x, 0.0);
    CHECK(max_abs_diff(out, ref) <= 1e-6);
  }
}

TEST_CASE("tiled evaluation equals whole-slice evaluation") {
  PassOptions whole;
  whole.tiled = false;
  SUBCASE("first pass, 64^2 LR slice, 4 LR cells") {
    const Generator g = random_generator(nets::build_g_4x(), 3);
    const Volume in = random_volume(Dims{64, 64, 2}, 4, 21);
    PassOptions tiled;
    tiled.overlap = paper_overlap(1);
    const Volume a = apply_pass(in, Axis::Z, g, tiled);
    const Volume b = apply_pass(in, Axis::Z, g, whole);
    CHECK(a.dims() == Dims{256, 256, 2});
    CHECK(max_abs_diff(a, b) <= 1e-4);
    tiled.overlap = 1;  // below the dependency radius
    CHECK(max_abs_diff(apply_pass(in, Axis::Z, g, tiled), b) > 1e-3);
  }
  SUBCASE("second pass, 16 HR cells") {
    const Generator g = random_generator(nets::build_g2_4x(), 4);
    const Volume in = random_volume(Dims{1, 128, 128}, 5, 22);
    PassOptions tiled;
    tiled.overlap = paper_overlap(2);
    const Volume a = apply_pass(in, Axis::X, g, tiled);
    const Volume b = apply_pass(in, Axis::X, g, whole);
    CHECK(a.dims() == in.dims());
    CHECK(max_abs_diff(a, b) <= 1e-4);
    tiled.overlap = 2;
    CHECK(max_abs_diff(apply_pass(in, Axis::X, g, tiled), b) > 1e-3);
  }
  SUBCASE("8x networks at the effective margin") {
    const Generator g1 = random_generator(nets::build_g1_8x(), 5);
    const Volume in1 = random_volume(Dims{32, 32, 1}, 4, 23);
    PassOptions t1;
    t1.overlap = pass_overlap(g1.spec, 1);
    CHECK(max_abs_diff(apply_pass(in1, Axis::Z, g1, t1), apply_pass(in1, Axis::Z, g1, whole)) <= 1e-4);
    const Generator g2 = random_generator(nets::build_g2_8x(), 6);
    const Volume in2 = random_volume(Dims{1, 128, 128}, 5, 24);
    PassOptions t2;
    t2.overlap = pass_overlap(g2.spec, 2);
    const Volume ref = apply_pass(in2, Axis::X, g2, whole);
    CHECK(max_abs_diff(apply_pass(in2, Axis::X, g2, t2), ref) <= 1e-4);
    // The published 16-cell margin is short of this network's radius.
    t2.overlap = paper_overlap(2);
    CHECK(max_abs_diff(apply_pass(in2, Axis::X, g2, t2), ref) > 1e-4);
  }
}

TEST_CASE("pass validation") {
  const Generator g = identity_generator(nets::build_g_4x());
  const Volume in = random_volume(Dims{8, 8, 3}, 4, 30);
  PassOptions tiny;
  tiny.tile = 1;
  tiny.overlap = 0;
  CHECK_THROWS_AS(apply_pass(in, Axis::Z, g, tiny), ValidationError);
  CHECK_THROWS_AS(apply_pass(random_volume(Dims{8, 8, 3}, 3, 31), Axis::Z, g, {}), ValidationError);
  CHECK_THROWS_AS(apply_pass([&](int k) { return data::extract_slice(in, Axis::Z, k); }, 3, Axis::Z, Dims{32, 32, 4}, g, {}),
                  ValidationError);
  // Axis bookkeeping on a non-cubic volume: slicing along X scales y and z.
  const Generator g2 = identity_generator(nets::build_g2_4x());
  const Volume in5 = random_volume(Dims{3, 10, 7}, 5, 32);
  const Volume out = apply_pass(in5, Axis::X, g2, {});
  CHECK(out.dims() == in5.dims());
  CHECK(max_abs_diff(out, in5.channel(4)) <= 1e-6);
  Volume neg = blob(Dims{6, 6, 6});
  neg.at(0, 0, 0) = std::nan("");
  CHECK_THROWS_AS(multipass_upscale(neg, Volume(neg.dims(), 3), g, nullptr, 4), NumericalError);
  CHECK_THROWS_AS(multipass_upscale(blob(Dims{6, 6, 6}), Volume(Dims{6, 6, 6}, 3), g, nullptr, 8), ValidationError);
}

TEST_CASE("second-pass shards from a frozen first pass") {
  const auto root = std::filesystem::temp_directory_path() / "mpgan_test_pass2";
  std::filesystem::remove_all(root);
  solver::SimConfig sc;
  sc.hr_resolution = Dims{80, 80, 80};
  sc.frames = 3;
  sc.simulations = 1;
  sc.seed = 17;
  solver::generate_dataset(sc, root / "data");
  const Generator g1 = random_generator(nets::build_g_4x(), 7);
  const nets::WeightStore before = g1.weights.clone();

  const auto sim = data::list_simulations(root / "data").front();
  const data::FrameData f = load_pass2_frame(sim, 1, g1, 4);
  CHECK(f.input.dims() == Dims{80, 80, 80});
  CHECK(f.input.channels() == 5);
  const data::FrameData lr = data::load_pass1_frame(sim, 1, 4);
  CHECK(f.target == lr.target);
  const Volume zup = upsample_linear_z(lr.input, 4);
  const Volume g1_out = apply_pass(zup, Axis::Z, g1, {});
  const Volume base = upsample_bicubic_xy(zup, 4);
  double err = 0.0;
  for (int z = 0; z < 80; z += 7)
    for (int y = 0; y < 80; y += 5)
      for (int x = 0; x < 80; x += 3) {
        for (int c = 0; c < 4; ++c) err = std::max(err, std::abs(f.input.at(x, y, z, c) - base.at(x, y, z, c)));
        err = std::max(err, std::abs(f.input.at(x, y, z, 4) - g1_out.at(x, y, z)));
      }
  CHECK(err <= 1e-12);

  data::ShardBuildConfig bc;
  bc.tile = 64;
  bc.samples_per_frame = 2;
  bc.augment.seed = 3;
  const auto summary = build_pass2_shards(root / "data", root / "shards", g1, bc);
  CHECK(g1.weights.equal(before));
  const auto spatial = data::read_spatial_shard(root / "shards" / data::spatial_shard_name(1));
  const auto temporal = data::read_temporal_shard(root / "shards" / data::temporal_shard_name(1));
  CHECK(spatial.size() == summary.spatial_counts[0]);
  CHECK(temporal.size() == summary.temporal_counts[0]);
  CHECK(!spatial.empty());
  for (const auto& s : spatial) {
    CHECK(s.input.dims() == Dims{64, 64, 1});
    CHECK(s.input.channels() == 5);
    CHECK(s.target.dims() == Dims{64, 64, 1});
  }
  std::filesystem::remove_all(root);
}
