#include "torch_doctest.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mpgan/core/interp.hpp"
#include "mpgan/data/samples.hpp"
#include "mpgan/nets/network.hpp"

using namespace mpgan;
using namespace mpgan::nets;

namespace {

const auto kF64 = torch::TensorOptions().dtype(torch::kFloat64);

// Direct sliding-window convolution with zero padding and the equalized scale.
torch::Tensor naive_conv(const torch::Tensor& x, const torch::Tensor& w, const torch::Tensor& b) {
  const auto X = x.accessor<double, 4>();
  const auto W = w.accessor<double, 4>();
  const auto B = b.accessor<double, 1>();
  const int64_t n = x.size(0), ci = x.size(1), h = x.size(2), wd = x.size(3), co = w.size(0), k = w.size(2);
  const double scale = std::sqrt(2.0 / static_cast<double>(ci * k * k));
  torch::Tensor out = torch::zeros({n, co, h, wd}, kF64);
  auto O = out.accessor<double, 4>();
  for (int64_t s = 0; s < n; ++s)
    for (int64_t o = 0; o < co; ++o)
      for (int64_t y = 0; y < h; ++y)
        for (int64_t xx = 0; xx < wd; ++xx) {
          double acc = B[o];
          for (int64_t c = 0; c < ci; ++c)
            for (int64_t dy = 0; dy < k; ++dy)
              for (int64_t dx = 0; dx < k; ++dx) {
                const int64_t yy = y + dy - k / 2, xs = xx + dx - k / 2;
                if (yy < 0 || yy >= h || xs < 0 || xs >= wd) continue;
                acc += W[o][c][dy][dx] * scale * X[s][c][yy][xs];
              }
          O[s][o][y][xx] = acc;
        }
  return out;
}

torch::Tensor naive_pixel_norm(const torch::Tensor& x) {
  torch::Tensor out = x.clone();
  auto X = x.accessor<double, 4>();
  auto O = out.accessor<double, 4>();
  for (int64_t s = 0; s < x.size(0); ++s)
    for (int64_t y = 0; y < x.size(2); ++y)
      for (int64_t xx = 0; xx < x.size(3); ++xx) {
        double m = 0.0;
        for (int64_t c = 0; c < x.size(1); ++c) m += X[s][c][y][xx] * X[s][c][y][xx];
        m /= static_cast<double>(x.size(1));
        for (int64_t c = 0; c < x.size(1); ++c) O[s][c][y][xx] = X[s][c][y][xx] / std::sqrt(m + 1e-8);
      }
  return out;
}

torch::Tensor randn(std::vector<int64_t> shape, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  torch::Tensor t = torch::empty(shape, kF64);
  double* p = t.data_ptr<double>();
  for (int64_t i = 0; i < t.numel(); ++i) p[i] = nd(rng);
  return t;
}

double max_abs_diff(const torch::Tensor& a, const torch::Tensor& b) { return (a - b).abs().max().item<double>(); }

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

}  // namespace

TEST_CASE("equalized convolution") {
  SUBCASE("1x1 single channel: x * w * sqrt(2) + b") {
    torch::Tensor x = torch::tensor({1.5, -2.0, 0.25, 4.0}, kF64).view({1, 1, 2, 2});
    torch::Tensor w = torch::full({1, 1, 1, 1}, 0.7, kF64), b = torch::full({1}, -0.3, kF64);
    CHECK(max_abs_diff(eq_conv2d(x, w, b), x * 0.7 * std::sqrt(2.0) - 0.3) < 1e-15);
  }
  SUBCASE("zero input gives the bias") {
    std::mt19937_64 rng(1);
    torch::Tensor w = randn({5, 3, 3, 3}, rng), b = randn({5}, rng);
    const torch::Tensor y = eq_conv2d(torch::zeros({2, 3, 6, 6}, kF64), w, b);
    CHECK(max_abs_diff(y, b.view({1, 5, 1, 1}).expand_as(y)) == 0.0);
  }
  SUBCASE("random 3x3 matches a sliding-window oracle") {
    std::mt19937_64 rng(2);
    torch::Tensor x = randn({2, 3, 7, 9}, rng), w = randn({4, 3, 3, 3}, rng), b = randn({4}, rng);
    CHECK(max_abs_diff(eq_conv2d(x, w, b), naive_conv(x, w, b)) < 1e-5);
    torch::Tensor w5 = randn({2, 3, 5, 5}, rng), b5 = randn({2}, rng);
    CHECK(max_abs_diff(eq_conv2d(x, w5, b5), naive_conv(x, w5, b5)) < 1e-5);
  }
  SUBCASE("channel mismatch rejected") {
    CHECK_THROWS_AS(eq_conv2d(torch::zeros({1, 2, 4, 4}), torch::zeros({1, 3, 3, 3}), torch::zeros({1})),
                    ValidationError);
  }
}

TEST_CASE("pixel norm") {
  CHECK(pixel_norm(torch::full({1, 1, 3, 3}, 5.0, kF64)).sub(1.0).abs().max().item<double>() < 1e-9);
  CHECK(pixel_norm(torch::zeros({1, 4, 2, 2}, kF64)).abs().max().item<double>() == 0.0);
  std::mt19937_64 rng(3);
  const torch::Tensor y = pixel_norm(randn({3, 8, 5, 5}, rng));
  const torch::Tensor rms = y.pow(2).mean(1).sqrt();
  CHECK(rms.sub(1.0).abs().max().item<double>() < 1e-4);
}

TEST_CASE("residual block") {
  std::mt19937_64 rng(4);
  SUBCASE("zeroed branch with matching channels is the identity") {
    ResBlockWeights w{torch::zeros({6, 6, 3, 3}, kF64), torch::zeros({6}, kF64), torch::zeros({6, 6, 3, 3}, kF64),
                      torch::zeros({6}, kF64), {}, {}};
    const torch::Tensor x = randn({2, 6, 5, 5}, rng);
    CHECK(torch::equal(res_block(x, w), x));
  }
  SUBCASE("all-negative pre-activations contribute nothing") {
    ResBlockWeights w{torch::zeros({4, 4, 3, 3}, kF64), torch::full({4}, -1.0, kF64), randn({4, 4, 3, 3}, rng),
                      torch::full({4}, -2.0, kF64), {}, {}};
    const torch::Tensor x = randn({1, 4, 6, 6}, rng);
    CHECK(torch::equal(res_block(x, w), x));
  }
  SUBCASE("random block equals the composed primitive oracle chain") {
    ResBlockWeights w{randn({8, 3, 3, 3}, rng), randn({8}, rng), randn({8, 8, 3, 3}, rng), randn({8}, rng),
                      randn({8, 3, 1, 1}, rng), randn({8}, rng)};
    const torch::Tensor x = randn({2, 3, 6, 7}, rng);
    torch::Tensor h = naive_pixel_norm(torch::relu(naive_conv(x, w.w1, w.b1)));
    h = naive_pixel_norm(torch::relu(naive_conv(h, w.w2, w.b2)));
    const torch::Tensor expect = naive_conv(x, w.skip_w, w.skip_b) + h;
    CHECK(max_abs_diff(res_block(x, w), expect) < 1e-9);
  }
}

TEST_CASE("parameter counts reproduce the tabulated totals within 10%") {
  const std::size_t g1 = build_g1_8x().param_count(), d1s = build_d1s_8x().param_count(),
                    d1t = build_d1t_8x().param_count(), g2 = build_g2_8x().param_count(),
                    d2s = build_d2s_8x().param_count(), d2t = build_d2t_8x().param_count();
  MESSAGE("G1 ", g1, " D1s ", d1s, " D1t ", d1t, " G2 ", g2, " D2s ", d2s, " D2t ", d2t);
  CHECK(within(static_cast<double>(g1), 550e3, 0.10));
  CHECK(within(static_cast<double>(d1s), 470e3, 0.10));
  CHECK(within(static_cast<double>(d1t), 470e3, 0.10));
  CHECK(within(static_cast<double>(g2), 774e3, 0.10));
  CHECK(within(static_cast<double>(d2s), 773e3, 0.10));
  CHECK(within(static_cast<double>(d2t), 773e3, 0.10));
}

TEST_CASE("weight stores match their specs") {
  for (const auto& spec : {build_g1_8x(), build_d1s_8x(), build_g2_8x(), build_d2t_8x(), build_g_4x(), build_g2_4x(),
                           build_d_4x(Critic::Spatial), build_d_4x(Critic::Temporal)}) {
    const WeightStore w = WeightStore::initialize(spec, 7);
    CHECK_NOTHROW(w.check(spec));
    CHECK(w.element_count() == spec.param_count());
    CHECK(w.equal(WeightStore::initialize(spec, 7)));
    CHECK_FALSE(w.equal(WeightStore::initialize(spec, 8)));
  }
}

TEST_CASE("forward shapes follow the tables") {
  torch::NoGradGuard guard;
  std::mt19937_64 rng(5);
  SUBCASE("G1 8x at stage 3 maps 16x16x4 to 128x128x1; earlier stages to 16*2^s") {
    const auto spec = build_g1_8x();
    const WeightStore w = WeightStore::initialize(spec, 1);
    const torch::Tensor x = torch::rand({1, 4, 16, 16});
    CHECK(generate(spec, w, x, {3, 1.0}).sizes().vec() == (std::vector<int64_t>{1, 1, 128, 128}));
    for (int s = 0; s < 4; ++s) CHECK(generate(spec, w, x, {s, 0.5}).size(2) == (16 << s));
  }
  SUBCASE("critics reduce 128x128x{2,3} to one score per sample") {
    for (const auto& spec : {build_d1s_8x(), build_d1t_8x()}) {
      const WeightStore w = WeightStore::initialize(spec, 2);
      const torch::Tensor y = criticize(spec, w, torch::rand({3, spec.in_channels, 128, 128}), {3, 1.0});
      CHECK(y.sizes().vec() == (std::vector<int64_t>{3}));
      CHECK(criticize(spec, w, torch::rand({2, spec.in_channels, 32, 32}), {1, 0.3}).size(0) == 2);
      CHECK_THROWS_AS(criticize(spec, w, torch::rand({1, spec.in_channels, 64, 64}), {3, 1.0}), ValidationError);
    }
    for (const auto& spec : {build_d2s_8x(), build_d2t_8x(), build_d_4x(Critic::Spatial), build_d_4x(Critic::Temporal)}) {
      const WeightStore w = WeightStore::initialize(spec, 2);
      CHECK(criticize(spec, w, torch::rand({2, spec.in_channels, 64, 64}), {0, 1.0}).sizes().vec() ==
            (std::vector<int64_t>{2}));
    }
  }
  SUBCASE("4x generators: 16x16x4 -> 64x64x1 and resolution-preserving second pass") {
    const auto g = build_g_4x(), g2 = build_g2_4x(), g28 = build_g2_8x();
    CHECK(generate(g, WeightStore::initialize(g, 3), torch::rand({2, 4, 16, 16}), {0, 1.0}).sizes().vec() ==
          (std::vector<int64_t>{2, 1, 64, 64}));
    CHECK(generate(g2, WeightStore::initialize(g2, 3), torch::rand({1, 5, 64, 64}), {0, 1.0}).sizes().vec() ==
          (std::vector<int64_t>{1, 1, 64, 64}));
    CHECK(generate(g28, WeightStore::initialize(g28, 3), torch::rand({1, 5, 64, 64}), {0, 1.0}).sizes().vec() ==
          (std::vector<int64_t>{1, 1, 64, 64}));
  }
}

TEST_CASE("zero weights turn every generator into its bicubic base") {
  torch::NoGradGuard guard;
  std::mt19937_64 rng(6);
  Volume lr(Dims{16, 16, 1}, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : lr.data()) v = u(rng);
  const torch::Tensor x = slice_to_tensor(lr, torch::kFloat64).unsqueeze(0);
  for (const auto& spec : {build_g_4x(), build_g1_8x()}) {
    WeightStore w = WeightStore::initialize(spec, 9, torch::kFloat64);
    w.zero();
    const int f = generator_scale(spec, spec.final_stage());
    const torch::Tensor y = generate(spec, w, x, {spec.final_stage(), 1.0});
    const Volume oracle = upsample_bicubic_xy(lr.channel(0), f);
    CHECK(max_abs_diff(y[0], slice_to_tensor(oracle, torch::kFloat64)) < 1e-12);
  }
  for (const auto& spec : {build_g2_4x(), build_g2_8x()}) {
    WeightStore w = WeightStore::initialize(spec, 9, torch::kFloat64);
    w.zero();
    const torch::Tensor in = torch::rand({1, 5, 64, 64}, kF64);
    CHECK(torch::equal(generate(spec, w, in, {0, 1.0}), in.narrow(1, 4, 1)));
  }
}

TEST_CASE("growth blending") {
  torch::NoGradGuard guard;
  const auto spec = build_g1_8x();
  const WeightStore w = WeightStore::initialize(spec, 11, torch::kFloat64);
  const torch::Tensor x = torch::rand({2, 4, 16, 16}, kF64);
  auto base = [&](int s) { return bicubic_upsample(x.narrow(1, 0, 1), 1 << s); };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SUBCASE("alpha = 1 ignores the former branch completely") {
    for (int s = 1; s < 4; ++s) {
      WeightStore poisoned = w.clone();
      poisoned.at("to_density" + std::to_string(s - 1) + ".w").fill_(nan);
      const torch::Tensor a = generate(spec, w, x, {s, 1.0});
      CHECK(torch::equal(a, generate(spec, poisoned, x, {s, 1.0})));
      CHECK(torch::isfinite(a).all().item<bool>());
    }
  }
  SUBCASE("alpha = 0 is the up-sampled former output plus the base") {
    for (int s = 1; s < 4; ++s) {
      WeightStore poisoned = w.clone();
      poisoned.at("to_density" + std::to_string(s) + ".w").fill_(nan);
      const torch::Tensor expect = base(s) + avg_depool(generate_residual(spec, w, x, {s - 1, 1.0}));
      CHECK(torch::equal(generate(spec, w, x, {s, 0.0}), expect));
      CHECK(torch::equal(generate(spec, poisoned, x, {s, 0.0}), expect));
    }
  }
  SUBCASE("intermediate alpha is the linear blend") {
    for (int s = 1; s < 4; ++s) {
      const torch::Tensor A = generate_residual(spec, w, x, {s - 1, 1.0});
      const torch::Tensor B = generate_residual(spec, w, x, {s, 1.0});
      for (double a : {0.25, 0.5, 0.9}) {
        const torch::Tensor expect = base(s) + (1 - a) * avg_depool(A) + a * B;
        CHECK(max_abs_diff(generate(spec, w, x, {s, a}), expect) < 1e-6);
      }
    }
  }
  SUBCASE("critic endpoints") {
    const auto d = build_d1s_8x();
    const WeightStore dw = WeightStore::initialize(d, 12, torch::kFloat64);
    const torch::Tensor y = torch::rand({2, 2, 64, 64}, kF64);
    WeightStore poisoned = dw.clone();
    poisoned.at("from_density1.w").fill_(nan);
    CHECK(torch::equal(criticize(d, dw, y, {2, 1.0}), criticize(d, poisoned, y, {2, 1.0})));
    CHECK(torch::equal(criticize(d, dw, y, {2, 0.0}), criticize(d, dw, avg_pool(y), {1, 1.0})));
  }
  SUBCASE("alpha outside [0, 1] rejected") {
    CHECK_THROWS_AS(GrowthState::make(2, 1.5), ValidationError);
    CHECK_THROWS_AS(GrowthState::make(2, -0.1), ValidationError);
    CHECK(GrowthState::make(0, 0.3).alpha == 1.0);
    CHECK_THROWS_AS(generate(spec, w, x, {2, 1.2}), ValidationError);
    CHECK_THROWS_AS(generate(spec, w, x, {4, 1.0}), ValidationError);
  }
}

TEST_CASE("pixel-norm post-condition holds throughout a probed forward pass") {
  torch::NoGradGuard guard;
  const auto spec = build_g1_8x();
  const WeightStore w = WeightStore::initialize(spec, 13, torch::kFloat64);
  std::vector<torch::Tensor> taps;
  generate(spec, w, torch::rand({1, 4, 16, 16}, kF64), {3, 1.0}, &taps);
  CHECK(taps.size() == 16);
  for (const auto& t : taps) {
    const torch::Tensor rms = t.pow(2).mean(1).sqrt();
    // ReLU can zero a whole feature vector; every other pixel has unit RMS.
    const torch::Tensor ok = (rms - 1).abs().lt(1e-4).logical_or(rms.lt(1e-3));
    CHECK(ok.all().item<bool>());
  }
}

TEST_CASE("equalized rate matches He initialisation in distribution") {
  // One output of a 3x3 conv over 16 channels: runtime-scaled unit normal
  // weights vs. He-initialised weights used unscaled, 10^4 draws each.
  std::mt19937_64 rng(14);
  std::normal_distribution<double> nd;
  const int fan_in = 16 * 9, draws = 10000;
  const double he_sd = std::sqrt(2.0 / fan_in);
  auto stats = [&](bool equalized) {
    double s = 0.0, s2 = 0.0;
    for (int d = 0; d < draws; ++d) {
      torch::Tensor x = randn({1, 16, 3, 3}, rng);
      torch::Tensor wt = randn({1, 16, 3, 3}, rng);
      double y;
      if (equalized) {
        y = eq_conv2d(x, wt, torch::zeros({1}, kF64))[0][0][1][1].item<double>();
      } else {
        y = torch::conv2d(x, wt * he_sd, torch::zeros({1}, kF64), 1, 1)[0][0][1][1].item<double>();
      }
      s += y;
      s2 += y * y;
    }
    const double mean = s / draws;
    return std::pair{mean, s2 / draws - mean * mean};
  };
  (void)nd;
  const auto [m1, v1] = stats(true);
  const auto [m2, v2] = stats(false);
  CHECK(std::abs(v1 / v2 - 1.0) <= 0.05);
  CHECK(std::abs(m1 - m2) <= 0.05 * std::sqrt(v2));
  CHECK(std::abs(v1 - 2.0) <= 0.1);  // analytic variance: fan_in * (2 / fan_in) * E[x^2]
}

TEST_CASE("receptive fields") {
  NetworkSpec single;
  single.name = "single";
  single.in_channels = 1;
  single.input_size = 16;
  single.output_size = 16;
  single.layers = {LayerDesc{LayerKind::Conv, 3, 1, 1, 0, "c"}};
  CHECK(receptive_field(single).extent == 3.0);

  const auto g1 = receptive_field(build_g1_8x());
  MESSAGE("G1_8x radius ", g1.radius, " LR cells, extent ", g1.extent);
  CHECK(g1.radius == doctest::Approx(7.5));
  CHECK(std::lround(std::floor(g1.radius)) == 7);
  // Second pass, 8x: radius in HR pixels over the 8x factor gives LR cells per side.
  const auto g2 = receptive_field(build_g2_8x());
  CHECK(g2.radius / 8.0 == doctest::Approx(4.0));
  CHECK(required_overlap(build_g_4x()) == 4);
  CHECK(required_overlap(build_g2_4x()) == 8);
  CHECK(required_overlap(build_g1_8x()) >= 8);
  CHECK(required_overlap(build_g2_8x()) == 32);
}

TEST_CASE("torch bicubic and warp agree with the volume-space implementations") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Volume s(Dims{9, 7, 1}, 2);
  for (double& v : s.data()) v = u(rng);
  const torch::Tensor t = slice_to_tensor(s, torch::kFloat64).unsqueeze(0);
  CHECK(max_abs_diff(bicubic_upsample(t, 4)[0], slice_to_tensor(upsample_bicubic_xy(s, 4), torch::kFloat64)) < 1e-12);
  CHECK(tensor_to_slice(slice_to_tensor(s, torch::kFloat64)) == s);

  Volume flow(Dims{9, 7, 1}, 2);
  for (double& v : flow.data()) v = 4.0 * u(rng) - 2.0;
  const torch::Tensor warped = nets::warp2d(t, slice_to_tensor(flow, torch::kFloat64).unsqueeze(0), 0.5)[0];
  CHECK(max_abs_diff(warped, slice_to_tensor(data::warp2d(s, flow, 0.5), torch::kFloat64)) < 1e-13);
}
