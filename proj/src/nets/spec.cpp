#include "mpgan/nets/spec.hpp"

#include <algorithm>
#include <cmath>

#include "mpgan/core/volume.hpp"

namespace mpgan::nets {
namespace {

std::size_t conv_params(int in, int out, int k) {
  return static_cast<std::size_t>(in) * out * k * k + static_cast<std::size_t>(out);
}

LayerDesc layer(LayerKind kind, int k, int in, int out, int stage, std::string name = {}) {
  return LayerDesc{kind, k, in, out, stage, std::move(name)};
}

struct GenBuilder {
  NetworkSpec spec;
  int blocks = 0;
  int channels;

  GenBuilder(std::string name, int in_channels, int input_size) : channels(in_channels) {
    spec.name = std::move(name);
    spec.role = Role::Generator;
    spec.in_channels = in_channels;
    spec.input_size = input_size;
  }
  void res(int out, int k, int stage) {
    spec.layers.push_back(layer(LayerKind::ResBlock, k, channels, out, stage, "rb" + std::to_string(blocks++)));
    channels = out;
  }
  void depool(int stage) { spec.layers.push_back(layer(LayerKind::AvgDepool, 1, channels, channels, stage)); }
  void to_density(int stage) {
    spec.layers.push_back(layer(LayerKind::ToDensity, 1, channels, 1, stage, "to_density" + std::to_string(stage)));
  }
};

// Discriminator blocks are given from the highest-resolution stage down.
struct DiscBlock {
  int stage;
  int kernel;
  std::vector<int> widths;  ///< output width of each conv in the block
  bool pool;
};

NetworkSpec build_disc(std::string name, int in_channels, int input_size, int stages, int from_width_top,
                       const std::vector<DiscBlock>& blocks, int flatten_side) {
  NetworkSpec spec;
  spec.name = std::move(name);
  spec.role = Role::Discriminator;
  spec.in_channels = in_channels;
  spec.input_size = input_size;
  spec.output_size = 1;
  spec.stages = stages;
  int channels = from_width_top;
  int last_stage = -1;
  int index = 0;
  for (const auto& b : blocks) {
    // One FromDensity per stage, feeding the stage's first conv.
    if (b.stage != last_stage) {
      const int width_in = last_stage < 0 ? from_width_top : channels;
      spec.layers.push_back(
          layer(LayerKind::FromDensity, 1, in_channels, width_in, b.stage, "from_density" + std::to_string(b.stage)));
      spec.layers.push_back(layer(LayerKind::Activation, 1, width_in, width_in, b.stage));
      channels = width_in;
      last_stage = b.stage;
    }
    for (int w : b.widths) {
      spec.layers.push_back(layer(LayerKind::Conv, b.kernel, channels, w, b.stage,
                                  "s" + std::to_string(b.stage) + ".conv" + std::to_string(index++)));
      spec.layers.push_back(layer(LayerKind::Activation, 1, w, w, b.stage));
      channels = w;
    }
    if (b.pool) spec.layers.push_back(layer(LayerKind::AvgPool, 2, channels, channels, b.stage));
  }
  spec.layers.push_back(
      layer(LayerKind::FlattenFc, 1, channels * flatten_side * flatten_side, 1, 0, "fc"));
  spec.validate();
  return spec;
}

}  // namespace

std::size_t LayerDesc::param_count() const {
  switch (kind) {
    case LayerKind::Conv: return conv_params(in_channels, out_channels, kernel);
    case LayerKind::ResBlock:
      return conv_params(in_channels, out_channels, kernel) + conv_params(out_channels, out_channels, kernel) +
             (in_channels != out_channels ? conv_params(in_channels, out_channels, 1) : 0);
    case LayerKind::ToDensity:
    case LayerKind::FromDensity: return conv_params(in_channels, out_channels, 1);
    case LayerKind::FlattenFc: return static_cast<std::size_t>(in_channels) * out_channels + out_channels;
    default: return 0;
  }
}

std::size_t NetworkSpec::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.param_count();
  return n;
}

int NetworkSpec::side_at_stage(int stage) const {
  if (stage < 0 || stage >= stages) throw ValidationError(name + ": stage " + std::to_string(stage) + " out of range");
  const int shift = final_stage() - stage;
  return role == Role::Generator ? output_size >> shift : input_size >> shift;
}

void NetworkSpec::validate() const {
  if (layers.empty()) throw ValidationError(name + ": no layers");
  if (role == Role::Generator) {
    int ch = in_channels, stage = 0;
    for (const auto& l : layers) {
      if (l.stage < stage) throw ValidationError(name + ": generator stages must be non-decreasing");
      stage = l.stage;
      if (l.kind == LayerKind::ToDensity) {
        if (l.in_channels != ch) throw ValidationError(name + ": to-density width mismatch at " + l.name);
        continue;
      }
      if (l.in_channels != ch) throw ValidationError(name + ": channel mismatch at layer " + l.name);
      ch = l.out_channels;
    }
    if (stage != stages - 1) throw ValidationError(name + ": stage count mismatch");
  } else {
    int ch = -1, stage = stages - 1;
    for (const auto& l : layers) {
      if (l.stage > stage) throw ValidationError(name + ": discriminator stages must be non-increasing");
      stage = l.stage;
      if (l.kind == LayerKind::FromDensity) {
        if (l.in_channels != in_channels || (ch >= 0 && l.out_channels != ch)) {
          throw ValidationError(name + ": from-density width mismatch at " + l.name);
        }
        ch = l.out_channels;
        continue;
      }
      const bool ok = l.kind == LayerKind::FlattenFc ? (ch > 0 && l.in_channels % ch == 0) : l.in_channels == ch;
      if (!ok) throw ValidationError(name + ": channel mismatch at layer " + l.name);
      ch = l.out_channels;
    }
    if (ch != 1) throw ValidationError(name + ": critic must end in one output");
  }
}

GrowthState GrowthState::make(int stage, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  if (stage < 0) throw ValidationError("growth stage must be >= 0");
  return GrowthState{stage, stage == 0 ? 1.0 : alpha};
}

NetworkSpec build_g1_8x() {
  GenBuilder g("G1_8x", 4, 16);
  g.res(16, 3, 0);
  g.res(64, 3, 0);
  g.to_density(0);
  g.depool(1);
  g.res(128, 3, 1);
  g.res(64, 3, 1);
  g.to_density(1);
  g.depool(2);
  g.res(64, 3, 2);
  g.res(32, 3, 2);
  g.to_density(2);
  g.depool(3);
  g.res(32, 3, 3);
  g.res(16, 3, 3);
  g.to_density(3);
  g.spec.stages = 4;
  g.spec.output_size = 128;
  g.spec.base_channel = 0;
  g.spec.validate();
  return g.spec;
}

NetworkSpec build_g2_8x() {
  GenBuilder g("G2_8x", 5, 64);
  for (int w : {12, 48, 96, 48, 48, 24, 24, 12}) g.res(w, 5, 0);
  g.to_density(0);
  g.spec.output_size = 64;
  g.spec.base_channel = 4;
  g.spec.validate();
  return g.spec;
}

NetworkSpec build_g_4x() {
  GenBuilder g("G_4x", 4, 16);
  g.res(16, 3, 0);
  g.depool(0);
  g.res(32, 3, 0);
  g.depool(0);
  g.res(16, 3, 0);
  g.res(16, 3, 0);
  g.to_density(0);
  g.spec.output_size = 64;
  g.spec.base_channel = 0;
  g.spec.validate();
  return g.spec;
}

NetworkSpec build_g2_4x() {
  GenBuilder g("G2_4x", 5, 64);
  for (int w : {16, 32, 16, 16}) g.res(w, 3, 0);
  g.to_density(0);
  g.spec.output_size = 64;
  g.spec.base_channel = 4;
  g.spec.validate();
  return g.spec;
}

namespace {

NetworkSpec d1_8x(std::string name, int in_channels) {
  return build_disc(std::move(name), in_channels, 128, 4, 32,
                    {{3, 3, {32, 64}, true}, {2, 3, {64, 128}, true}, {1, 3, {128, 128}, true}, {0, 3, {32, 4}, false}},
                    16);
}

NetworkSpec d2_8x(std::string name, int in_channels) {
  return build_disc(std::move(name), in_channels, 64, 1, 24, {{0, 5, {24, 48, 48, 96, 96, 96, 32, 4}, false}}, 64);
}

}  // namespace

NetworkSpec build_d1s_8x() { return d1_8x("D1s_8x", 2); }
NetworkSpec build_d1t_8x() { return d1_8x("D1t_8x", 3); }
NetworkSpec build_d2s_8x() { return d2_8x("D2s_8x", 2); }
NetworkSpec build_d2t_8x() { return d2_8x("D2t_8x", 3); }

NetworkSpec build_d_4x(Critic kind, bool second_pass) {
  const int in = kind == Critic::Spatial ? 2 : 3;
  std::string name = std::string(second_pass ? "D2" : "D1") + (kind == Critic::Spatial ? "s_4x" : "t_4x");
  return build_disc(std::move(name), in, 64, 1, 8, {{0, 3, {8, 16}, true}, {0, 3, {16, 32}, true}, {0, 3, {8, 4}, false}},
                    16);
}

ReceptiveField receptive_field(const NetworkSpec& spec) {
  double radius = 0.0, scale = 1.0;
  for (const auto& l : spec.layers) {
    switch (l.kind) {
      case LayerKind::Conv: radius += 0.5 * (l.kernel - 1) * scale; break;
      case LayerKind::ResBlock: radius += (l.kernel - 1) * scale; break;
      case LayerKind::AvgDepool: scale *= 0.5; break;
      case LayerKind::AvgPool: scale *= 2.0; break;
      default: break;
    }
  }
  if (spec.role == Role::Generator && spec.output_size > spec.input_size) radius = std::max(radius, 2.0);
  return {radius, 2.0 * radius + 1.0};
}

int required_overlap(const NetworkSpec& spec) {
  if (spec.role != Role::Generator) throw ValidationError("overlap is defined for generators only");
  const int f = spec.output_size / spec.input_size;
  // Propagate the exact dependency interval of each output phase back to the input grid.
  constexpr int kCell = 1000;
  int margin = f > 1 ? 2 : 0;  // Catmull-Rom base taps
  for (int phase = 0; phase < f; ++phase) {
    int lo = kCell * f + phase, hi = lo;
    for (auto it = spec.layers.rbegin(); it != spec.layers.rend(); ++it) {
      switch (it->kind) {
        case LayerKind::Conv: lo -= it->kernel / 2; hi += it->kernel / 2; break;
        case LayerKind::ResBlock: lo -= 2 * (it->kernel / 2); hi += 2 * (it->kernel / 2); break;
        case LayerKind::AvgDepool: lo = lo / 2; hi = hi / 2; break;  // non-negative, so truncation == floor
        default: break;
      }
    }
    margin = std::max({margin, kCell - lo, hi - kCell});
  }
  return margin;
}

}  // namespace mpgan::nets
