#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mpgan::nets {

enum class LayerKind { Conv, ResBlock, AvgDepool, AvgPool, PixelNorm, Activation, ToDensity, FromDensity, FlattenFc };

enum class Role { Generator, Discriminator };

struct LayerDesc {
  LayerKind kind;
  int kernel = 1;
  int in_channels = 0;
  int out_channels = 0;
  int stage = 0;
  std::string name;  ///< weight-name prefix; empty for parameter-free layers

  std::size_t param_count() const;
};

/// Declarative network description. Layers are listed in evaluation order
/// with non-decreasing stage for generators (stage s runs at 2^s times the
/// input resolution) and non-increasing stage for discriminators (stage s
/// block consumes inputs of side base_size * 2^s). Side branches
/// (ToDensity per generator stage, FromDensity per discriminator stage)
/// appear in the list but are evaluated only as growth requires.
struct NetworkSpec {
  std::string name;
  Role role = Role::Generator;
  int in_channels = 0;
  int input_size = 0;   ///< input side at the final stage
  int output_size = 0;  ///< output side at the final stage (1 for critics)
  int stages = 1;       ///< growth stages; 1 = fixed architecture
  int base_channel = 0; ///< generator residual base: input channel up-sampled and added to the output
  double leaky_slope = 0.2;
  std::vector<LayerDesc> layers;

  std::size_t param_count() const;
  int final_stage() const { return stages - 1; }
  /// Spatial side of the generator output / discriminator input at `stage`.
  int side_at_stage(int stage) const;
  /// Throws ValidationError if channel chaining or stage ordering is broken.
  void validate() const;
};

/// Progressive-growing state: stage index and fade-in factor for it.
struct GrowthState {
  int stage = 0;
  double alpha = 1.0;

  /// Rejects alpha outside [0, 1]; stage 0 forces alpha = 1.
  static GrowthState make(int stage, double alpha);
};

// 8x networks (progressive first pass, fixed second pass).
NetworkSpec build_g1_8x();
NetworkSpec build_d1s_8x();
NetworkSpec build_d1t_8x();
NetworkSpec build_g2_8x();
NetworkSpec build_d2s_8x();
NetworkSpec build_d2t_8x();

// 4x networks (no growth).
NetworkSpec build_g_4x();
NetworkSpec build_g2_4x();
enum class Critic { Spatial, Temporal };
NetworkSpec build_d_4x(Critic kind, bool second_pass = false);

/// Dependency radius of one output sample, in input pixels of the network,
/// accumulated over kernels and resolution changes (the bicubic base is
/// included for generators). `extent` = 2 * radius + 1.
struct ReceptiveField {
  double radius = 0.0;
  double extent = 1.0;
};
ReceptiveField receptive_field(const NetworkSpec& spec);

/// Integer margin (input pixels) that makes tiled evaluation exact.
int required_overlap(const NetworkSpec& spec);

}  // namespace mpgan::nets
