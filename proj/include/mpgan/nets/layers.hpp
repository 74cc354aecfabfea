#pragma once

#include <torch/torch.h>

#include <vector>

#include "mpgan/core/volume.hpp"

namespace mpgan::nets {

inline constexpr double kPixelNormEps = 1e-8;
inline constexpr double kLeakySlope = 0.2;

/// Runtime He scale applied to unit-normal stored weights.
double equalized_scale(std::int64_t fan_in);

/// Stride-1 "same" convolution with equalized learning rate. x: [N, C, H, W],
/// w: [O, C, k, k] (odd k), b: [O].
torch::Tensor eq_conv2d(const torch::Tensor& x, const torch::Tensor& w, const torch::Tensor& b);

/// Per-pixel normalisation across channels: a / sqrt(mean_c(a^2) + eps).
torch::Tensor pixel_norm(const torch::Tensor& x);

/// 2x nearest-neighbour up-sampling (value replication).
torch::Tensor avg_depool(const torch::Tensor& x);

/// 2x2 average pooling.
torch::Tensor avg_pool(const torch::Tensor& x);

struct ResBlockWeights {
  torch::Tensor w1, b1, w2, b2;
  torch::Tensor skip_w, skip_b;  ///< undefined when channel counts match
};

/// skip(x) + PN(ReLU(conv2(PN(ReLU(conv1(x)))))).
torch::Tensor res_block(const torch::Tensor& x, const ResBlockWeights& w, std::vector<torch::Tensor>* pn_taps = nullptr);

/// Catmull-Rom up-sampling of [N, C, H, W] by `factor`, identical to the
/// volume-space bicubic up-sampler (edges clamp). Factor 1 is the identity.
torch::Tensor bicubic_upsample(const torch::Tensor& x, int factor);

/// Slice (nz == 1) -> [C, H, W] with H along the slice's vertical axis.
torch::Tensor slice_to_tensor(const Volume& slice, torch::Dtype dtype = torch::kFloat32);
/// [C, H, W] -> slice.
Volume tensor_to_slice(const torch::Tensor& chw);
/// Stacks slices of equal shape into [N, C, H, W].
torch::Tensor stack_slices(const std::vector<const Volume*>& slices, torch::Dtype dtype = torch::kFloat32);

/// Bilinear 2D semi-Lagrangian warp of [N, C, H, W] by flow [N, 2, H, W]
/// (horizontal, vertical, in pixels per unit time): out(p) = in(p - dt*flow(p)),
/// clamped at the border. Differentiable with respect to `x`.
torch::Tensor warp2d(const torch::Tensor& x, const torch::Tensor& flow, double dt);

}  // namespace mpgan::nets
