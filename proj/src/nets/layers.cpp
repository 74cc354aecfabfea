#include "mpgan/nets/layers.hpp"

#include <cmath>

#include "mpgan/core/interp.hpp"

namespace mpgan::nets {
namespace {

torch::Tensor cubic_matrix(int n, int factor, const torch::TensorOptions& opts) {
  const auto m = cubic_upsample_matrix(n, factor);
  return torch::from_blob(const_cast<double*>(m.data()), {n * factor, n}, torch::kFloat64).clone().to(opts);
}

}  // namespace

double equalized_scale(std::int64_t fan_in) { return std::sqrt(2.0 / static_cast<double>(fan_in)); }

torch::Tensor eq_conv2d(const torch::Tensor& x, const torch::Tensor& w, const torch::Tensor& b) {
  if (x.dim() != 4 || w.dim() != 4 || x.size(1) != w.size(1)) {
    throw ValidationError("eq_conv2d: input channels " + std::to_string(x.dim() == 4 ? x.size(1) : -1) +
                          " do not match weights");
  }
  const std::int64_t k = w.size(2);
  if (k % 2 == 0 || w.size(3) != k) throw ValidationError("eq_conv2d: kernel must be square and odd");
  const double scale = equalized_scale(w.size(1) * k * k);
  return torch::conv2d(x, w * scale, b, /*stride=*/1, /*padding=*/k / 2);
}

torch::Tensor pixel_norm(const torch::Tensor& x) {
  return x * torch::rsqrt(x.pow(2).mean(1, /*keepdim=*/true) + kPixelNormEps);
}

torch::Tensor avg_depool(const torch::Tensor& x) { return x.repeat_interleave(2, 2).repeat_interleave(2, 3); }

torch::Tensor avg_pool(const torch::Tensor& x) { return torch::avg_pool2d(x, 2); }

torch::Tensor res_block(const torch::Tensor& x, const ResBlockWeights& w, std::vector<torch::Tensor>* pn_taps) {
  torch::Tensor h = pixel_norm(torch::relu(eq_conv2d(x, w.w1, w.b1)));
  if (pn_taps) pn_taps->push_back(h);
  h = pixel_norm(torch::relu(eq_conv2d(h, w.w2, w.b2)));
  if (pn_taps) pn_taps->push_back(h);
  const torch::Tensor skip = w.skip_w.defined() ? eq_conv2d(x, w.skip_w, w.skip_b) : x;
  return skip + h;
}

torch::Tensor bicubic_upsample(const torch::Tensor& x, int factor) {
  if (factor < 1) throw ValidationError("bicubic_upsample: factor must be >= 1");
  if (factor == 1) return x;
  const auto opts = x.options().requires_grad(false);
  const torch::Tensor my = cubic_matrix(static_cast<int>(x.size(2)), factor, opts);
  const torch::Tensor mx = cubic_matrix(static_cast<int>(x.size(3)), factor, opts);
  return torch::matmul(torch::matmul(my, x), mx.t());
}

torch::Tensor slice_to_tensor(const Volume& s, torch::Dtype dtype) {
  if (s.nz() != 1) throw ValidationError("slice_to_tensor: expected nz == 1, got " + s.dims().str());
  const int c = s.channels(), h = s.ny(), w = s.nx();
  // Volume layout is channel-fastest: [H, W, C] in row-major terms.
  torch::Tensor t = torch::from_blob(const_cast<double*>(s.data().data()), {h, w, c}, torch::kFloat64);
  return t.permute({2, 0, 1}).to(dtype).contiguous();
}

Volume tensor_to_slice(const torch::Tensor& chw) {
  if (chw.dim() != 3) throw ValidationError("tensor_to_slice: expected [C, H, W]");
  const torch::Tensor t = chw.detach().to(torch::kFloat64).permute({1, 2, 0}).contiguous();
  Volume s(Dims{static_cast<int>(chw.size(2)), static_cast<int>(chw.size(1)), 1}, static_cast<int>(chw.size(0)));
  std::copy(t.data_ptr<double>(), t.data_ptr<double>() + s.size(), s.data().begin());
  return s;
}

torch::Tensor stack_slices(const std::vector<const Volume*>& slices, torch::Dtype dtype) {
  if (slices.empty()) throw ValidationError("stack_slices: nothing to stack");
  std::vector<torch::Tensor> ts;
  ts.reserve(slices.size());
  for (const Volume* s : slices) {
    if (s->dims() != slices.front()->dims() || s->channels() != slices.front()->channels()) {
      throw ValidationError("stack_slices: slices differ in shape");
    }
    ts.push_back(slice_to_tensor(*s, dtype));
  }
  return torch::stack(ts);
}

torch::Tensor warp2d(const torch::Tensor& x, const torch::Tensor& flow, double dt) {
  if (x.dim() != 4 || flow.dim() != 4 || flow.size(1) != 2 || flow.size(0) != x.size(0) ||
      flow.size(2) != x.size(2) || flow.size(3) != x.size(3)) {
    throw ValidationError("warp2d: flow must be [N, 2, H, W] matching the input");
  }
  const std::int64_t n = x.size(0), c = x.size(1), h = x.size(2), w = x.size(3);
  const auto opts = flow.options();
  const torch::Tensor gx = torch::arange(w, opts).view({1, 1, w}).expand({n, h, w});
  const torch::Tensor gy = torch::arange(h, opts).view({1, h, 1}).expand({n, h, w});
  const torch::Tensor f = flow.detach();
  const torch::Tensor u = (gx - dt * f.select(1, 0)).clamp(0, static_cast<double>(w - 1));
  const torch::Tensor v = (gy - dt * f.select(1, 1)).clamp(0, static_cast<double>(h - 1));
  const torch::Tensor u0 = u.floor().clamp_max(static_cast<double>(w - 1)), v0 = v.floor().clamp_max(static_cast<double>(h - 1));
  const torch::Tensor tu = (u - u0).unsqueeze(1).to(x.dtype()), tv = (v - v0).unsqueeze(1).to(x.dtype());
  const torch::Tensor i0 = u0.to(torch::kLong), j0 = v0.to(torch::kLong);
  const torch::Tensor i1 = (i0 + 1).clamp_max(w - 1), j1 = (j0 + 1).clamp_max(h - 1);
  const torch::Tensor flat = x.reshape({n, c, h * w});
  auto gather = [&](const torch::Tensor& jj, const torch::Tensor& ii) {
    const torch::Tensor idx = (jj * w + ii).view({n, 1, h * w}).expand({n, c, h * w});
    return flat.gather(2, idx).view({n, c, h, w});
  };
  const torch::Tensor a = gather(j0, i0) * (1 - tu) + gather(j0, i1) * tu;
  const torch::Tensor b = gather(j1, i0) * (1 - tu) + gather(j1, i1) * tu;
  return a * (1 - tv) + b * tv;
}

}  // namespace mpgan::nets
