#include "mpgan/nets/network.hpp"

#include <random>

namespace mpgan::nets {
namespace {

using Shape = std::vector<std::int64_t>;

void add_conv(std::vector<std::pair<std::string, Shape>>& out, const std::string& p, int in, int o, int k) {
  out.push_back({p + ".w", {o, in, k, k}});
  out.push_back({p + ".b", {o}});
}

torch::Tensor conv(const WeightStore& w, const std::string& p, const torch::Tensor& x) {
  return eq_conv2d(x, w.at(p + ".w"), w.at(p + ".b"));
}

ResBlockWeights block_weights(const WeightStore& w, const LayerDesc& l) {
  ResBlockWeights r;
  r.w1 = w.at(l.name + ".conv1.w");
  r.b1 = w.at(l.name + ".conv1.b");
  r.w2 = w.at(l.name + ".conv2.w");
  r.b2 = w.at(l.name + ".conv2.b");
  if (l.in_channels != l.out_channels) {
    r.skip_w = w.at(l.name + ".skip.w");
    r.skip_b = w.at(l.name + ".skip.b");
  }
  return r;
}

const LayerDesc& find_side_layer(const NetworkSpec& spec, LayerKind kind, int stage) {
  for (const auto& l : spec.layers)
    if (l.kind == kind && l.stage == stage) return l;
  throw ValidationError(spec.name + ": no side branch for stage " + std::to_string(stage));
}

void check_growth(const NetworkSpec& spec, const GrowthState& g) {
  if (g.stage < 0 || g.stage >= spec.stages) {
    throw ValidationError(spec.name + ": growth stage " + std::to_string(g.stage) + " beyond built depth");
  }
  if (!(g.alpha >= 0.0 && g.alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
}

}  // namespace

std::vector<std::pair<std::string, Shape>> parameter_shapes(const NetworkSpec& spec) {
  std::vector<std::pair<std::string, Shape>> out;
  for (const auto& l : spec.layers) {
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::ToDensity:
      case LayerKind::FromDensity: add_conv(out, l.name, l.in_channels, l.out_channels, l.kernel); break;
      case LayerKind::ResBlock:
        add_conv(out, l.name + ".conv1", l.in_channels, l.out_channels, l.kernel);
        add_conv(out, l.name + ".conv2", l.out_channels, l.out_channels, l.kernel);
        if (l.in_channels != l.out_channels) add_conv(out, l.name + ".skip", l.in_channels, l.out_channels, 1);
        break;
      case LayerKind::FlattenFc:
        out.push_back({l.name + ".w", {l.out_channels, l.in_channels}});
        out.push_back({l.name + ".b", {l.out_channels}});
        break;
      default: break;
    }
  }
  return out;
}

WeightStore WeightStore::initialize(const NetworkSpec& spec, std::uint64_t seed, torch::Dtype dtype) {
  WeightStore ws;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& [name, shape] : parameter_shapes(spec)) {
    torch::Tensor t = torch::zeros(shape, torch::kFloat64);
    if (name.size() > 2 && name.compare(name.size() - 2, 2, ".w") == 0) {
      double* p = t.data_ptr<double>();
      for (std::int64_t i = 0; i < t.numel(); ++i) p[i] = normal(rng);
    }
    ws.tensors_[name] = t.to(dtype);
  }
  return ws;
}

const torch::Tensor& WeightStore::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ValidationError("missing weight tensor '" + name + "'");
  return it->second;
}

torch::Tensor& WeightStore::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ValidationError("missing weight tensor '" + name + "'");
  return it->second;
}

std::vector<torch::Tensor> WeightStore::parameters() const {
  std::vector<torch::Tensor> out;
  for (const auto& [_, t] : tensors_) out.push_back(t);
  return out;
}

std::size_t WeightStore::element_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : tensors_) n += static_cast<std::size_t>(t.numel());
  return n;
}

WeightStore WeightStore::clone(std::optional<torch::Dtype> dtype) const {
  WeightStore out;
  out.init_mode_ = init_mode_;
  for (const auto& [name, t] : tensors_) {
    torch::Tensor c = t.detach().clone();
    if (dtype) c = c.to(*dtype);
    out.tensors_[name] = c;
  }
  return out;
}

void WeightStore::set_requires_grad(bool flag) {
  for (auto& [_, t] : tensors_) t.set_requires_grad(flag);
}

void WeightStore::zero(const std::vector<std::string>& prefixes) {
  torch::NoGradGuard guard;
  for (auto& [name, t] : tensors_) {
    bool hit = prefixes.empty();
    for (const auto& p : prefixes) hit = hit || name.rfind(p + ".", 0) == 0;
    if (hit) t.zero_();
  }
}

bool WeightStore::equal(const WeightStore& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  for (const auto& [name, t] : tensors_) {
    auto it = other.tensors_.find(name);
    if (it == other.tensors_.end() || !torch::equal(t, it->second)) return false;
  }
  return true;
}

void WeightStore::check(const NetworkSpec& spec) const {
  const auto shapes = parameter_shapes(spec);
  if (shapes.size() != tensors_.size()) {
    throw ValidationError(spec.name + ": expected " + std::to_string(shapes.size()) + " tensors, have " +
                          std::to_string(tensors_.size()));
  }
  for (const auto& [name, shape] : shapes) {
    if (at(name).sizes().vec() != shape) throw ValidationError(spec.name + ": shape mismatch for '" + name + "'");
  }
}

int generator_scale(const NetworkSpec& spec, int stage) { return spec.side_at_stage(stage) / spec.input_size; }

torch::Tensor generate_residual(const NetworkSpec& spec, const WeightStore& w, const torch::Tensor& input,
                                const GrowthState& g, std::vector<torch::Tensor>* pn_taps) {
  if (spec.role != Role::Generator) throw ValidationError(spec.name + " is not a generator");
  check_growth(spec, g);
  if (input.dim() != 4 || input.size(1) != spec.in_channels) {
    throw ValidationError(spec.name + ": expected [N, " + std::to_string(spec.in_channels) + ", H, W] input");
  }
  const int s = g.stage;
  const bool blend = s > 0 && g.alpha < 1.0;
  const bool only_prev = s > 0 && g.alpha == 0.0;
  torch::Tensor h = input, current, previous;
  for (const auto& l : spec.layers) {
    if (l.stage > s || (only_prev && l.stage == s)) break;
    switch (l.kind) {
      case LayerKind::ResBlock: h = res_block(h, block_weights(w, l), pn_taps); break;
      case LayerKind::AvgDepool: h = avg_depool(h); break;
      case LayerKind::Conv: h = conv(w, l.name, h); break;
      case LayerKind::ToDensity:
        if (l.stage == s) current = conv(w, l.name, h);
        if (blend && l.stage == s - 1) previous = avg_depool(conv(w, l.name, h));
        break;
      default: throw ValidationError(spec.name + ": unsupported generator layer");
    }
  }
  if (only_prev) return previous;
  if (!blend) return current;
  return g.alpha * current + (1.0 - g.alpha) * previous;
}

torch::Tensor generate(const NetworkSpec& spec, const WeightStore& w, const torch::Tensor& input, const GrowthState& g,
                       std::vector<torch::Tensor>* pn_taps) {
  const torch::Tensor residual = generate_residual(spec, w, input, g, pn_taps);
  torch::Tensor base;
  {
    torch::NoGradGuard guard;
    base = bicubic_upsample(input.narrow(1, spec.base_channel, 1).detach(), generator_scale(spec, g.stage));
  }
  return base + residual;
}

torch::Tensor criticize(const NetworkSpec& spec, const WeightStore& w, const torch::Tensor& x, const GrowthState& g,
                        std::vector<torch::Tensor>* features) {
  if (spec.role != Role::Discriminator) throw ValidationError(spec.name + " is not a discriminator");
  check_growth(spec, g);
  const int s = g.stage;
  if (s > 0 && g.alpha == 0.0) return criticize(spec, w, avg_pool(x), GrowthState{s - 1, 1.0}, features);
  const int side = spec.side_at_stage(s);
  if (x.dim() != 4 || x.size(1) != spec.in_channels || x.size(2) != side || x.size(3) != side) {
    throw ValidationError(spec.name + ": expected [N, " + std::to_string(spec.in_channels) + ", " +
                          std::to_string(side) + ", " + std::to_string(side) + "] input at stage " + std::to_string(s));
  }
  torch::Tensor h;
  const auto& layers = spec.layers;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerDesc& l = layers[i];
    if (l.stage > s) continue;
    switch (l.kind) {
      case LayerKind::FromDensity:
        if (l.stage == s && !h.defined()) {
          h = conv(w, l.name, x);
        } else {
          ++i;  // inactive entry point: skip it and its activation
        }
        break;
      case LayerKind::Activation: h = torch::leaky_relu(h, spec.leaky_slope); break;
      case LayerKind::Conv: h = conv(w, l.name, h); break;
      case LayerKind::AvgPool:
        h = avg_pool(h);
        if (l.stage == s && s > 0 && g.alpha < 1.0) {
          const LayerDesc& from = find_side_layer(spec, LayerKind::FromDensity, s - 1);
          const torch::Tensor skip = torch::leaky_relu(conv(w, from.name, avg_pool(x)), spec.leaky_slope);
          h = g.alpha * h + (1.0 - g.alpha) * skip;
        }
        if (features) features->push_back(h);
        break;
      case LayerKind::FlattenFc: {
        const torch::Tensor fw = w.at(l.name + ".w");
        h = torch::linear(h.flatten(1), fw * equalized_scale(fw.size(1)), w.at(l.name + ".b")).squeeze(1);
        break;
      }
      default: throw ValidationError(spec.name + ": unsupported critic layer");
    }
  }
  return h;
}

}  // namespace mpgan::nets
