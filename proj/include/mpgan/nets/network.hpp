#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpgan/nets/layers.hpp"
#include "mpgan/nets/spec.hpp"

namespace mpgan::nets {

/// Named parameter tensors for one network. Weights are stored unit-normal
/// and scaled at evaluation time (equalized learning rate); biases start at 0.
class WeightStore {
 public:
  WeightStore() = default;

  /// One entry per parameter tensor of every layer in `spec`.
  static WeightStore initialize(const NetworkSpec& spec, std::uint64_t seed, torch::Dtype dtype = torch::kFloat32);

  const std::string& init_mode() const { return init_mode_; }
  void set_init_mode(std::string mode) { init_mode_ = std::move(mode); }

  bool contains(const std::string& name) const { return tensors_.count(name) > 0; }
  const torch::Tensor& at(const std::string& name) const;
  torch::Tensor& at(const std::string& name);
  void set(const std::string& name, torch::Tensor t) { tensors_[name] = std::move(t); }

  const std::map<std::string, torch::Tensor>& tensors() const { return tensors_; }
  std::vector<torch::Tensor> parameters() const;
  std::size_t element_count() const;

  /// Deep copy, optionally converted.
  WeightStore clone(std::optional<torch::Dtype> dtype = std::nullopt) const;
  void set_requires_grad(bool flag);
  /// Zeroes every tensor belonging to the named layer prefixes (all when empty).
  void zero(const std::vector<std::string>& prefixes = {});
  bool equal(const WeightStore& other) const;

  /// Checks names and shapes against `spec`.
  void check(const NetworkSpec& spec) const;

 private:
  std::map<std::string, torch::Tensor> tensors_;
  std::string init_mode_ = "unit_normal_equalized";
};

/// Parameter tensor names and shapes a spec requires.
std::vector<std::pair<std::string, std::vector<std::int64_t>>> parameter_shapes(const NetworkSpec& spec);

/// Generator forward at a growth state: input [N, C, h, w] at the network's
/// input resolution; output [N, 1, h*2^s, w*2^s] (G1) or the fixed output
/// size. output = base + (1 - a) * depool(to_density_{s-1}) + a * to_density_s,
/// base = bicubic up-sampled input channel `spec.base_channel`.
/// Optional taps receive every pixel-norm output.
torch::Tensor generate(const NetworkSpec& spec, const WeightStore& w, const torch::Tensor& input,
                       const GrowthState& growth, std::vector<torch::Tensor>* pn_taps = nullptr);

/// Only the residual (no base); the tiled-inference and test hooks use it.
torch::Tensor generate_residual(const NetworkSpec& spec, const WeightStore& w, const torch::Tensor& input,
                                const GrowthState& growth, std::vector<torch::Tensor>* pn_taps = nullptr);

/// Critic forward: input [N, C, S, S] with S = spec.side_at_stage(stage);
/// returns [N] raw scores. Features after each pooling stage are appended
/// to `features` when given.
torch::Tensor criticize(const NetworkSpec& spec, const WeightStore& w, const torch::Tensor& input,
                        const GrowthState& growth, std::vector<torch::Tensor>* features = nullptr);

/// Output / input side ratio of a generator at `stage`.
int generator_scale(const NetworkSpec& spec, int stage);

}  // namespace mpgan::nets
