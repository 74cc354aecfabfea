#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mpgan/nets/network.hpp"

namespace mpgan::train {

using nets::WeightStore;

struct AdamConfig {
  double lr = 0.0005;
  double beta1 = 0.0;
  double beta2 = 0.99;
  double eps = 1e-8;
  void validate() const;
};

/// One bias-corrected Adam step on a single tensor, in place. `step` is the
/// 1-based count including this update.
void adam_update(torch::Tensor& w, const torch::Tensor& g, torch::Tensor& m, torch::Tensor& v, std::int64_t step,
                 const AdamConfig& cfg, double lr_scale);

/// Adam over every tensor of a WeightStore; moments are keyed like the weights.
class Adam {
 public:
  Adam() = default;
  Adam(const WeightStore& w, AdamConfig cfg);

  /// Applies `grads` (undefined entries count as zero). Returns false and
  /// leaves everything untouched when any gradient is non-finite.
  bool step(WeightStore& w, const std::map<std::string, torch::Tensor>& grads, double lr_scale);

  std::int64_t steps() const { return step_; }
  const AdamConfig& config() const { return cfg_; }
  const std::map<std::string, torch::Tensor>& first_moments() const { return m_; }
  const std::map<std::string, torch::Tensor>& second_moments() const { return v_; }
  void restore(std::map<std::string, torch::Tensor> m, std::map<std::string, torch::Tensor> v, std::int64_t steps);

 private:
  AdamConfig cfg_;
  std::map<std::string, torch::Tensor> m_, v_;
  std::int64_t step_ = 0;
};

/// Gradients of `loss` with respect to every tensor in `w` (zero where unused).
std::map<std::string, torch::Tensor> gradients(const torch::Tensor& loss, const WeightStore& w,
                                               bool retain_graph = false);

}  // namespace mpgan::train
