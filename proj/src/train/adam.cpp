#include "mpgan/train/adam.hpp"

#include <cmath>

#include "mpgan/core/volume.hpp"

namespace mpgan::train {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw ValidationError("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ValidationError("Adam epsilon must be positive");
}

void adam_update(torch::Tensor& w, const torch::Tensor& g, torch::Tensor& m, torch::Tensor& v, std::int64_t step,
                 const AdamConfig& cfg, double lr_scale) {
  torch::NoGradGuard guard;
  m.mul_(cfg.beta1).add_(g, 1.0 - cfg.beta1);
  v.mul_(cfg.beta2).addcmul_(g, g, 1.0 - cfg.beta2);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  const torch::Tensor denom = (v / c2).sqrt_().add_(cfg.eps);
  w.addcdiv_(m, denom, -cfg.lr * lr_scale / c1);
}

Adam::Adam(const WeightStore& w, AdamConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  for (const auto& [name, t] : w.tensors()) {
    m_[name] = torch::zeros_like(t).detach();
    v_[name] = torch::zeros_like(t).detach();
  }
}

bool Adam::step(WeightStore& w, const std::map<std::string, torch::Tensor>& grads, double lr_scale) {
  for (const auto& [name, g] : grads) {
    if (g.defined() && !torch::isfinite(g).all().item<bool>()) return false;
  }
  ++step_;
  for (auto& [name, m] : m_) {
    auto it = grads.find(name);
    const torch::Tensor g = (it != grads.end() && it->second.defined()) ? it->second : torch::zeros_like(m);
    torch::Tensor& t = w.at(name);
    adam_update(t, g.to(t.scalar_type()), m, v_.at(name), step_, cfg_, lr_scale);
  }
  return true;
}

void Adam::restore(std::map<std::string, torch::Tensor> m, std::map<std::string, torch::Tensor> v,
                   std::int64_t steps) {
  if (m.size() != m_.size() || v.size() != v_.size()) throw ValidationError("Adam state does not match the weights");
  for (const auto& [name, t] : m_) {
    if (!m.count(name) || !v.count(name) || m.at(name).sizes() != t.sizes() || v.at(name).sizes() != t.sizes()) {
      throw ValidationError("Adam state mismatch for '" + name + "'");
    }
  }
  m_ = std::move(m);
  v_ = std::move(v);
  step_ = steps;
}

std::map<std::string, torch::Tensor> gradients(const torch::Tensor& loss, const WeightStore& w, bool retain_graph) {
  std::vector<std::string> names;
  std::vector<torch::Tensor> inputs;
  for (const auto& [name, t] : w.tensors()) {
    names.push_back(name);
    inputs.push_back(t);
  }
  const auto grads = torch::autograd::grad({loss}, inputs, {}, retain_graph, /*create_graph=*/false,
                                           /*allow_unused=*/true);
  std::map<std::string, torch::Tensor> out;
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = grads[i];
  return out;
}

}  // namespace mpgan::train
