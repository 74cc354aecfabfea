#include "mpgan/train/losses.hpp"

#include "mpgan/core/volume.hpp"
#include "mpgan/nets/layers.hpp"

namespace mpgan::train {

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::Tempo: return "tempo";
    case LossKind::WganGp: return "wgan_gp";
    case LossKind::Lsgan: return "lsgan";
  }
  return "?";
}

LossKind parse_loss_kind(const std::string& s) {
  if (s == "tempo") return LossKind::Tempo;
  if (s == "wgan_gp" || s == "wgan") return LossKind::WganGp;
  if (s == "lsgan") return LossKind::Lsgan;
  throw ValidationError("unknown loss kind '" + s + "' (tempo, wgan_gp, lsgan)");
}

LossWeights LossWeights::defaults(LossKind kind, int feature_taps) {
  LossWeights w;
  w.kind = kind;
  if (kind == LossKind::Tempo && feature_taps > 0) w.feature.assign(feature_taps, 1.0 / feature_taps);
  return w;
}

void LossWeights::validate() const {
  if (!(l1 >= 0.0) || !(gp >= 0.0)) throw ValidationError("loss weights must be non-negative");
  for (double f : feature)
    if (!(f >= 0.0)) throw ValidationError("feature weights must be non-negative");
  if (kind == LossKind::WganGp && !feature.empty()) {
    throw ValidationError("the WGAN-GP objective carries no feature-space term");
  }
}

torch::Tensor l1_term(const torch::Tensor& output, const torch::Tensor& target) {
  return (output - target).abs().mean();
}

torch::Tensor feature_loss(const std::vector<torch::Tensor>& fake, const std::vector<torch::Tensor>& real,
                           const std::vector<double>& weights) {
  if (fake.size() != real.size() || fake.size() != weights.size()) {
    throw ValidationError("feature_loss: " + std::to_string(fake.size()) + " fake taps, " +
                          std::to_string(real.size()) + " real taps, " + std::to_string(weights.size()) + " weights");
  }
  torch::Tensor total = torch::zeros({}, fake.empty() ? torch::kFloat32 : fake.front().scalar_type());
  for (std::size_t j = 0; j < fake.size(); ++j) total = total + weights[j] * (fake[j] - real[j]).pow(2).mean();
  return total;
}

torch::Tensor tempo_critic_loss(const torch::Tensor& real_logits, const torch::Tensor& fake_logits) {
  return torch::softplus(-real_logits).mean() + torch::softplus(fake_logits).mean();
}

torch::Tensor tempo_generator_term(const torch::Tensor& fake_logits) { return torch::softplus(-fake_logits).mean(); }

torch::Tensor lsgan_critic_loss(const torch::Tensor& real_logits, const torch::Tensor& fake_logits) {
  return 0.5 * (torch::sigmoid(real_logits) - 1).pow(2).mean() + 0.5 * torch::sigmoid(fake_logits).pow(2).mean();
}

torch::Tensor lsgan_generator_term(const torch::Tensor& fake_logits) {
  return 0.5 * (torch::sigmoid(fake_logits) - 1).pow(2).mean();
}

torch::Tensor wgan_critic_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores) {
  return fake_scores.mean() - real_scores.mean();
}

torch::Tensor wgan_generator_term(const torch::Tensor& fake_scores) { return -fake_scores.mean(); }

GradientPenalty gradient_penalty(const CriticFn& critic, const torch::Tensor& real, const torch::Tensor& fake,
                                 const torch::Tensor& r) {
  if (real.sizes() != fake.sizes()) throw ValidationError("gradient_penalty: real and fake shapes differ");
  if (r.dim() != 1 || r.size(0) != real.size(0)) throw ValidationError("gradient_penalty: one R per sample");
  std::vector<std::int64_t> bshape(real.dim(), 1);
  bshape[0] = real.size(0);
  const torch::Tensor rb = r.to(real.scalar_type()).view(bshape);
  GradientPenalty gp;
  gp.interpolate = ((1 - rb) * fake.detach() + rb * real.detach()).requires_grad_(true);
  const torch::Tensor scores = critic(gp.interpolate);
  const torch::Tensor grad = torch::autograd::grad({scores.sum()}, {gp.interpolate}, {}, /*retain_graph=*/true,
                                                   /*create_graph=*/true)[0];
  gp.grad_norms = grad.flatten(1).norm(2, 1);
  gp.penalty = (gp.grad_norms - 1).pow(2).mean();
  return gp;
}

torch::Tensor draw_mix_weights(std::int64_t n, std::mt19937_64& rng, torch::Dtype dtype) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  torch::Tensor r = torch::empty({n}, torch::kFloat64);
  for (std::int64_t i = 0; i < n; ++i) r[i] = u(rng);
  return r.to(dtype);
}

CriticTerms critic_objective(const LossWeights& w, const CriticFn& critic, const torch::Tensor& real,
                             const torch::Tensor& fake, std::mt19937_64& rng) {
  const torch::Tensor f = fake.detach();
  const torch::Tensor rs = critic(real), fs = critic(f);
  CriticTerms out;
  switch (w.kind) {
    case LossKind::WganGp: {
      const auto gp = gradient_penalty(critic, real, f, draw_mix_weights(f.size(0), rng, f.scalar_type()));
      out.penalty = gp.penalty;
      out.loss = wgan_critic_loss(rs, fs) + w.gp * gp.penalty;
      break;
    }
    case LossKind::Tempo: out.loss = tempo_critic_loss(rs, fs); break;
    case LossKind::Lsgan: out.loss = lsgan_critic_loss(rs, fs); break;
  }
  return out;
}

GeneratorTerms generator_objective(const LossWeights& w, const torch::Tensor& spatial_scores,
                                   const torch::Tensor& temporal_scores, const std::vector<torch::Tensor>& fake_taps,
                                   const std::vector<torch::Tensor>& real_taps, const torch::Tensor& output,
                                   const torch::Tensor& target) {
  auto adversarial = [&](const torch::Tensor& s) {
    switch (w.kind) {
      case LossKind::WganGp: return wgan_generator_term(s);
      case LossKind::Tempo: return tempo_generator_term(s);
      case LossKind::Lsgan: return lsgan_generator_term(s);
    }
    return torch::Tensor();
  };
  GeneratorTerms t;
  t.adv_spatial = adversarial(spatial_scores);
  t.l1 = l1_term(output, target);
  t.total = t.adv_spatial + w.l1 * t.l1;
  if (temporal_scores.defined()) {
    t.adv_temporal = adversarial(temporal_scores);
    t.total = t.total + t.adv_temporal;
  }
  if (w.kind == LossKind::Tempo && !fake_taps.empty()) {
    std::vector<double> fw = w.feature;
    if (fw.empty()) fw.assign(fake_taps.size(), 1.0 / static_cast<double>(fake_taps.size()));
    t.feature = feature_loss(fake_taps, real_taps, fw);
    t.total = t.total + t.feature;
  }
  return t;
}

torch::Tensor warped_triplet(const torch::Tensor& prev, const torch::Tensor& cur, const torch::Tensor& next,
                             const torch::Tensor& flow_prev, const torch::Tensor& flow_next, double dt) {
  return torch::cat({nets::warp2d(prev, flow_prev, dt), cur, nets::warp2d(next, flow_next, -dt)}, 1);
}

void require_finite(const torch::Tensor& t, const std::string& what) {
  if (!torch::isfinite(t).all().item<bool>()) throw NumericalError(what + " is not finite");
}

}  // namespace mpgan::train
