#pragma once

#include <torch/torch.h>

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mpgan/nets/layers.hpp"

namespace mpgan::train {

enum class LossKind { Tempo, WganGp, Lsgan };

std::string to_string(LossKind k);
LossKind parse_loss_kind(const std::string& s);

struct LossWeights {
  LossKind kind = LossKind::WganGp;
  double l1 = 20.0;
  double gp = 10.0;
  /// Per-tap feature weights; only meaningful for the tempo kind.
  std::vector<double> feature;

  /// Kind-appropriate defaults; `feature_taps` critic taps share weight 1/taps.
  static LossWeights defaults(LossKind kind, int feature_taps = 0);
  void validate() const;
};

/// Mean absolute error.
torch::Tensor l1_term(const torch::Tensor& output, const torch::Tensor& target);

/// sum_j w_j * mean((a_j - b_j)^2).
torch::Tensor feature_loss(const std::vector<torch::Tensor>& fake, const std::vector<torch::Tensor>& real,
                           const std::vector<double>& weights);

// Sigmoid cross-entropy forms on raw logits; log(sigmoid(z)) = -softplus(-z).
/// -E[log D(real)] - E[log(1 - D(fake))]
torch::Tensor tempo_critic_loss(const torch::Tensor& real_logits, const torch::Tensor& fake_logits);
/// -E[log D(fake)]
torch::Tensor tempo_generator_term(const torch::Tensor& fake_logits);

/// 1/2 E[(D(real) - 1)^2] + 1/2 E[D(fake)^2], D = sigmoid(logit).
torch::Tensor lsgan_critic_loss(const torch::Tensor& real_logits, const torch::Tensor& fake_logits);
/// 1/2 E[(D(fake) - 1)^2]
torch::Tensor lsgan_generator_term(const torch::Tensor& fake_logits);

/// -E[D(real)] + E[D(fake)] without the penalty.
torch::Tensor wgan_critic_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores);
/// -E[D(fake)]
torch::Tensor wgan_generator_term(const torch::Tensor& fake_scores);

using CriticFn = std::function<torch::Tensor(const torch::Tensor&)>;

struct GradientPenalty {
  torch::Tensor penalty;      ///< E[(|grad| - 1)^2], differentiable w.r.t. critic weights
  torch::Tensor grad_norms;   ///< [N], per-sample
  torch::Tensor interpolate;  ///< (1 - R) * fake + R * real
};

/// Penalty at per-sample interpolates; `r` holds one mixing weight per sample.
/// The graph is kept so the penalty back-propagates into the critic.
GradientPenalty gradient_penalty(const CriticFn& critic, const torch::Tensor& real, const torch::Tensor& fake,
                                 const torch::Tensor& r);

/// R ~ U[0, 1), one per sample.
torch::Tensor draw_mix_weights(std::int64_t n, std::mt19937_64& rng, torch::Dtype dtype);

struct CriticTerms {
  torch::Tensor loss;     ///< including the weighted penalty for WGAN-GP
  torch::Tensor penalty;  ///< undefined for the other kinds
};

/// Critic objective of `w.kind` on a real and a (detached) fake batch; R is
/// drawn per sample from `rng` for the penalty.
CriticTerms critic_objective(const LossWeights& w, const CriticFn& critic, const torch::Tensor& real,
                             const torch::Tensor& fake, std::mt19937_64& rng);

struct GeneratorTerms {
  torch::Tensor adv_spatial, adv_temporal, feature, l1, total;  ///< undefined terms are absent
};

/// Generator objective: adversarial terms of `w.kind` from the critics'
/// scores on fakes, feature matching between critic taps (tempo kind; the
/// weights default to 1 / taps), and the weighted L1 term.
GeneratorTerms generator_objective(const LossWeights& w, const torch::Tensor& spatial_scores,
                                   const torch::Tensor& temporal_scores, const std::vector<torch::Tensor>& fake_taps,
                                   const std::vector<torch::Tensor>& real_taps, const torch::Tensor& output,
                                   const torch::Tensor& target);

/// Temporal critic input from three consecutive frames [N, 1, H, W]:
/// (A(prev, +v_prev), cur, A(next, -v_next)) concatenated over channels.
torch::Tensor warped_triplet(const torch::Tensor& prev, const torch::Tensor& cur, const torch::Tensor& next,
                             const torch::Tensor& flow_prev, const torch::Tensor& flow_next, double dt);

/// Throws NumericalError naming `what` when `t` holds a NaN or infinity.
void require_finite(const torch::Tensor& t, const std::string& what);

}  // namespace mpgan::train
