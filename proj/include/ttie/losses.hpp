#pragma once

#include <functional>

#include <torch/torch.h>

#include "ttie/config.hpp"
#include "ttie/networks.hpp"

namespace ttie {

/// Scalar view of one training step's objective, logged to CSV.
/// total_g = l_adv*adv_g + l_sty*sty + l_cyc*cyc + l_percep*percep - l_ds*ds
/// total_d = adv_d + l_gp*gp
struct LossBreakdown {
  double adv_g = 0, adv_d = 0, sty = 0, ds = 0, cyc = 0, percep = 0, gp = 0;
  double total_g = 0, total_d = 0;

  bool finite() const;
};

struct AdversarialPair {
  torch::Tensor d_loss;  // penalises fakes-as-real and reals-as-fake
  torch::Tensor g_loss;  // rewards fakes-as-real
};

/// Non-saturating logistic GAN loss from raw logits.
AdversarialPair adversarial_loss(const torch::Tensor& real_logits,
                                 const torch::Tensor& fake_logits);

/// Mean absolute difference between the requested and re-encoded style.
torch::Tensor style_reconstruction_loss(const torch::Tensor& style,
                                        const torch::Tensor& style_rec);

/// Mean absolute pixel difference between two translations of the same
/// input (maximised by the generator).
torch::Tensor diversity_loss(const torch::Tensor& x1, const torch::Tensor& x2);

/// Mean absolute pixel difference between the input and its round trip.
torch::Tensor cycle_loss(const torch::Tensor& x, const torch::Tensor& x_back);

/// Distance between instance-normalised deep features of the input and its
/// translation. Normalisation removes domain-specific feature statistics, so
/// structure rather than appearance is compared.
torch::Tensor perceptual_domain_invariant_loss(const torch::Tensor& x,
                                               const torch::Tensor& x_translated,
                                               PerceptualExtractor& extractor);

/// Raw (non-normalised) feature distance under the same extractor; exposed
/// so the normalisation effect is observable.
torch::Tensor perceptual_raw_feature_distance(const torch::Tensor& x,
                                              const torch::Tensor& x_translated,
                                              PerceptualExtractor& extractor);

/// R1 penalty: 0.5 * E[ ||d score(x)/dx||^2 ] over real inputs. The returned
/// scalar stays differentiable w.r.t. the score function's parameters.
torch::Tensor gradient_penalty(const std::function<torch::Tensor(const torch::Tensor&)>& score_fn,
                               const torch::Tensor& x_real);

}  // namespace ttie
