#include "ttie/losses.hpp"

#include <cmath>

#include "ttie/error.hpp"

namespace ttie {

namespace {

void check_finite(const torch::Tensor& t, const char* what) {
  check(t.isfinite().all().item<bool>(), ErrorKind::numerical,
        std::string("non-finite values in ") + what);
}

void check_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* who) {
  check(a.sizes() == b.sizes(), ErrorKind::shape,
        std::string(who) + ": operands must share a shape");
}

/// Per-(sample, channel) normalisation over the spatial extent.
torch::Tensor instance_normalized(const torch::Tensor& features) {
  auto mean = features.mean({2, 3}, /*keepdim=*/true);
  auto var = features.var({2, 3}, /*unbiased=*/false, /*keepdim=*/true);
  return (features - mean) / torch::sqrt(var + 1e-5);
}

}  // namespace

bool LossBreakdown::finite() const {
  for (double v : {adv_g, adv_d, sty, ds, cyc, percep, gp, total_g, total_d})
    if (!std::isfinite(v)) return false;
  return true;
}

AdversarialPair adversarial_loss(const torch::Tensor& real_logits,
                                 const torch::Tensor& fake_logits) {
  check_finite(real_logits, "discriminator logits on real images");
  check_finite(fake_logits, "discriminator logits on fake images");
  AdversarialPair pair;
  pair.d_loss = torch::softplus(-real_logits).mean() + torch::softplus(fake_logits).mean();
  pair.g_loss = torch::softplus(-fake_logits).mean();
  return pair;
}

torch::Tensor style_reconstruction_loss(const torch::Tensor& style,
                                        const torch::Tensor& style_rec) {
  check_same_shape(style, style_rec, "style reconstruction loss");
  return (style - style_rec).abs().mean();
}

torch::Tensor diversity_loss(const torch::Tensor& x1, const torch::Tensor& x2) {
  check_same_shape(x1, x2, "diversity loss");
  return (x1 - x2).abs().mean();
}

torch::Tensor cycle_loss(const torch::Tensor& x, const torch::Tensor& x_back) {
  check_same_shape(x, x_back, "cycle loss");
  return (x - x_back).abs().mean();
}

torch::Tensor perceptual_domain_invariant_loss(const torch::Tensor& x,
                                               const torch::Tensor& x_translated,
                                               PerceptualExtractor& extractor) {
  check_same_shape(x, x_translated, "perceptual loss");
  auto fx = instance_normalized(extractor->forward(x));
  auto fy = instance_normalized(extractor->forward(x_translated));
  return (fx - fy).pow(2).mean();
}

torch::Tensor perceptual_raw_feature_distance(const torch::Tensor& x,
                                              const torch::Tensor& x_translated,
                                              PerceptualExtractor& extractor) {
  check_same_shape(x, x_translated, "perceptual feature distance");
  return (extractor->forward(x) - extractor->forward(x_translated)).pow(2).mean();
}

torch::Tensor gradient_penalty(const std::function<torch::Tensor(const torch::Tensor&)>& score_fn,
                               const torch::Tensor& x_real) {
  auto x = x_real.detach().clone().set_requires_grad(true);
  auto scores = score_fn(x);
  check_finite(scores, "gradient penalty scores");
  auto grads = torch::autograd::grad({scores.sum()}, {x},
                                     /*grad_outputs=*/{},
                                     /*retain_graph=*/true,
                                     /*create_graph=*/true);
  auto grad = grads[0];
  return 0.5 * grad.pow(2).flatten(1).sum(1).mean();
}

}  // namespace ttie
