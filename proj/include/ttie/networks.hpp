#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "ttie/config.hpp"

namespace ttie {

/// Architecture hyperparameters shared by every network builder.
struct NetworkShape {
  int image_resolution = 64;
  int style_dim = 64;
  int latent_dim = 16;
  int num_domains = 3;
  int num_classes = 3;
  int base_channels = 16;
  int classifier_channels = 16;

  static NetworkShape from_config(const ExperimentConfig& config);
};

/// Instance-normalises features, then modulates them per sample with a
/// scale/shift computed from the style vector.
class AdaptiveInstanceNorm2dImpl : public torch::nn::Module {
 public:
  AdaptiveInstanceNorm2dImpl(int style_dim, int channels);
  torch::Tensor forward(const torch::Tensor& h, const torch::Tensor& style);

 private:
  torch::nn::Linear affine_{nullptr};
  int channels_;
};
TORCH_MODULE(AdaptiveInstanceNorm2d);

/// Pre-activation residual block; optional instance norm and 2x average-pool
/// downsampling. Output is (residual + shortcut) / sqrt(2).
class ResBlockImpl : public torch::nn::Module {
 public:
  ResBlockImpl(int in_channels, int out_channels, bool downsample, bool normalize);
  torch::Tensor forward(torch::Tensor x);

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr}, skip_{nullptr};
  bool downsample_, normalize_, learned_skip_;
};
TORCH_MODULE(ResBlock);

/// Residual block with style-driven adaptive normalization; optional 2x
/// nearest-neighbour upsampling. Used in the generator decoder.
class AdainResBlockImpl : public torch::nn::Module {
 public:
  AdainResBlockImpl(int in_channels, int out_channels, int style_dim, bool upsample);
  torch::Tensor forward(torch::Tensor x, const torch::Tensor& style);

 private:
  AdaptiveInstanceNorm2d norm1_{nullptr}, norm2_{nullptr};
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr}, skip_{nullptr};
  bool upsample_, learned_skip_;
};
TORCH_MODULE(AdainResBlock);

/// Translation generator G(x, s): encoder-decoder with style injection via
/// adaptive normalization in the decoder. Fully convolutional; accepts any
/// spatial size divisible by 4. Output is tanh-bounded to [-1, 1] and keeps
/// the input shape.
class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(const NetworkShape& shape);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& style);

  int style_dim() const { return style_dim_; }
  int64_t forward_calls() const { return forward_calls_.load(); }
  void reset_forward_calls() { forward_calls_.store(0); }

 private:
  torch::nn::Conv2d stem_{nullptr}, to_rgb_{nullptr};
  ResBlock down1_{nullptr}, down2_{nullptr}, mid_{nullptr};
  AdainResBlock mid_ada_{nullptr}, up1_{nullptr}, up2_{nullptr};
  int style_dim_;
  std::atomic<int64_t> forward_calls_{0};
};
TORCH_MODULE(Generator);

/// Mapping network F(z, d): shared fully connected trunk with one output
/// head per domain. Deterministic given (z, d).
class MappingNetworkImpl : public torch::nn::Module {
 public:
  explicit MappingNetworkImpl(const NetworkShape& shape);
  /// z: (N, latent_dim); domains: (N,) int64 in [0, S). Returns (N, style_dim).
  torch::Tensor forward(const torch::Tensor& z, const torch::Tensor& domains);

  int latent_dim() const { return latent_dim_; }
  int num_domains() const { return num_domains_; }

 private:
  torch::nn::Sequential trunk_{nullptr};
  torch::nn::Linear heads_{nullptr};
  int latent_dim_, style_dim_, num_domains_;
};
TORCH_MODULE(MappingNetwork);

/// Style encoder E(x, d): convolutional trunk, global pooling, one output
/// head per domain.
class StyleEncoderImpl : public torch::nn::Module {
 public:
  explicit StyleEncoderImpl(const NetworkShape& shape);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& domains);

  int num_domains() const { return num_domains_; }
  int image_resolution() const { return image_resolution_; }

 private:
  torch::nn::Sequential trunk_{nullptr};
  torch::nn::Linear heads_{nullptr};
  int style_dim_, num_domains_, image_resolution_;
};
TORCH_MODULE(StyleEncoder);

/// Per-domain discriminator bank: shared convolutional trunk with S scalar
/// heads, so one pass scores an image against every source domain.
class DiscriminatorBankImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorBankImpl(const NetworkShape& shape);
  /// Logits for every domain head: (N, S).
  torch::Tensor forward_all(const torch::Tensor& x);
  /// Logit of the head selected per sample: (N,).
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& domains);

  int num_domains() const { return num_domains_; }

 private:
  torch::nn::Sequential trunk_{nullptr};
  torch::nn::Linear heads_{nullptr};
  int num_domains_;
};
TORCH_MODULE(DiscriminatorBank);

/// Small residual convnet classifier. No cross-sample normalization, so
/// per-sample outputs are batch-independent.
class ClassifierImpl : public torch::nn::Module {
 public:
  explicit ClassifierImpl(const NetworkShape& shape);
  torch::Tensor forward(const torch::Tensor& x);
  /// Penultimate (pooled) feature vector: (N, feature_dim).
  torch::Tensor features(const torch::Tensor& x);
  int feature_dim() const { return feature_dim_; }
  int num_classes() const { return num_classes_; }

 private:
  torch::nn::Sequential trunk_{nullptr};
  torch::nn::Linear head_{nullptr};
  int feature_dim_, num_classes_;
};
TORCH_MODULE(Classifier);

/// Fixed (never trained) convolutional feature extractor with deterministic
/// seeded weights, used by the perceptual structure loss.
class PerceptualExtractorImpl : public torch::nn::Module {
 public:
  explicit PerceptualExtractorImpl(uint64_t seed);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential net_{nullptr};
};
TORCH_MODULE(PerceptualExtractor);

/// Deterministically (re)initialises every conv/linear parameter from the
/// given generator, in registration order. Weights are He-normal, biases 0.
void init_parameters(torch::nn::Module& module, torch::Generator& rng);

int64_t parameter_count(const torch::nn::Module& module);

/// Hard copy of every parameter of `src` into `dst` (same architecture).
void copy_parameters(torch::nn::Module& dst, const torch::nn::Module& src);

/// dst <- decay * dst + (1 - decay) * src, parameter-wise.
void ema_update(torch::nn::Module& dst, const torch::nn::Module& src, double decay);

// ---------------------------------------------------------------------------
// Checked operation wrappers (the module-level contracts).
// ---------------------------------------------------------------------------

torch::Tensor map_latent(MappingNetwork& mapping, const torch::Tensor& z, int domain);
torch::Tensor encode_style(StyleEncoder& encoder, const torch::Tensor& x, int domain);
torch::Tensor translate(Generator& generator, const torch::Tensor& x, const torch::Tensor& style);
torch::Tensor discriminate(DiscriminatorBank& bank, const torch::Tensor& x, int domain);

/// The latent-guided fan-out: one fresh standard-normal latent per
/// (image, domain), mapped to styles, then S translated batches.
std::vector<torch::Tensor> translate_latent_guided(Generator& generator, MappingNetwork& mapping,
                                                   const torch::Tensor& x,
                                                   torch::Generator& rng);

/// Full translation model bundle (raw + EMA inference copies).
struct TranslationModel {
  NetworkShape shape;
  Generator generator{nullptr};
  MappingNetwork mapping{nullptr};
  StyleEncoder style_encoder{nullptr};
  DiscriminatorBank discriminators{nullptr};
  Generator generator_ema{nullptr};
  MappingNetwork mapping_ema{nullptr};
  StyleEncoder style_encoder_ema{nullptr};
};

TranslationModel build_translation_model(const NetworkShape& shape, torch::Generator& init_rng);

struct ClassifierModel {
  NetworkShape shape;
  Classifier net{nullptr};
};

ClassifierModel build_classifier_model(const NetworkShape& shape, torch::Generator& init_rng);

torch::Tensor domain_tensor(int domain, int64_t batch_size, int num_domains);

}  // namespace ttie
