#include "ttie/networks.hpp"

#include <cmath>
#include <string>

#include "ttie/error.hpp"
#include "ttie/rng.hpp"

namespace F = torch::nn::functional;

namespace ttie {

namespace {

torch::Tensor instance_norm(const torch::Tensor& x) {
  return F::instance_norm(x, F::InstanceNormFuncOptions().eps(1e-5));
}

torch::Tensor lrelu(const torch::Tensor& x) { return F::leaky_relu(x, F::LeakyReLUFuncOptions(0.2)); }

torch::Tensor halve(const torch::Tensor& x) {
  return F::avg_pool2d(x, F::AvgPool2dFuncOptions(2));
}

torch::Tensor twice(const torch::Tensor& x) {
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .scale_factor(std::vector<double>{2.0, 2.0})
                               .mode(torch::kNearest));
}

torch::nn::Conv2d conv3x3(int in, int out) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).padding(1));
}

torch::nn::Conv2d conv1x1(int in, int out) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 1));
}

/// Per-sample head selection: all_heads (N, S*dim) -> (N, dim) rows picked
/// by the per-sample domain index.
torch::Tensor select_head(const torch::Tensor& all_heads, const torch::Tensor& domains,
                          int num_domains, int out_dim) {
  const auto n = all_heads.size(0);
  auto grouped = all_heads.view({n, num_domains, out_dim});
  auto index = domains.view({n, 1, 1}).expand({n, 1, out_dim});
  return grouped.gather(1, index).squeeze(1);
}

void check_domains(const torch::Tensor& domains, int num_domains, const char* who) {
  check(domains.dim() == 1 && domains.scalar_type() == torch::kInt64, ErrorKind::shape,
        std::string(who) + ": domain labels must be a 1-D int64 tensor");
  if (domains.numel() > 0) {
    const auto lo = domains.min().item<int64_t>();
    const auto hi = domains.max().item<int64_t>();
    check(lo >= 0 && hi < num_domains, ErrorKind::argument,
          std::string(who) + ": domain index out of range [0, " +
              std::to_string(num_domains) + ")");
  }
}

void check_image(const torch::Tensor& x, const char* who) {
  check(x.dim() == 4 && x.size(1) == 3, ErrorKind::shape,
        std::string(who) + ": expected an image batch of shape (N, 3, H, W)");
}

}  // namespace

NetworkShape NetworkShape::from_config(const ExperimentConfig& config) {
  NetworkShape s;
  s.image_resolution = config.image_resolution;
  s.style_dim = config.style_dim;
  s.latent_dim = config.latent_dim;
  s.num_domains = config.num_source_domains;
  s.num_classes = config.num_classes;
  s.base_channels = config.base_channels;
  s.classifier_channels = config.classifier_channels;
  return s;
}

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------

AdaptiveInstanceNorm2dImpl::AdaptiveInstanceNorm2dImpl(int style_dim, int channels)
    : channels_(channels) {
  affine_ = register_module("affine", torch::nn::Linear(style_dim, 2 * channels));
}

torch::Tensor AdaptiveInstanceNorm2dImpl::forward(const torch::Tensor& h,
                                                  const torch::Tensor& style) {
  auto stats = affine_->forward(style);  // (N, 2C)
  auto chunks = stats.chunk(2, 1);
  auto scale = chunks[0].unsqueeze(-1).unsqueeze(-1);
  auto shift = chunks[1].unsqueeze(-1).unsqueeze(-1);
  return (1.0 + scale) * instance_norm(h) + shift;
}

ResBlockImpl::ResBlockImpl(int in_channels, int out_channels, bool downsample, bool normalize)
    : downsample_(downsample), normalize_(normalize), learned_skip_(in_channels != out_channels) {
  conv1_ = register_module("conv1", conv3x3(in_channels, in_channels));
  conv2_ = register_module("conv2", conv3x3(in_channels, out_channels));
  if (learned_skip_) skip_ = register_module("skip", conv1x1(in_channels, out_channels));
}

torch::Tensor ResBlockImpl::forward(torch::Tensor x) {
  auto h = x;
  if (normalize_) h = instance_norm(h);
  h = conv1_->forward(lrelu(h));
  if (downsample_) h = halve(h);
  if (normalize_) h = instance_norm(h);
  h = conv2_->forward(lrelu(h));

  auto s = downsample_ ? halve(x) : x;
  if (learned_skip_) s = skip_->forward(s);
  return (h + s) / std::sqrt(2.0);
}

AdainResBlockImpl::AdainResBlockImpl(int in_channels, int out_channels, int style_dim,
                                     bool upsample)
    : upsample_(upsample), learned_skip_(in_channels != out_channels) {
  norm1_ = register_module("norm1", AdaptiveInstanceNorm2d(style_dim, in_channels));
  norm2_ = register_module("norm2", AdaptiveInstanceNorm2d(style_dim, out_channels));
  conv1_ = register_module("conv1", conv3x3(in_channels, out_channels));
  conv2_ = register_module("conv2", conv3x3(out_channels, out_channels));
  if (learned_skip_) skip_ = register_module("skip", conv1x1(in_channels, out_channels));
}

torch::Tensor AdainResBlockImpl::forward(torch::Tensor x, const torch::Tensor& style) {
  auto h = lrelu(norm1_->forward(x, style));
  if (upsample_) h = twice(h);
  h = conv1_->forward(h);
  h = conv2_->forward(lrelu(norm2_->forward(h, style)));

  auto s = upsample_ ? twice(x) : x;
  if (learned_skip_) s = skip_->forward(s);
  return (h + s) / std::sqrt(2.0);
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

GeneratorImpl::GeneratorImpl(const NetworkShape& shape) : style_dim_(shape.style_dim) {
  const int c = shape.base_channels;
  stem_ = register_module("stem", conv3x3(3, c));
  down1_ = register_module("down1", ResBlock(c, 2 * c, /*downsample=*/true, /*normalize=*/true));
  down2_ = register_module("down2", ResBlock(2 * c, 4 * c, true, true));
  mid_ = register_module("mid", ResBlock(4 * c, 4 * c, false, true));
  mid_ada_ = register_module("mid_ada", AdainResBlock(4 * c, 4 * c, shape.style_dim, false));
  up1_ = register_module("up1", AdainResBlock(4 * c, 2 * c, shape.style_dim, /*upsample=*/true));
  up2_ = register_module("up2", AdainResBlock(2 * c, c, shape.style_dim, true));
  to_rgb_ = register_module("to_rgb", conv1x1(c, 3));
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& x, const torch::Tensor& style) {
  check_image(x, "generator");
  check(x.size(2) % 4 == 0 && x.size(3) % 4 == 0, ErrorKind::shape,
        "generator: spatial size must be divisible by 4");
  check(style.dim() == 2 && style.size(0) == x.size(0) && style.size(1) == style_dim_,
        ErrorKind::shape,
        "generator: style must be (N, " + std::to_string(style_dim_) + ")");
  forward_calls_.fetch_add(1, std::memory_order_relaxed);

  auto h = stem_->forward(x);
  h = down1_->forward(h);
  h = down2_->forward(h);
  h = mid_->forward(h);
  h = mid_ada_->forward(h, style);
  h = up1_->forward(h, style);
  h = up2_->forward(h, style);
  return torch::tanh(to_rgb_->forward(lrelu(instance_norm(h))));
}

// ---------------------------------------------------------------------------
// Mapping network
// ---------------------------------------------------------------------------

MappingNetworkImpl::MappingNetworkImpl(const NetworkShape& shape)
    : latent_dim_(shape.latent_dim), style_dim_(shape.style_dim), num_domains_(shape.num_domains) {
  const int hidden = 128;
  trunk_ = register_module("trunk", torch::nn::Sequential(torch::nn::Linear(latent_dim_, hidden),
                                                          torch::nn::ReLU(),
                                                          torch::nn::Linear(hidden, hidden),
                                                          torch::nn::ReLU()));
  heads_ = register_module("heads", torch::nn::Linear(hidden, num_domains_ * style_dim_));
}

torch::Tensor MappingNetworkImpl::forward(const torch::Tensor& z, const torch::Tensor& domains) {
  check(z.dim() == 2 && z.size(1) == latent_dim_, ErrorKind::shape,
        "mapping network: latent must be (N, " + std::to_string(latent_dim_) + ")");
  check_domains(domains, num_domains_, "mapping network");
  check(domains.size(0) == z.size(0), ErrorKind::shape,
        "mapping network: one domain label per latent");
  auto h = trunk_->forward(z);
  return select_head(heads_->forward(h), domains, num_domains_, style_dim_);
}

// ---------------------------------------------------------------------------
// Style encoder
// ---------------------------------------------------------------------------

namespace {

torch::nn::Sequential conv_trunk(int base_channels) {
  using torch::nn::Functional;
  const int c = base_channels;
  return torch::nn::Sequential(
      conv3x3(3, c), ResBlock(c, 2 * c, true, false), ResBlock(2 * c, 4 * c, true, false),
      ResBlock(4 * c, 4 * c, true, false), Functional(lrelu),
      torch::nn::AdaptiveAvgPool2d(torch::nn::AdaptiveAvgPool2dOptions(1)), torch::nn::Flatten());
}

}  // namespace

StyleEncoderImpl::StyleEncoderImpl(const NetworkShape& shape)
    : style_dim_(shape.style_dim),
      num_domains_(shape.num_domains),
      image_resolution_(shape.image_resolution) {
  trunk_ = register_module("trunk", conv_trunk(shape.base_channels));
  heads_ = register_module("heads",
                           torch::nn::Linear(4 * shape.base_channels, num_domains_ * style_dim_));
}

torch::Tensor StyleEncoderImpl::forward(const torch::Tensor& x, const torch::Tensor& domains) {
  check_image(x, "style encoder");
  check(x.size(2) == image_resolution_ && x.size(3) == image_resolution_, ErrorKind::shape,
        "style encoder: expected the configured resolution " +
            std::to_string(image_resolution_) + "x" + std::to_string(image_resolution_));
  check_domains(domains, num_domains_, "style encoder");
  check(domains.size(0) == x.size(0), ErrorKind::shape, "style encoder: one domain per image");
  auto h = trunk_->forward(x);
  return select_head(heads_->forward(h), domains, num_domains_, style_dim_);
}

// ---------------------------------------------------------------------------
// Discriminator bank
// ---------------------------------------------------------------------------

DiscriminatorBankImpl::DiscriminatorBankImpl(const NetworkShape& shape)
    : num_domains_(shape.num_domains) {
  trunk_ = register_module("trunk", conv_trunk(shape.base_channels));
  heads_ = register_module("heads", torch::nn::Linear(4 * shape.base_channels, num_domains_));
}

torch::Tensor DiscriminatorBankImpl::forward_all(const torch::Tensor& x) {
  check_image(x, "discriminator");
  return heads_->forward(trunk_->forward(x));
}

torch::Tensor DiscriminatorBankImpl::forward(const torch::Tensor& x,
                                             const torch::Tensor& domains) {
  check_domains(domains, num_domains_, "discriminator");
  check(domains.size(0) == x.size(0), ErrorKind::shape, "discriminator: one domain per image");
  auto all = forward_all(x);  // (N, S)
  return all.gather(1, domains.view({-1, 1})).squeeze(1);
}

// ---------------------------------------------------------------------------
// Classifier
// ---------------------------------------------------------------------------

ClassifierImpl::ClassifierImpl(const NetworkShape& shape) : num_classes_(shape.num_classes) {
  const int c = shape.classifier_channels;
  feature_dim_ = 4 * c;
  trunk_ = register_module(
      "trunk", torch::nn::Sequential(
                   conv3x3(3, c), ResBlock(c, 2 * c, true, false), ResBlock(2 * c, 4 * c, true, false),
                   ResBlock(4 * c, 4 * c, true, false), torch::nn::Functional(lrelu),
                   torch::nn::AdaptiveAvgPool2d(torch::nn::AdaptiveAvgPool2dOptions(1)),
                   torch::nn::Flatten()));
  head_ = register_module("head", torch::nn::Linear(feature_dim_, num_classes_));
}

torch::Tensor ClassifierImpl::features(const torch::Tensor& x) {
  check_image(x, "classifier");
  return trunk_->forward(x);
}

torch::Tensor ClassifierImpl::forward(const torch::Tensor& x) {
  return head_->forward(features(x));
}

// ---------------------------------------------------------------------------
// Perceptual extractor (fixed weights)
// ---------------------------------------------------------------------------

PerceptualExtractorImpl::PerceptualExtractorImpl(uint64_t seed) {
  net_ = register_module(
      "net", torch::nn::Sequential(
                 torch::nn::Conv2d(torch::nn::Conv2dOptions(3, 16, 3).stride(2).padding(1)),
                 torch::nn::Functional(lrelu),
                 torch::nn::Conv2d(torch::nn::Conv2dOptions(16, 32, 3).stride(2).padding(1)),
                 torch::nn::Functional(lrelu),
                 torch::nn::Conv2d(torch::nn::Conv2dOptions(32, 64, 3).stride(2).padding(1))));
  auto rng = make_cpu_generator(seed);
  init_parameters(*this, rng);
  for (auto& p : parameters()) p.set_requires_grad(false);
}

torch::Tensor PerceptualExtractorImpl::forward(const torch::Tensor& x) {
  check_image(x, "perceptual extractor");
  return net_->forward(x);
}

// ---------------------------------------------------------------------------
// Initialisation and parameter utilities
// ---------------------------------------------------------------------------

void init_parameters(torch::nn::Module& module, torch::Generator& rng) {
  torch::NoGradGuard no_grad;
  for (const auto& m : module.modules(/*include_self=*/false)) {
    if (auto* conv = m->as<torch::nn::Conv2d>()) {
      const auto w = conv->weight;
      const double fan_in = static_cast<double>(w.size(1) * w.size(2) * w.size(3));
      w.normal_(0.0, std::sqrt(2.0 / fan_in), rng);
      if (conv->bias.defined()) conv->bias.zero_();
    } else if (auto* linear = m->as<torch::nn::Linear>()) {
      const auto w = linear->weight;
      const double fan_in = static_cast<double>(w.size(1));
      w.normal_(0.0, std::sqrt(2.0 / fan_in), rng);
      if (linear->bias.defined()) linear->bias.zero_();
    }
  }
}

int64_t parameter_count(const torch::nn::Module& module) {
  int64_t total = 0;
  for (const auto& p : module.parameters()) total += p.numel();
  return total;
}

void copy_parameters(torch::nn::Module& dst, const torch::nn::Module& src) {
  torch::NoGradGuard no_grad;
  auto dst_params = dst.parameters();
  auto src_params = src.parameters();
  check(dst_params.size() == src_params.size(), ErrorKind::incompatibility,
        "copy_parameters: parameter lists differ");
  for (size_t i = 0; i < dst_params.size(); ++i) dst_params[i].copy_(src_params[i]);
}

void ema_update(torch::nn::Module& dst, const torch::nn::Module& src, double decay) {
  torch::NoGradGuard no_grad;
  auto dst_params = dst.parameters();
  auto src_params = src.parameters();
  check(dst_params.size() == src_params.size(), ErrorKind::incompatibility,
        "ema_update: parameter lists differ");
  for (size_t i = 0; i < dst_params.size(); ++i)
    dst_params[i].mul_(decay).add_(src_params[i], 1.0 - decay);
}

// ---------------------------------------------------------------------------
// Checked operation wrappers
// ---------------------------------------------------------------------------

torch::Tensor domain_tensor(int domain, int64_t batch_size, int num_domains) {
  check(domain >= 0 && domain < num_domains, ErrorKind::argument,
        "domain index " + std::to_string(domain) + " out of range [0, " +
            std::to_string(num_domains) + ")");
  return torch::full({batch_size}, domain, torch::kInt64);
}

torch::Tensor map_latent(MappingNetwork& mapping, const torch::Tensor& z, int domain) {
  auto zz = z.dim() == 1 ? z.unsqueeze(0) : z;
  check(zz.isfinite().all().item<bool>(), ErrorKind::numerical, "map_latent: non-finite latent");
  auto d = domain_tensor(domain, zz.size(0), mapping->num_domains());
  return mapping->forward(zz, d);
}

torch::Tensor encode_style(StyleEncoder& encoder, const torch::Tensor& x, int domain) {
  auto d = domain_tensor(domain, x.size(0), encoder->num_domains());
  return encoder->forward(x, d);
}

torch::Tensor translate(Generator& generator, const torch::Tensor& x, const torch::Tensor& style) {
  auto s = style.dim() == 1 ? style.unsqueeze(0).expand({x.size(0), style.size(0)}) : style;
  return generator->forward(x, s);
}

torch::Tensor discriminate(DiscriminatorBank& bank, const torch::Tensor& x, int domain) {
  auto d = domain_tensor(domain, x.size(0), bank->num_domains());
  return bank->forward(x, d);
}

std::vector<torch::Tensor> translate_latent_guided(Generator& generator, MappingNetwork& mapping,
                                                   const torch::Tensor& x,
                                                   torch::Generator& rng) {
  const int S = mapping->num_domains();
  const auto n = x.size(0);
  std::vector<torch::Tensor> out;
  out.reserve(S);
  for (int d = 0; d < S; ++d) {
    auto z = torch::randn({n, mapping->latent_dim()}, rng, torch::kFloat32);
    auto style = mapping->forward(z, domain_tensor(d, n, S));
    out.push_back(generator->forward(x, style));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model bundles
// ---------------------------------------------------------------------------

TranslationModel build_translation_model(const NetworkShape& shape, torch::Generator& init_rng) {
  TranslationModel model;
  model.shape = shape;
  model.generator = Generator(shape);
  model.mapping = MappingNetwork(shape);
  model.style_encoder = StyleEncoder(shape);
  model.discriminators = DiscriminatorBank(shape);
  init_parameters(*model.generator, init_rng);
  init_parameters(*model.mapping, init_rng);
  init_parameters(*model.style_encoder, init_rng);
  init_parameters(*model.discriminators, init_rng);

  model.generator_ema = Generator(shape);
  model.mapping_ema = MappingNetwork(shape);
  model.style_encoder_ema = StyleEncoder(shape);
  copy_parameters(*model.generator_ema, *model.generator);
  copy_parameters(*model.mapping_ema, *model.mapping);
  copy_parameters(*model.style_encoder_ema, *model.style_encoder);
  return model;
}

ClassifierModel build_classifier_model(const NetworkShape& shape, torch::Generator& init_rng) {
  ClassifierModel model;
  model.shape = shape;
  model.net = Classifier(shape);
  init_parameters(*model.net, init_rng);
  return model;
}

}  // namespace ttie
