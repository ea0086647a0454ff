#include "ttie/config.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ttie/error.hpp"
#include "ttie/rng.hpp"

namespace ttie {

std::string to_string(EnsembleStrategy s) {
  switch (s) {
    case EnsembleStrategy::naive: return "naive";
    case EnsembleStrategy::top_k: return "top_k";
    case EnsembleStrategy::weighted: return "weighted";
  }
  return "naive";
}

std::string to_string(AugmentationMode m) {
  switch (m) {
    case AugmentationMode::none: return "none";
    case AugmentationMode::stargan: return "stargan";
    case AugmentationMode::color_jitter: return "color_jitter";
    case AugmentationMode::geometric: return "geometric";
  }
  return "none";
}

std::string to_string(DomainKey k) {
  return k == DomainKey::metadata_column ? "metadata_column" : "subfolder";
}

EnsembleStrategy ensemble_strategy_from_string(const std::string& s) {
  if (s == "naive") return EnsembleStrategy::naive;
  if (s == "top_k") return EnsembleStrategy::top_k;
  if (s == "weighted") return EnsembleStrategy::weighted;
  fail(ErrorKind::config,
       "ensemble_strategy: expected naive|top_k|weighted, got '" + s + "'");
}

AugmentationMode augmentation_mode_from_string(const std::string& s) {
  if (s == "none") return AugmentationMode::none;
  if (s == "stargan") return AugmentationMode::stargan;
  if (s == "color_jitter") return AugmentationMode::color_jitter;
  if (s == "geometric") return AugmentationMode::geometric;
  fail(ErrorKind::config,
       "augmentation_mode: expected none|stargan|color_jitter|geometric, got '" + s + "'");
}

DomainKey domain_key_from_string(const std::string& s) {
  if (s == "metadata_column") return DomainKey::metadata_column;
  if (s == "subfolder") return DomainKey::subfolder;
  fail(ErrorKind::config, "domain_key: expected metadata_column|subfolder, got '" + s + "'");
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
T scalar_from(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(ErrorKind::config, "config key '" + key + "' has an invalid value");
  }
}

struct KeyReader {
  const YAML::Node& root;
  std::set<std::string> seen;

  bool has(const std::string& key) {
    seen.insert(key);
    return static_cast<bool>(root[key]);
  }
  template <typename T>
  void read(const std::string& key, T& out) {
    seen.insert(key);
    if (auto node = root[key]) out = scalar_from<T>(node, key);
  }
  void read_enum(const std::string& key, EnsembleStrategy& out) {
    seen.insert(key);
    if (auto node = root[key])
      out = ensemble_strategy_from_string(scalar_from<std::string>(node, key));
  }
  void read_enum(const std::string& key, AugmentationMode& out) {
    seen.insert(key);
    if (auto node = root[key])
      out = augmentation_mode_from_string(scalar_from<std::string>(node, key));
  }
  void read_enum(const std::string& key, DomainKey& out) {
    seen.insert(key);
    if (auto node = root[key])
      out = domain_key_from_string(scalar_from<std::string>(node, key));
  }
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::config, std::string("config parse failure: ") + e.what());
  }
  if (root.IsNull() || (root.IsScalar() && root.Scalar().empty())) root = YAML::Node(YAML::NodeType::Map);
  check(root.IsMap(), ErrorKind::config, "config must be a flat key/value mapping");

  ExperimentConfig cfg;
  KeyReader r{root, {}};

  r.read("run_id", cfg.run_id);
  r.read("seed", cfg.seed);
  r.read("deterministic", cfg.deterministic);
  r.read("num_threads", cfg.num_threads);

  r.read("image_resolution", cfg.image_resolution);
  r.read("num_source_domains", cfg.num_source_domains);
  r.read("num_classes", cfg.num_classes);
  r.read("latent_dim", cfg.latent_dim);
  r.read("style_dim", cfg.style_dim);

  r.read("lambda_adv", cfg.lambda_adv);
  r.read("lambda_cyc", cfg.lambda_cyc);
  r.read("lambda_ds", cfg.lambda_ds);
  r.read("lambda_percep", cfg.lambda_percep);
  r.read("lambda_sty", cfg.lambda_sty);
  r.read("lambda_gp", cfg.lambda_gp);

  r.read("translation_steps", cfg.translation_steps);
  r.read("translation_batch_size", cfg.translation_batch_size);
  r.read("learning_rate", cfg.learning_rate);
  r.read("ema_decay", cfg.ema_decay);
  r.read("use_ema_at_inference", cfg.use_ema_at_inference);
  r.read("diversity_decay", cfg.diversity_decay);
  r.read("base_channels", cfg.base_channels);

  r.read("classifier_steps", cfg.classifier_steps);
  r.read("classifier_batch_size", cfg.classifier_batch_size);
  r.read("classifier_channels", cfg.classifier_channels);
  r.read_enum("augmentation_mode", cfg.augmentation_mode);
  r.read("p_aug", cfg.p_aug);

  r.read_enum("ensemble_strategy", cfg.ensemble.strategy);
  if (r.has("ensemble_k")) {
    int k = 0;
    r.read("ensemble_k", k);
    cfg.ensemble.k = k;
  }
  if (r.has("ensemble_temperature")) {
    double t = 0;
    r.read("ensemble_temperature", t);
    cfg.ensemble.temperature = t;
  }

  r.read("dataset_root", cfg.dataset_root);
  r.read_enum("domain_key", cfg.domain_key);

  r.read("synthetic_train_domains", cfg.synthetic_train_domains);
  r.read("synthetic_target_domains", cfg.synthetic_target_domains);
  r.read("synthetic_train_per_domain", cfg.synthetic_train_per_domain);
  r.read("synthetic_id_val_per_domain", cfg.synthetic_id_val_per_domain);
  r.read("synthetic_ood_val_per_domain", cfg.synthetic_ood_val_per_domain);
  r.read("synthetic_ood_test_per_domain", cfg.synthetic_ood_test_per_domain);
  r.read("synthetic_shift_strength", cfg.synthetic_shift_strength);

  r.read("checkpoint_every", cfg.checkpoint_every);
  r.read("log_every", cfg.log_every);
  r.read("out_dir", cfg.out_dir);

  r.read("tta_views", cfg.tta_views);
  r.read("jitter_brightness", cfg.jitter_brightness);
  r.read("jitter_contrast", cfg.jitter_contrast);
  r.read("jitter_saturation", cfg.jitter_saturation);
  r.read("jitter_hue", cfg.jitter_hue);
  r.read("percep_extractor_seed", cfg.percep_extractor_seed);

  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    check(r.seen.count(key) > 0, ErrorKind::config, "unknown config key '" + key + "'");
  }

  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  check(in.good(), ErrorKind::io, "cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    check(ok, ErrorKind::validation, msg);
  };
  require(c.num_source_domains >= 2, "num_source_domains: need S >= 2");
  require(c.num_classes >= 2, "num_classes: need at least 2 classes");
  require(c.image_resolution > 0 && c.image_resolution % 8 == 0,
          "image_resolution must be a positive multiple of 8");
  require(c.latent_dim > 0, "latent_dim must be positive");
  require(c.style_dim > 0, "style_dim must be positive");

  auto weight_ok = [&](double v, const char* name) {
    require(std::isfinite(v) && v >= 0.0, std::string(name) + " must be a finite weight >= 0");
  };
  weight_ok(c.lambda_adv, "lambda_adv");
  weight_ok(c.lambda_cyc, "lambda_cyc");
  weight_ok(c.lambda_ds, "lambda_ds");
  weight_ok(c.lambda_percep, "lambda_percep");
  weight_ok(c.lambda_sty, "lambda_sty");
  weight_ok(c.lambda_gp, "lambda_gp");

  require(c.translation_steps > 0, "translation_steps must be > 0");
  require(c.classifier_steps > 0, "classifier_steps must be > 0");
  require(c.translation_batch_size > 0, "translation_batch_size must be > 0");
  require(c.classifier_batch_size > 0, "classifier_batch_size must be > 0");
  require(c.learning_rate > 0, "learning_rate must be > 0");
  require(c.ema_decay >= 0 && c.ema_decay < 1, "ema_decay must lie in [0, 1)");
  require(c.base_channels > 0, "base_channels must be > 0");
  require(c.classifier_channels > 0, "classifier_channels must be > 0");
  require(c.p_aug >= 0 && c.p_aug <= 1, "p_aug must lie in [0, 1]");
  require(c.checkpoint_every > 0, "checkpoint_every must be > 0");
  require(c.log_every > 0, "log_every must be > 0");
  require(c.num_threads >= 1, "num_threads must be >= 1");
  require(c.tta_views >= 1, "tta_views must be >= 1");
  require(c.jitter_brightness >= 0 && c.jitter_contrast >= 0 && c.jitter_saturation >= 0,
          "jitter magnitudes must be >= 0");
  require(c.jitter_hue >= 0 && c.jitter_hue <= 0.5, "jitter_hue must lie in [0, 0.5]");

  require(c.synthetic_train_domains >= 2, "synthetic_train_domains: need >= 2");
  require(c.synthetic_target_domains >= 1, "synthetic_target_domains: need >= 1");
  require(c.synthetic_shift_strength >= 0, "synthetic_shift_strength must be >= 0");

  // k / temperature present exactly when their strategy is selected.
  const auto& e = c.ensemble;
  if (e.strategy == EnsembleStrategy::top_k) {
    require(e.k.has_value(), "ensemble_k is required when ensemble_strategy = top_k");
    require(*e.k >= 1 && *e.k <= c.num_source_domains,
            "ensemble_k must lie in [1, num_source_domains]");
  } else {
    require(!e.k.has_value(), "ensemble_k is only valid when ensemble_strategy = top_k");
  }
  if (e.strategy == EnsembleStrategy::weighted) {
    require(e.temperature.has_value(),
            "ensemble_temperature is required when ensemble_strategy = weighted");
    require(std::isfinite(*e.temperature) && *e.temperature > 0,
            "ensemble_temperature must be a positive real");
  } else {
    require(!e.temperature.has_value(),
            "ensemble_temperature is only valid when ensemble_strategy = weighted");
  }
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "run_id: \"" << c.run_id << "\"\n";
  out << "seed: " << c.seed << "\n";
  out << "deterministic: " << (c.deterministic ? "true" : "false") << "\n";
  out << "num_threads: " << c.num_threads << "\n";
  out << "image_resolution: " << c.image_resolution << "\n";
  out << "num_source_domains: " << c.num_source_domains << "\n";
  out << "num_classes: " << c.num_classes << "\n";
  out << "latent_dim: " << c.latent_dim << "\n";
  out << "style_dim: " << c.style_dim << "\n";
  out << "lambda_adv: " << format_double(c.lambda_adv) << "\n";
  out << "lambda_cyc: " << format_double(c.lambda_cyc) << "\n";
  out << "lambda_ds: " << format_double(c.lambda_ds) << "\n";
  out << "lambda_percep: " << format_double(c.lambda_percep) << "\n";
  out << "lambda_sty: " << format_double(c.lambda_sty) << "\n";
  out << "lambda_gp: " << format_double(c.lambda_gp) << "\n";
  out << "translation_steps: " << c.translation_steps << "\n";
  out << "translation_batch_size: " << c.translation_batch_size << "\n";
  out << "learning_rate: " << format_double(c.learning_rate) << "\n";
  out << "ema_decay: " << format_double(c.ema_decay) << "\n";
  out << "use_ema_at_inference: " << (c.use_ema_at_inference ? "true" : "false") << "\n";
  out << "diversity_decay: " << (c.diversity_decay ? "true" : "false") << "\n";
  out << "base_channels: " << c.base_channels << "\n";
  out << "classifier_steps: " << c.classifier_steps << "\n";
  out << "classifier_batch_size: " << c.classifier_batch_size << "\n";
  out << "classifier_channels: " << c.classifier_channels << "\n";
  out << "augmentation_mode: " << to_string(c.augmentation_mode) << "\n";
  out << "p_aug: " << format_double(c.p_aug) << "\n";
  out << "ensemble_strategy: " << to_string(c.ensemble.strategy) << "\n";
  if (c.ensemble.k) out << "ensemble_k: " << *c.ensemble.k << "\n";
  if (c.ensemble.temperature)
    out << "ensemble_temperature: " << format_double(*c.ensemble.temperature) << "\n";
  out << "dataset_root: \"" << c.dataset_root << "\"\n";
  out << "domain_key: " << to_string(c.domain_key) << "\n";
  out << "synthetic_train_domains: " << c.synthetic_train_domains << "\n";
  out << "synthetic_target_domains: " << c.synthetic_target_domains << "\n";
  out << "synthetic_train_per_domain: " << c.synthetic_train_per_domain << "\n";
  out << "synthetic_id_val_per_domain: " << c.synthetic_id_val_per_domain << "\n";
  out << "synthetic_ood_val_per_domain: " << c.synthetic_ood_val_per_domain << "\n";
  out << "synthetic_ood_test_per_domain: " << c.synthetic_ood_test_per_domain << "\n";
  out << "synthetic_shift_strength: " << format_double(c.synthetic_shift_strength) << "\n";
  out << "checkpoint_every: " << c.checkpoint_every << "\n";
  out << "log_every: " << c.log_every << "\n";
  out << "out_dir: \"" << c.out_dir << "\"\n";
  out << "tta_views: " << c.tta_views << "\n";
  out << "jitter_brightness: " << format_double(c.jitter_brightness) << "\n";
  out << "jitter_contrast: " << format_double(c.jitter_contrast) << "\n";
  out << "jitter_saturation: " << format_double(c.jitter_saturation) << "\n";
  out << "jitter_hue: " << format_double(c.jitter_hue) << "\n";
  out << "percep_extractor_seed: " << c.percep_extractor_seed << "\n";
  return out.str();
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  check(out.good(), ErrorKind::io, "cannot write config file: " + path.string());
  out << serialize_config(config);
}

uint64_t config_hash(const ExperimentConfig& config) {
  return fnv1a64(serialize_config(config));
}

bool operator==(const EnsembleConfig& a, const EnsembleConfig& b) {
  return a.strategy == b.strategy && a.k == b.k && a.temperature == b.temperature;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace ttie
