#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace ttie {

enum class EnsembleStrategy { naive, top_k, weighted };
enum class AugmentationMode { none, stargan, color_jitter, geometric };
enum class DomainKey { metadata_column, subfolder };

std::string to_string(EnsembleStrategy s);
std::string to_string(AugmentationMode m);
std::string to_string(DomainKey k);
EnsembleStrategy ensemble_strategy_from_string(const std::string& s);
AugmentationMode augmentation_mode_from_string(const std::string& s);
DomainKey domain_key_from_string(const std::string& s);

/// Strategy selector for prediction ensembling. k / temperature must be set
/// exactly when their strategy is selected.
struct EnsembleConfig {
  EnsembleStrategy strategy = EnsembleStrategy::naive;
  std::optional<int> k;
  std::optional<double> temperature;
};

/// Flat experiment configuration. Defaults follow the published training
/// recipe: all loss weights 1, style dimension 64, Adam with lr 1e-4.
struct ExperimentConfig {
  std::string run_id = "run";
  uint64_t seed = 17;
  bool deterministic = true;
  int num_threads = 1;

  int image_resolution = 64;
  int num_source_domains = 3;  // S
  int num_classes = 3;
  int latent_dim = 16;
  int style_dim = 64;

  double lambda_adv = 1.0;
  double lambda_cyc = 1.0;
  double lambda_ds = 1.0;
  double lambda_percep = 1.0;
  double lambda_sty = 1.0;
  double lambda_gp = 1.0;

  int translation_steps = 2000;
  int translation_batch_size = 4;
  double learning_rate = 1e-4;
  double ema_decay = 0.99;
  bool use_ema_at_inference = true;
  bool diversity_decay = false;
  int base_channels = 16;  // generator/encoder width knob

  int classifier_steps = 1000;
  int classifier_batch_size = 16;
  int classifier_channels = 16;
  AugmentationMode augmentation_mode = AugmentationMode::none;
  double p_aug = 0.5;

  EnsembleConfig ensemble;

  std::string dataset_root;
  DomainKey domain_key = DomainKey::metadata_column;

  int synthetic_train_domains = 3;
  int synthetic_target_domains = 2;
  int synthetic_train_per_domain = 200;
  int synthetic_id_val_per_domain = 50;
  int synthetic_ood_val_per_domain = 100;
  int synthetic_ood_test_per_domain = 200;
  double synthetic_shift_strength = 1.0;

  int checkpoint_every = 1000;
  int log_every = 50;
  std::string out_dir = "runs";

  int tta_views = 8;
  double jitter_brightness = 0.3;
  double jitter_contrast = 0.3;
  double jitter_saturation = 0.3;
  double jitter_hue = 0.1;  // fraction of a full hue turn, in [0, 0.5]
  uint64_t percep_extractor_seed = 902740161;
};

/// Parse + validate a flat YAML mapping. Unknown or ill-typed keys raise a
/// config error naming the key; invariant violations raise validation errors.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

/// Canonical serialization: fixed key order, full double precision, so that
/// serialize(parse(text)) parses back to an equal config.
std::string serialize_config(const ExperimentConfig& config);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

void validate(const ExperimentConfig& config);

/// FNV-1a of the canonical serialization; stamped into checkpoints so that
/// mismatched artifacts are rejected at load.
uint64_t config_hash(const ExperimentConfig& config);

bool operator==(const EnsembleConfig& a, const EnsembleConfig& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace ttie
