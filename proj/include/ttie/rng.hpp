#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include <torch/torch.h>

namespace ttie {

uint64_t fnv1a64(std::string_view text);
uint64_t splitmix64(uint64_t state);

/// One master seed fans out into named, mutually independent streams
/// (data shuffling, latent sampling, weight init, ...). Test-time latent
/// draws are therefore reproducible no matter how much randomness training
/// consumed.
class SeedStreams {
 public:
  explicit SeedStreams(uint64_t master_seed) : master_(master_seed) {}

  uint64_t master() const noexcept { return master_; }

  uint64_t stream_seed(std::string_view name) const {
    return splitmix64(master_ ^ fnv1a64(name));
  }

  std::mt19937_64 make_engine(std::string_view name) const {
    return std::mt19937_64(stream_seed(name));
  }

  torch::Generator make_torch_generator(std::string_view name) const;

 private:
  uint64_t master_;
};

torch::Generator make_cpu_generator(uint64_t seed);

// mt19937_64 state round-trip, used by resumable training checkpoints.
std::string engine_state_to_string(const std::mt19937_64& engine);
std::mt19937_64 engine_state_from_string(const std::string& text);

}  // namespace ttie
