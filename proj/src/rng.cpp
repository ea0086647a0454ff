#include "ttie/rng.hpp"

#include <sstream>

#include <ATen/CPUGeneratorImpl.h>

namespace ttie {

uint64_t fnv1a64(std::string_view text) {
  uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

uint64_t splitmix64(uint64_t state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

torch::Generator make_cpu_generator(uint64_t seed) {
  auto gen = at::detail::createCPUGenerator(seed);
  return gen;
}

torch::Generator SeedStreams::make_torch_generator(std::string_view name) const {
  return make_cpu_generator(stream_seed(name));
}

std::string engine_state_to_string(const std::mt19937_64& engine) {
  std::ostringstream out;
  out << engine;
  return out.str();
}

std::mt19937_64 engine_state_from_string(const std::string& text) {
  std::mt19937_64 engine;
  std::istringstream in(text);
  in >> engine;
  return engine;
}

}  // namespace ttie
