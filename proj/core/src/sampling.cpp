#include "csmpc/sampling.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace csmpc {

void SamplerConfig::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("SamplerConfig: sigma must be >= 0");
  if (!(floor > 0.0 && floor < 1.0)) throw std::invalid_argument("SamplerConfig: floor outside (0,1)");
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::array<double, kNumUncertain>> draw_multipliers(const SamplerConfig& cfg,
                                                                std::uint64_t stream,
                                                                std::size_t count,
                                                                std::uint64_t first_index) {
  cfg.validate();
  std::vector<std::array<double, kNumUncertain>> out(count);
  const std::uint64_t stream_key = mix_seed(cfg.seed, stream);
  for (std::size_t k = 0; k < count; ++k) {
    std::mt19937_64 engine(mix_seed(stream_key, first_index + k));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& m : out[k]) m = std::max(1.0 + cfg.sigma * normal(engine), cfg.floor);
  }
  return out;
}

std::vector<UncertaintyVector> draw(const SamplerConfig& cfg, std::uint64_t stream, std::size_t count,
                                    std::uint64_t first_index) {
  const auto mult = draw_multipliers(cfg, stream, count, first_index);
  const UncertaintyVector nominal = nominal_parameters();
  std::vector<UncertaintyVector> out(count);
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t i = 0; i < kNumUncertain; ++i) out[k][i] = mult[k][i] * nominal[i];
  return out;
}

}  // namespace csmpc
