#pragma once

#include <cstdint>
#include <vector>

#include "csmpc/model.hpp"

namespace csmpc {

struct SamplerConfig {
  double sigma = 0.2;   // standard deviation of the multiplicative perturbation
  std::uint64_t seed = 0;
  double floor = 0.05;  // lower clamp on the multiplier 1 + nu

  void validate() const;
};

/// Stream identifiers. Evaluation scenarios and buffer feeds never share a
/// stream.
inline constexpr std::uint64_t kEvaluationStream = 0;
inline constexpr std::uint64_t kBufferStreamBase = std::uint64_t{1} << 32;

/// Draws `count` uncertainty vectors w_i = max(1 + nu_i, floor) * nominal_i,
/// nu_i ~ N(0, sigma^2) independent. Vector k of the result is a pure function
/// of (seed, stream, first_index + k).
std::vector<UncertaintyVector> draw(const SamplerConfig& cfg, std::uint64_t stream, std::size_t count,
                                    std::uint64_t first_index = 0);

/// The multipliers behind draw(), exposed for moment checks.
std::vector<std::array<double, kNumUncertain>> draw_multipliers(const SamplerConfig& cfg,
                                                                std::uint64_t stream,
                                                                std::size_t count,
                                                                std::uint64_t first_index = 0);

/// SplitMix64 finalizer, used to derive independent engine seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace csmpc
