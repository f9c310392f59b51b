#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace thlda {

// mt19937_64 with portable uniform/categorical draws, so a seed reproduces
// the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Index drawn proportionally to non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  // Index drawn proportionally to exp(log_weights); normalised by log-sum-exp.
  std::size_t categorical_log(std::span<const double> log_weights);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finaliser, used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

double log_sum_exp(std::span<const double> values);

}  // namespace thlda
