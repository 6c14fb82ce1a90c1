#pragma once

// Seeded random number generation with a pinned algorithm, so that streams
// reproduce bit-exactly across runs, platforms and language ports.
//
//   generator        xoshiro256++ (Blackman & Vigna), state seeded with
//                    four successive splitmix64 outputs
//   bounded integer  Lemire multiply-shift with rejection (unbiased)
//   double           53 high bits of next_u64() scaled by 2^-53, in [0,1)
//   gaussian         Box-Muller on (1-u, v); the sine variate is cached
//   stream split     derive_seed(master, stream), see below

#include <array>
#include <cstdint>

namespace rankcorrect {

// splitmix64 finalizer; the documented 64-bit mixing hash of this project.
std::uint64_t mix64(std::uint64_t x);

// Seed for a derived stream: mix64(master ^ mix64(stream + 0x9E3779B97F4A7C15)).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream);

// Fixed stream indices used throughout the engine.
inline constexpr std::uint64_t kStreamModelInit = 1;
inline constexpr std::uint64_t kStreamTraining = 2;
inline constexpr std::uint64_t kStreamSplit = 3;
inline constexpr std::uint64_t kStreamSimulate = 4;
inline constexpr std::uint64_t kStreamSynthetic = 5;

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform integer in [0, bound); bound must be >= 1.
  std::uint64_t next_below(std::uint64_t bound);

  // Uniform double in [0, 1).
  double next_double();

  // Standard normal deviate.
  double next_gaussian();

 private:
  std::array<std::uint64_t, 4> state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rankcorrect
