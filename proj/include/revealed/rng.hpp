#pragma once

#include <cstdint>
#include <random>

namespace revealed {

// Seeded generator with a fully specified bit stream (std::mt19937_64 is
// pinned by the standard). Uniforms are built from the raw 64-bit output and
// Gaussians by inverse CDF, so a given seed reproduces the same draws on any
// platform; no distribution adapters from <random> are used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via the quantile transform.
  double gaussian();

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// Deterministic stream splitting: mixes a master seed with a stream index so
// parallel tasks get independent, reproducible generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace revealed
