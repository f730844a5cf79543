// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>

#include "dao2/group.hpp"
#include "dao2/types.hpp"

namespace dao2 {

// Randomness source injected into every operation that samples.
class Rng {
 public:
  virtual ~Rng() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  template <std::size_t N>
  std::array<std::uint8_t, N> bytes() {
    std::array<std::uint8_t, N> out{};
    fill(out);
    return out;
  }
  std::uint64_t next_u64();
  // Uniform in [0, bound); bound > 0.
  std::uint64_t uniform(std::uint64_t bound);
};

// Reproducible stream: SHA-256(seed || counter) blocks.
class DeterministicRng final : public Rng {
 public:
  explicit DeterministicRng(std::uint64_t seed);
  DeterministicRng(std::uint64_t seed, std::string_view stream);
  void fill(std::span<std::uint8_t> out) override;

  // Independent child stream for a named consumer.
  DeterministicRng fork(std::string_view label);

 private:
  Digest32 key_{};
  std::uint64_t counter_ = 0;
  Digest32 block_{};
  std::size_t used_ = 32;
};

// Operating-system entropy.
class SystemRng final : public Rng {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// Uniform nonzero scalar by rejection sampling.
Scalar random_scalar(Rng& rng);

}  // namespace dao2
