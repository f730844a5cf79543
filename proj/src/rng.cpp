// SPDX-License-Identifier: Apache-2.0

#include "dao2/rng.hpp"

#include <openssl/rand.h>

#include <stdexcept>

#include "dao2/errors.hpp"
#include "dao2/hash.hpp"

namespace dao2 {

std::uint64_t Rng::next_u64() {
  auto b = bytes<8>();
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw DomainError("uniform bound must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    const std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

DeterministicRng::DeterministicRng(std::uint64_t seed) : DeterministicRng(seed, "") {}

DeterministicRng::DeterministicRng(std::uint64_t seed, std::string_view stream) {
  Bytes material;
  for (int i = 7; i >= 0; --i) material.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
  material.insert(material.end(), stream.begin(), stream.end());
  key_ = sha256(material);
}

void DeterministicRng::fill(std::span<std::uint8_t> out) {
  for (auto& byte : out) {
    if (used_ == block_.size()) {
      Bytes input(key_.begin(), key_.end());
      for (int i = 7; i >= 0; --i) input.push_back(static_cast<std::uint8_t>(counter_ >> (8 * i)));
      block_ = sha256(input);
      ++counter_;
      used_ = 0;
    }
    byte = block_[used_++];
  }
}

DeterministicRng DeterministicRng::fork(std::string_view label) {
  DeterministicRng child(0);
  Bytes material(key_.begin(), key_.end());
  const auto salt = bytes<16>();
  material.insert(material.end(), salt.begin(), salt.end());
  material.insert(material.end(), label.begin(), label.end());
  child.key_ = sha256(material);
  return child;
}

void SystemRng::fill(std::span<std::uint8_t> out) {
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw std::runtime_error("RAND_bytes failed");
  }
}

Scalar random_scalar(Rng& rng) {
  for (;;) {
    auto b = rng.bytes<32>();
    try {
      Scalar s = Scalar::from_bytes(b);
      if (!s.is_zero()) return s;
    } catch (const DecodeError&) {
      // >= q: resample
    }
  }
}

}  // namespace dao2
