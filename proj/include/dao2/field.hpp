// SPDX-License-Identifier: Apache-2.0
//
// Arithmetic in the secp256k1 base field F_p, p = 2^256 - 2^32 - 977.
// Four 64-bit little-endian limbs, always fully reduced. Not constant time.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

namespace dao2 {

namespace detail {
using u128 = unsigned __int128;
}  // namespace detail

class FieldElement {
 public:
  using Limbs = std::array<std::uint64_t, 4>;

  // 2^256 - p
  static constexpr std::uint64_t kFold = 0x1000003D1ULL;
  static constexpr Limbs kModulus = {0xFFFFFFFEFFFFFC2FULL, 0xFFFFFFFFFFFFFFFFULL,
                                     0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL};

  constexpr FieldElement() = default;
  constexpr explicit FieldElement(const Limbs& limbs) : v_(limbs) {}

  static constexpr FieldElement from_u64(std::uint64_t x) { return FieldElement(Limbs{x, 0, 0, 0}); }

  // Rejects values >= p.
  static std::optional<FieldElement> from_bytes(std::span<const std::uint8_t, 32> be) {
    Limbs l{};
    for (int i = 0; i < 4; ++i) {
      std::uint64_t w = 0;
      for (int b = 0; b < 8; ++b) w = (w << 8) | be[static_cast<std::size_t>(i * 8 + b)];
      l[static_cast<std::size_t>(3 - i)] = w;
    }
    if (geq_modulus(l)) return std::nullopt;
    return FieldElement(l);
  }

  std::array<std::uint8_t, 32> to_bytes() const {
    std::array<std::uint8_t, 32> out{};
    for (int i = 0; i < 4; ++i) {
      std::uint64_t w = v_[static_cast<std::size_t>(3 - i)];
      for (int b = 7; b >= 0; --b) {
        out[static_cast<std::size_t>(i * 8 + b)] = static_cast<std::uint8_t>(w);
        w >>= 8;
      }
    }
    return out;
  }

  const Limbs& limbs() const { return v_; }
  bool is_zero() const { return (v_[0] | v_[1] | v_[2] | v_[3]) == 0; }
  bool is_odd() const { return (v_[0] & 1) != 0; }

  friend bool operator==(const FieldElement& a, const FieldElement& b) { return a.v_ == b.v_; }

  friend FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    Limbs r{};
    detail::u128 c = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      c += static_cast<detail::u128>(a.v_[i]) + b.v_[i];
      r[i] = static_cast<std::uint64_t>(c);
      c >>= 64;
    }
    if (c != 0 || geq_modulus(r)) add_fold(r);
    return FieldElement(r);
  }

  friend FieldElement operator-(const FieldElement& a, const FieldElement& b) {
    Limbs r{};
    std::uint64_t borrow = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const std::uint64_t bi = b.v_[i];
      const std::uint64_t d = a.v_[i] - bi - borrow;
      borrow = (a.v_[i] < bi || (a.v_[i] == bi && borrow)) ? 1 : 0;
      r[i] = d;
    }
    if (borrow) {
      // r + p mod 2^256 == r - kFold; r > kFold whenever a borrow occurred.
      std::uint64_t br = 0;
      const std::uint64_t d0 = r[0] - kFold;
      br = r[0] < kFold ? 1 : 0;
      r[0] = d0;
      for (std::size_t i = 1; i < 4 && br; ++i) {
        br = r[i] == 0 ? 1 : 0;
        r[i] -= 1;
      }
    }
    return FieldElement(r);
  }

  FieldElement operator-() const { return FieldElement() - *this; }

  friend FieldElement operator*(const FieldElement& a, const FieldElement& b) {
    std::uint64_t w[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < 4; ++i) {
      detail::u128 carry = 0;
      for (std::size_t j = 0; j < 4; ++j) {
        carry += static_cast<detail::u128>(a.v_[i]) * b.v_[j] + w[i + j];
        w[i + j] = static_cast<std::uint64_t>(carry);
        carry >>= 64;
      }
      w[i + 4] = static_cast<std::uint64_t>(carry);
    }
    return reduce_wide(w);
  }

  FieldElement square() const {
    const Limbs& a = v_;
    std::uint64_t w[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    // Off-diagonal products once, then doubled, then the squares added.
    for (std::size_t i = 0; i < 3; ++i) {
      detail::u128 carry = 0;
      for (std::size_t j = i + 1; j < 4; ++j) {
        carry += static_cast<detail::u128>(a[i]) * a[j] + w[i + j];
        w[i + j] = static_cast<std::uint64_t>(carry);
        carry >>= 64;
      }
      w[i + 4] = static_cast<std::uint64_t>(carry);
    }
    std::uint64_t top = 0;
    for (std::size_t k = 0; k < 8; ++k) {
      const std::uint64_t next = w[k] >> 63;
      w[k] = (w[k] << 1) | top;
      top = next;
    }
    detail::u128 carry = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const detail::u128 sq = static_cast<detail::u128>(a[i]) * a[i];
      carry += static_cast<detail::u128>(w[2 * i]) + static_cast<std::uint64_t>(sq);
      w[2 * i] = static_cast<std::uint64_t>(carry);
      carry >>= 64;
      carry += static_cast<detail::u128>(w[2 * i + 1]) + static_cast<std::uint64_t>(sq >> 64);
      w[2 * i + 1] = static_cast<std::uint64_t>(carry);
      carry >>= 64;
    }
    return reduce_wide(w);
  }
  FieldElement dbl() const { return *this + *this; }

  FieldElement pow(const Limbs& exponent) const {
    FieldElement result = from_u64(1);
    for (int i = 255; i >= 0; --i) {
      result = result.square();
      if ((exponent[static_cast<std::size_t>(i / 64)] >> (i % 64)) & 1) result = result * *this;
    }
    return result;
  }

  // Undefined (returns 0) for zero input.
  FieldElement inverse() const {
    constexpr Limbs kPMinus2 = {0xFFFFFFFEFFFFFC2DULL, 0xFFFFFFFFFFFFFFFFULL,
                                0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL};
    return pow(kPMinus2);
  }

  // p = 3 mod 4, so a root, when one exists, is a^((p+1)/4).
  std::optional<FieldElement> sqrt() const {
    constexpr Limbs kQuarter = {0xFFFFFFFFBFFFFF0CULL, 0xFFFFFFFFFFFFFFFFULL,
                                0xFFFFFFFFFFFFFFFFULL, 0x3FFFFFFFFFFFFFFFULL};
    FieldElement r = pow(kQuarter);
    if (r.square() == *this) return r;
    return std::nullopt;
  }

 private:
  static constexpr bool geq_modulus(const Limbs& r) {
    return r[3] == kModulus[3] && r[2] == kModulus[2] && r[1] == kModulus[1] && r[0] >= kModulus[0];
  }

  // r += kFold mod 2^256; only called when the true value is in [p, 2p).
  static constexpr void add_fold(Limbs& r) {
    detail::u128 c = static_cast<detail::u128>(r[0]) + kFold;
    r[0] = static_cast<std::uint64_t>(c);
    c >>= 64;
    for (std::size_t i = 1; i < 4 && c; ++i) {
      c += r[i];
      r[i] = static_cast<std::uint64_t>(c);
      c >>= 64;
    }
  }

  static FieldElement reduce_wide(const std::uint64_t w[8]) {
    Limbs r{};
    detail::u128 c = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      c += static_cast<detail::u128>(w[4 + i]) * kFold + w[i];
      r[i] = static_cast<std::uint64_t>(c);
      c >>= 64;
    }
    const std::uint64_t top = static_cast<std::uint64_t>(c);
    c = static_cast<detail::u128>(top) * kFold + r[0];
    r[0] = static_cast<std::uint64_t>(c);
    c >>= 64;
    for (std::size_t i = 1; i < 4; ++i) {
      c += r[i];
      r[i] = static_cast<std::uint64_t>(c);
      c >>= 64;
    }
    if (c != 0) add_fold(r);
    if (geq_modulus(r)) add_fold(r);
    return FieldElement(r);
  }

  Limbs v_{};
};

}  // namespace dao2
