// SPDX-License-Identifier: Apache-2.0
//
// Prime-order group arithmetic on secp256k1: scalars mod the group order q
// and curve points, with the canonical encodings used on the wire
// (32-byte big-endian scalars, 33-byte compressed SEC1 points).

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "dao2/field.hpp"
#include "dao2/types.hpp"

namespace dao2 {

inline constexpr std::size_t kScalarBytes = 32;
inline constexpr std::size_t kPointBytes = 33;

class Scalar {
 public:
  using Limbs = std::array<std::uint64_t, 4>;
  using Encoding = std::array<std::uint8_t, kScalarBytes>;

  static constexpr Limbs kOrder = {0xBFD25E8CD0364141ULL, 0xBAAEDCE6AF48A03BULL,
                                   0xFFFFFFFFFFFFFFFEULL, 0xFFFFFFFFFFFFFFFFULL};

  constexpr Scalar() = default;

  static Scalar zero() { return Scalar(); }
  static Scalar one() { return from_u64(1); }
  static Scalar from_u64(std::uint64_t v);

  // Canonical decode; throws DecodeError for wrong length or value >= q.
  static Scalar from_bytes(ByteView be);
  // Big-endian integer of any length, reduced mod q.
  static Scalar from_bytes_reduce(ByteView be);

  Encoding to_bytes() const;
  const Limbs& limbs() const { return v_; }
  bool is_zero() const { return (v_[0] | v_[1] | v_[2] | v_[3]) == 0; }

  friend bool operator==(const Scalar& a, const Scalar& b) { return a.v_ == b.v_; }
  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  Scalar operator-() const { return zero() - *this; }
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  // Throws DomainError for zero.
  Scalar inverse() const;

  // Overwrites the limbs with zeros in a way the optimizer keeps.
  void wipe();

 private:
  explicit Scalar(const Limbs& l) : v_(l) {}
  static Scalar reduce_wide(const std::uint64_t w[8]);

  Limbs v_{};
};

class GroupPoint {
 public:
  using Encoding = std::array<std::uint8_t, kPointBytes>;

  // The identity.
  GroupPoint() = default;

  static GroupPoint identity() { return GroupPoint(); }
  static const GroupPoint& generator();

  // Compressed SEC1 only. Throws DecodeError on wrong length, bad prefix,
  // x >= p, or x not on the curve. The identity has no encoding.
  static GroupPoint from_bytes(ByteView data);
  static std::optional<GroupPoint> try_from_bytes(ByteView data);

  // Throws DomainError for the identity.
  Encoding to_bytes() const;

  bool is_identity() const { return z_.is_zero(); }

  // Affine coordinates; throws DomainError for the identity.
  std::pair<FieldElement, FieldElement> affine() const;

  friend bool operator==(const GroupPoint& a, const GroupPoint& b);
  friend GroupPoint operator+(const GroupPoint& a, const GroupPoint& b);
  friend GroupPoint operator-(const GroupPoint& a, const GroupPoint& b) { return a + (-b); }
  GroupPoint operator-() const;
  GroupPoint& operator+=(const GroupPoint& o) { return *this = *this + o; }
  friend GroupPoint operator*(const Scalar& k, const GroupPoint& p);

  GroupPoint dbl() const;

 private:
  friend GroupPoint base_mul(const Scalar& k);
  GroupPoint(const FieldElement& x, const FieldElement& y, const FieldElement& z) : x_(x), y_(y), z_(z) {}

  // Jacobian coordinates; the identity has z == 0.
  FieldElement x_{};
  FieldElement y_{};
  FieldElement z_{};
};

// kG via a precomputed fixed-window table.
GroupPoint base_mul(const Scalar& k);

// SHA-256(data) as a big-endian integer, reduced mod q.
Scalar hash_to_scalar(ByteView data);

}  // namespace dao2
