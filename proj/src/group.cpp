// SPDX-License-Identifier: Apache-2.0

#include "dao2/group.hpp"

#include <algorithm>
#include <vector>

#include "dao2/errors.hpp"
#include "dao2/hash.hpp"

namespace dao2 {
namespace {

using detail::u128;

// 2^256 - q
constexpr std::array<std::uint64_t, 3> kOrderFold = {0x402DA1732FC9BEBFULL, 0x4551231950B75FC4ULL, 0x1ULL};

bool geq_order(const Scalar::Limbs& r) {
  for (int i = 3; i >= 0; --i) {
    const auto k = static_cast<std::size_t>(i);
    if (r[k] != Scalar::kOrder[k]) return r[k] > Scalar::kOrder[k];
  }
  return true;
}

// r + (2^256 - q) mod 2^256, i.e. r - q when the true value is in [q, 2^257).
void add_order_fold(Scalar::Limbs& r) {
  u128 c = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    c += r[i];
    if (i < 3) c += kOrderFold[i];
    r[i] = static_cast<std::uint64_t>(c);
    c >>= 64;
  }
}

Scalar::Limbs load_be32(ByteView be) {
  Scalar::Limbs l{};
  for (std::size_t i = 0; i < 4; ++i) {
    std::uint64_t w = 0;
    for (std::size_t b = 0; b < 8; ++b) w = (w << 8) | be[i * 8 + b];
    l[3 - i] = w;
  }
  return l;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scalar

Scalar Scalar::from_u64(std::uint64_t v) {
  Limbs l{v, 0, 0, 0};
  return Scalar(l);
}

Scalar Scalar::from_bytes(ByteView be) {
  if (be.size() != kScalarBytes) throw DecodeError("scalar encoding must be 32 bytes");
  Limbs l = load_be32(be);
  if (geq_order(l)) throw DecodeError("scalar encoding is not reduced mod q");
  return Scalar(l);
}

Scalar Scalar::from_bytes_reduce(ByteView be) {
  if (be.size() > 64) throw DomainError("from_bytes_reduce accepts at most 64 bytes");
  std::uint64_t w[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t bit = 0;
  for (std::size_t i = be.size(); i-- > 0; bit += 8) {
    w[bit / 64] |= static_cast<std::uint64_t>(be[i]) << (bit % 64);
  }
  return reduce_wide(w);
}

Scalar::Encoding Scalar::to_bytes() const {
  Encoding out{};
  for (std::size_t i = 0; i < 4; ++i) {
    std::uint64_t w = v_[3 - i];
    for (std::size_t b = 8; b-- > 0;) {
      out[i * 8 + b] = static_cast<std::uint8_t>(w);
      w >>= 8;
    }
  }
  return out;
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  Scalar::Limbs r{};
  u128 c = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    c += static_cast<u128>(a.v_[i]) + b.v_[i];
    r[i] = static_cast<std::uint64_t>(c);
    c >>= 64;
  }
  if (c != 0 || geq_order(r)) add_order_fold(r);
  return Scalar(r);
}

Scalar operator-(const Scalar& a, const Scalar& b) {
  Scalar::Limbs r{};
  std::uint64_t borrow = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::uint64_t bi = b.v_[i];
    r[i] = a.v_[i] - bi - borrow;
    borrow = (a.v_[i] < bi || (a.v_[i] == bi && borrow)) ? 1 : 0;
  }
  if (borrow) {
    u128 c = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      c += static_cast<u128>(r[i]) + Scalar::kOrder[i];
      r[i] = static_cast<std::uint64_t>(c);
      c >>= 64;
    }
  }
  return Scalar(r);
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  std::uint64_t w[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < 4; ++i) {
    u128 carry = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      carry += static_cast<u128>(a.v_[i]) * b.v_[j] + w[i + j];
      w[i + j] = static_cast<std::uint64_t>(carry);
      carry >>= 64;
    }
    w[i + 4] = static_cast<std::uint64_t>(carry);
  }
  return Scalar::reduce_wide(w);
}

// Folds the high half down with 2^256 = (2^256 - q) mod q until it vanishes.
Scalar Scalar::reduce_wide(const std::uint64_t in[8]) {
  std::uint64_t w[8];
  std::copy(in, in + 8, w);
  while ((w[4] | w[5] | w[6] | w[7]) != 0) {
    std::uint64_t t[8] = {w[0], w[1], w[2], w[3], 0, 0, 0, 0};
    for (std::size_t i = 0; i < 4; ++i) {
      const std::uint64_t hi = w[4 + i];
      if (hi == 0) continue;
      u128 carry = 0;
      std::size_t k = i;
      for (std::size_t j = 0; j < 3; ++j, ++k) {
        carry += static_cast<u128>(hi) * kOrderFold[j] + t[k];
        t[k] = static_cast<std::uint64_t>(carry);
        carry >>= 64;
      }
      for (; carry != 0 && k < 8; ++k) {
        carry += t[k];
        t[k] = static_cast<std::uint64_t>(carry);
        carry >>= 64;
      }
    }
    std::copy(t, t + 8, w);
  }
  Limbs r{w[0], w[1], w[2], w[3]};
  while (geq_order(r)) add_order_fold(r);
  return Scalar(r);
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw DomainError("inverse of zero scalar");
  Limbs e = kOrder;
  e[0] -= 2;
  Scalar result = one();
  for (int i = 255; i >= 0; --i) {
    result = result * result;
    if ((e[static_cast<std::size_t>(i / 64)] >> (i % 64)) & 1) result = result * *this;
  }
  return result;
}

void Scalar::wipe() {
  secure_wipe({reinterpret_cast<std::uint8_t*>(v_.data()), sizeof(v_)});
}

// ---------------------------------------------------------------------------
// GroupPoint

namespace {

const FieldElement kCurveB = FieldElement::from_u64(7);

struct Affine {
  FieldElement x;
  FieldElement y;
};

}  // namespace

const GroupPoint& GroupPoint::generator() {
  static const GroupPoint g = [] {
    static constexpr std::array<std::uint8_t, 33> kG = {
        0x02, 0x79, 0xBE, 0x66, 0x7E, 0xF9, 0xDC, 0xBB, 0xAC, 0x55, 0xA0, 0x62, 0x95, 0xCE, 0x87, 0x0B, 0x07,
        0x02, 0x9B, 0xFC, 0xDB, 0x2D, 0xCE, 0x28, 0xD9, 0x59, 0xF2, 0x81, 0x5B, 0x16, 0xF8, 0x17, 0x98};
    return GroupPoint::from_bytes(kG);
  }();
  return g;
}

std::optional<GroupPoint> GroupPoint::try_from_bytes(ByteView data) {
  if (data.size() != kPointBytes) return std::nullopt;
  if (data[0] != 0x02 && data[0] != 0x03) return std::nullopt;
  auto x = FieldElement::from_bytes(std::span<const std::uint8_t, 32>(data.data() + 1, 32));
  if (!x) return std::nullopt;
  const FieldElement rhs = x->square() * *x + kCurveB;
  auto y = rhs.sqrt();
  if (!y) return std::nullopt;
  if (y->is_odd() != (data[0] == 0x03)) *y = -*y;
  return GroupPoint(*x, *y, FieldElement::from_u64(1));
}

GroupPoint GroupPoint::from_bytes(ByteView data) {
  auto p = try_from_bytes(data);
  if (!p) throw DecodeError("invalid compressed point encoding");
  return *p;
}

std::pair<FieldElement, FieldElement> GroupPoint::affine() const {
  if (is_identity()) throw DomainError("identity has no affine coordinates");
  const FieldElement zinv = z_.inverse();
  const FieldElement zinv2 = zinv.square();
  return {x_ * zinv2, y_ * zinv2 * zinv};
}

GroupPoint::Encoding GroupPoint::to_bytes() const {
  if (is_identity()) throw DomainError("identity point has no encoding");
  const auto [x, y] = affine();
  Encoding out{};
  out[0] = y.is_odd() ? 0x03 : 0x02;
  const auto xb = x.to_bytes();
  std::copy(xb.begin(), xb.end(), out.begin() + 1);
  return out;
}

bool operator==(const GroupPoint& a, const GroupPoint& b) {
  const bool ai = a.is_identity();
  const bool bi = b.is_identity();
  if (ai || bi) return ai == bi;
  const FieldElement az2 = a.z_.square();
  const FieldElement bz2 = b.z_.square();
  if (!(a.x_ * bz2 == b.x_ * az2)) return false;
  return a.y_ * bz2 * b.z_ == b.y_ * az2 * a.z_;
}

GroupPoint GroupPoint::operator-() const { return GroupPoint(x_, -y_, z_); }

GroupPoint GroupPoint::dbl() const {
  if (is_identity() || y_.is_zero()) return GroupPoint();
  const FieldElement a = x_.square();
  const FieldElement b = y_.square();
  const FieldElement c = b.square();
  const FieldElement d = ((x_ + b).square() - a - c).dbl();
  const FieldElement e = a.dbl() + a;
  const FieldElement f = e.square();
  const FieldElement x3 = f - d.dbl();
  const FieldElement y3 = e * (d - x3) - c.dbl().dbl().dbl();
  const FieldElement z3 = (y_ * z_).dbl();
  return GroupPoint(x3, y3, z3);
}

GroupPoint operator+(const GroupPoint& p, const GroupPoint& q) {
  if (p.is_identity()) return q;
  if (q.is_identity()) return p;
  const FieldElement z1z1 = p.z_.square();
  const FieldElement z2z2 = q.z_.square();
  const FieldElement u1 = p.x_ * z2z2;
  const FieldElement u2 = q.x_ * z1z1;
  const FieldElement s1 = p.y_ * q.z_ * z2z2;
  const FieldElement s2 = q.y_ * p.z_ * z1z1;
  const FieldElement h = u2 - u1;
  const FieldElement rr = s2 - s1;
  if (h.is_zero()) {
    if (rr.is_zero()) return p.dbl();
    return GroupPoint();
  }
  const FieldElement i = h.dbl().square();
  const FieldElement j = h * i;
  const FieldElement r = rr.dbl();
  const FieldElement v = u1 * i;
  const FieldElement x3 = r.square() - j - v.dbl();
  const FieldElement y3 = r * (v - x3) - (s1 * j).dbl();
  const FieldElement z3 = ((p.z_ + q.z_).square() - z1z1 - z2z2) * h;
  return GroupPoint(x3, y3, z3);
}

namespace {

// Jacobian coordinates of p plus an affine point.
void add_affine(FieldElement& x1, FieldElement& y1, FieldElement& z1, const Affine& q) {
  if (z1.is_zero()) {
    x1 = q.x;
    y1 = q.y;
    z1 = FieldElement::from_u64(1);
    return;
  }
  const FieldElement z1z1 = z1.square();
  const FieldElement u2 = q.x * z1z1;
  const FieldElement s2 = q.y * z1 * z1z1;
  const FieldElement h = u2 - x1;
  const FieldElement rr = s2 - y1;
  if (h.is_zero()) {
    if (rr.is_zero()) {
      // Doubling case; rare enough to route through the general path.
      const FieldElement a = x1.square();
      const FieldElement b = y1.square();
      const FieldElement c = b.square();
      const FieldElement d = ((x1 + b).square() - a - c).dbl();
      const FieldElement e = a.dbl() + a;
      const FieldElement x3 = e.square() - d.dbl();
      const FieldElement y3 = e * (d - x3) - c.dbl().dbl().dbl();
      z1 = (y1 * z1).dbl();
      x1 = x3;
      y1 = y3;
      return;
    }
    z1 = FieldElement();
    return;
  }
  const FieldElement hh = h.square();
  const FieldElement i = hh.dbl().dbl();
  const FieldElement j = h * i;
  const FieldElement r = rr.dbl();
  const FieldElement v = x1 * i;
  const FieldElement x3 = r.square() - j - v.dbl();
  const FieldElement y3 = r * (v - x3) - (y1 * j).dbl();
  const FieldElement z3 = (z1 + h).square() - z1z1 - hh;
  x1 = x3;
  y1 = y3;
  z1 = z3;
}

unsigned nibble(const Scalar& k, unsigned w) {
  return static_cast<unsigned>((k.limbs()[w / 16] >> ((w % 16) * 4)) & 0xF);
}

// table[w][d] = d * 16^w * G for d in 1..15.
using BaseTable = std::vector<std::array<Affine, 16>>;

const BaseTable& base_table() {
  static const BaseTable table = [] {
    BaseTable t(64);
    GroupPoint step = GroupPoint::generator();
    for (unsigned w = 0; w < 64; ++w) {
      GroupPoint acc = step;
      for (unsigned d = 1; d < 16; ++d) {
        const auto [x, y] = acc.affine();
        t[w][d] = Affine{x, y};
        acc += step;
      }
      step = acc;  // 16 * step
    }
    return t;
  }();
  return table;
}

}  // namespace

GroupPoint base_mul(const Scalar& k) {
  const BaseTable& table = base_table();
  FieldElement x, y, z;
  for (unsigned w = 0; w < 64; ++w) {
    const unsigned d = nibble(k, w);
    if (d != 0) add_affine(x, y, z, table[w][d]);
  }
  return GroupPoint(x, y, z);
}

GroupPoint operator*(const Scalar& k, const GroupPoint& p) {
  if (p.is_identity() || k.is_zero()) return GroupPoint();
  std::array<GroupPoint, 16> table;
  table[1] = p;
  table[2] = p.dbl();
  for (std::size_t i = 3; i < 16; ++i) table[i] = table[i - 1] + p;
  unsigned top = 64;
  while (top > 0 && nibble(k, top - 1) == 0) --top;
  GroupPoint acc;
  for (unsigned w = top; w-- > 0;) {
    for (int i = 0; i < 4; ++i) acc = acc.dbl();
    const unsigned d = nibble(k, w);
    if (d != 0) acc += table[d];
  }
  return acc;
}

Scalar hash_to_scalar(ByteView data) {
  const Digest32 h = sha256(data);
  return Scalar::from_bytes_reduce(h);
}

}  // namespace dao2
