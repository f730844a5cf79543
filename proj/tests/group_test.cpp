// SPDX-License-Identifier: Apache-2.0

#include "dao2/group.hpp"

#include <gtest/gtest.h>
#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <memory>

#include "dao2/errors.hpp"
#include "dao2/rng.hpp"

namespace dao2 {
namespace {

Scalar scalar_hex(std::string_view hex) { return Scalar::from_bytes(from_hex(hex)); }

std::string point_hex(const GroupPoint& p) { return to_hex(p.to_bytes()); }

TEST(ScalarTest, AdditionIdentitiesAndInverse) {
  DeterministicRng rng(1);
  const Scalar x = random_scalar(rng);
  EXPECT_EQ(Scalar::zero() + x, x);
  EXPECT_TRUE((x + (Scalar::zero() - x)).is_zero());
  EXPECT_EQ(Scalar::one() + Scalar::one(), Scalar::from_u64(2));
}

TEST(ScalarTest, OrderMinusOneWrapsToZero) {
  const Scalar q_minus_1 =
      scalar_hex("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364140");
  EXPECT_TRUE((q_minus_1 + Scalar::one()).is_zero());
  EXPECT_EQ(q_minus_1 * q_minus_1, Scalar::one());
  EXPECT_EQ(-Scalar::one(), q_minus_1);
}

TEST(ScalarTest, MultiplicativeInverse) {
  EXPECT_EQ(Scalar::one().inverse(), Scalar::one());
  EXPECT_EQ(Scalar::from_u64(2).inverse() * Scalar::from_u64(2), Scalar::one());
  DeterministicRng rng(2);
  for (int i = 0; i < 200; ++i) {
    const Scalar a = random_scalar(rng);
    EXPECT_EQ(a * a.inverse(), Scalar::one());
  }
  EXPECT_THROW(Scalar::zero().inverse(), DomainError);
}

TEST(ScalarTest, CanonicalDecodeRejectsUnreduced) {
  EXPECT_THROW(scalar_hex("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141"), DecodeError);
  EXPECT_THROW(Scalar::from_bytes(Bytes(31, 0)), DecodeError);
  // Reducing decode of q itself is zero.
  EXPECT_TRUE(Scalar::from_bytes_reduce(
                  from_hex("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141"))
                  .is_zero());
}

TEST(ScalarTest, WideReductionMatchesRepeatedMultiplication) {
  // 2^256 mod q == 2^256 - q.
  Bytes wide(33, 0);
  wide[0] = 1;
  EXPECT_EQ(to_hex(Scalar::from_bytes_reduce(wide).to_bytes()),
            "000000000000000000000000000000014551231950b75fc4402da1732fc9bebf");
  Scalar two_256 = Scalar::one();
  for (int i = 0; i < 256; ++i) two_256 = two_256 + two_256;
  EXPECT_EQ(Scalar::from_bytes_reduce(wide), two_256);
}

TEST(ScalarTest, RoundTrip10000) {
  DeterministicRng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const Scalar a = random_scalar(rng);
    ASSERT_EQ(Scalar::from_bytes(a.to_bytes()), a);
  }
}

// Compressed encodings of kG produced by an independent affine-coordinate
// implementation (tests/oracles/gen_vectors.py).
TEST(GroupPointTest, GoldenMultiplesOfGenerator) {
  const std::pair<std::uint64_t, const char*> small[] = {
      {1, "0279be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798"},
      {2, "02c6047f9441ed7d6d3045406e95c07cd85c778e4b8cef3ca7abac09b95c709ee5"},
      {3, "02f9308a019258c31049344f85f89d5229b531c845836f99b08601f113bce036f9"},
      {7, "025cbdf0646e5db4eaa398f365f2ea7a0e3d419b7e0330e39ce92bddedcac4f9bc"},
      {0xdeadbeef, "0276d2fdf1302d1fa9556f4df94ec84cefba6d482e54f47c6c2a238c1baa560f0e"},
  };
  for (const auto& [k, hex] : small) {
    EXPECT_EQ(point_hex(base_mul(Scalar::from_u64(k))), hex) << k;
    EXPECT_EQ(point_hex(Scalar::from_u64(k) * GroupPoint::generator()), hex) << k;
  }
  const Scalar q_minus_1 =
      scalar_hex("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364140");
  EXPECT_EQ(point_hex(base_mul(q_minus_1)),
            "0379be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798");
  const Scalar big = scalar_hex("8000000000000000000000000000000000000000000000000000000000003039");
  EXPECT_EQ(point_hex(base_mul(big)),
            "03cdd1c738e14ebf6ca7b7aa795f5852110cf730f6553d425bfe53f14132052f1e");
}

TEST(GroupPointTest, IdentityBehaviour) {
  EXPECT_TRUE(base_mul(Scalar::zero()).is_identity());
  EXPECT_TRUE((Scalar::zero() * GroupPoint::generator()).is_identity());
  const GroupPoint g = GroupPoint::generator();
  EXPECT_TRUE((g - g).is_identity());
  EXPECT_EQ(g + GroupPoint::identity(), g);
  EXPECT_THROW(GroupPoint::identity().to_bytes(), DomainError);
  EXPECT_EQ(g + g, g.dbl());
}

TEST(GroupPointTest, HomomorphismAndCommutativity) {
  DeterministicRng rng(4);
  for (int i = 0; i < 200; ++i) {
    const Scalar a = random_scalar(rng);
    const Scalar b = random_scalar(rng);
    const GroupPoint p = base_mul(random_scalar(rng));
    EXPECT_EQ(base_mul(a) + base_mul(b), base_mul(a + b));
    EXPECT_EQ(a * base_mul(b), b * base_mul(a));
    EXPECT_EQ(a * base_mul(b), base_mul(a * b));
    EXPECT_EQ((a + b) * p, a * p + b * p);
  }
}

TEST(GroupPointTest, RoundTrip10000) {
  DeterministicRng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const GroupPoint p = base_mul(random_scalar(rng));
    const auto enc = p.to_bytes();
    ASSERT_EQ(GroupPoint::from_bytes(enc), p);
    ASSERT_EQ(GroupPoint::from_bytes(enc).to_bytes(), enc);
  }
}

TEST(GroupPointTest, DecodeRejectsNonCanonical) {
  auto enc = GroupPoint::generator().to_bytes();
  Bytes good(enc.begin(), enc.end());
  EXPECT_NO_THROW(GroupPoint::from_bytes(good));

  Bytes short_enc(good.begin(), good.end() - 1);
  EXPECT_THROW(GroupPoint::from_bytes(short_enc), DecodeError);

  for (std::uint8_t prefix : {0x00, 0x01, 0x04, 0x05, 0x06, 0x07}) {
    Bytes bad = good;
    bad[0] = prefix;
    EXPECT_THROW(GroupPoint::from_bytes(bad), DecodeError) << int(prefix);
  }

  // x = p is not a reduced field element.
  Bytes x_eq_p = from_hex("02fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2f");
  EXPECT_THROW(GroupPoint::from_bytes(x_eq_p), DecodeError);

  // x = 5: 5^3 + 7 = 132 is a non-residue mod p, so no curve point has x = 5.
  Bytes off_curve = from_hex("020000000000000000000000000000000000000000000000000000000000000005");
  EXPECT_THROW(GroupPoint::from_bytes(off_curve), DecodeError);
}

TEST(GroupPointTest, AgreesWithOpenSslOnRandomScalars) {
  std::unique_ptr<EC_GROUP, decltype(&EC_GROUP_free)> group(EC_GROUP_new_by_curve_name(NID_secp256k1),
                                                              &EC_GROUP_free);
  std::unique_ptr<BN_CTX, decltype(&BN_CTX_free)> ctx(BN_CTX_new(), &BN_CTX_free);
  std::unique_ptr<EC_POINT, decltype(&EC_POINT_free)> point(EC_POINT_new(group.get()), &EC_POINT_free);
  std::unique_ptr<BIGNUM, decltype(&BN_free)> k(BN_new(), &BN_free);
  ASSERT_TRUE(group && ctx && point && k);

  DeterministicRng rng(6);
  const GroupPoint base = base_mul(random_scalar(rng));
  const auto base_enc = base.to_bytes();
  std::unique_ptr<EC_POINT, decltype(&EC_POINT_free)> ossl_base(EC_POINT_new(group.get()), &EC_POINT_free);
  ASSERT_EQ(EC_POINT_oct2point(group.get(), ossl_base.get(), base_enc.data(), base_enc.size(), ctx.get()), 1);

  for (int i = 0; i < 100; ++i) {
    const Scalar s = random_scalar(rng);
    const auto s_enc = s.to_bytes();
    BN_bin2bn(s_enc.data(), static_cast<int>(s_enc.size()), k.get());

    std::array<std::uint8_t, 33> expected{};
    ASSERT_EQ(EC_POINT_mul(group.get(), point.get(), k.get(), nullptr, nullptr, ctx.get()), 1);
    ASSERT_EQ(EC_POINT_point2oct(group.get(), point.get(), POINT_CONVERSION_COMPRESSED, expected.data(),
                                 expected.size(), ctx.get()),
              expected.size());
    EXPECT_EQ(base_mul(s).to_bytes(), expected);

    ASSERT_EQ(EC_POINT_mul(group.get(), point.get(), nullptr, ossl_base.get(), k.get(), ctx.get()), 1);
    ASSERT_EQ(EC_POINT_point2oct(group.get(), point.get(), POINT_CONVERSION_COMPRESSED, expected.data(),
                                 expected.size(), ctx.get()),
              expected.size());
    EXPECT_EQ((s * base).to_bytes(), expected);
  }
}

// Golden values: SHA-256 computed with Python's hashlib, reduced mod q.
TEST(HashToScalarTest, GoldenVectors) {
  EXPECT_EQ(to_hex(hash_to_scalar({}).to_bytes()),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const std::uint8_t zero[] = {0x00};
  const std::uint8_t one[] = {0x01};
  EXPECT_EQ(to_hex(hash_to_scalar(zero).to_bytes()),
            "6e340b9cffb37a989ca544e6bb780a2c78901d3fb33738768511a30617afa01d");
  EXPECT_EQ(to_hex(hash_to_scalar(one).to_bytes()),
            "4bf5122f344554c53bde2ebb8cd2b7e3d1600ad631c385a5d7cce23c7785459a");
  EXPECT_NE(hash_to_scalar(zero), hash_to_scalar(one));
}

TEST(HashToScalarTest, DeterministicAndReduced) {
  DeterministicRng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto data = rng.bytes<40>();
    const Scalar h = hash_to_scalar(data);
    EXPECT_EQ(h, hash_to_scalar(data));
    // Canonical decode only accepts values < q.
    EXPECT_NO_THROW(Scalar::from_bytes(h.to_bytes()));
  }
}

}  // namespace
}  // namespace dao2
