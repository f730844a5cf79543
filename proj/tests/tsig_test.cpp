// SPDX-License-Identifier: Apache-2.0

#include "dao2/tsig.hpp"

#include <gtest/gtest.h>

#include "dao2/dkd.hpp"
#include "dao2/dsag.hpp"
#include "dao2/errors.hpp"
#include "oracles/vandermonde.hpp"

namespace dao2 {
namespace {

class CountingRng final : public Rng {
 public:
  explicit CountingRng(std::uint64_t seed) : inner_(seed) {}
  void fill(std::span<std::uint8_t> out) override {
    drawn += out.size();
    inner_.fill(out);
  }
  std::size_t drawn = 0;

 private:
  DeterministicRng inner_;
};

Bytes message_of(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::vector<PartyIndex> first_t(std::uint32_t t) {
  std::vector<PartyIndex> s;
  for (PartyIndex j = 1; j <= t; ++j) s.push_back(j);
  return s;
}

TEST(SignatureTest, EncodingRoundTrip) {
  DeterministicRng rng(60);
  const ShareSet keys = ts_keygen(1, 1, rng);
  const Bytes m = message_of("round trip");
  const Signature sig = ts_sign(m, keys, first_t(1), rng);
  const auto enc = sig.to_bytes();
  EXPECT_EQ(enc.size(), 65u);
  EXPECT_EQ(Signature::from_bytes(enc), sig);
  EXPECT_THROW(Signature::from_bytes(ByteView(enc.data(), 64)), DecodeError);

  auto bad = enc;
  std::fill(bad.begin() + kPointBytes, bad.end(), 0xff);
  EXPECT_THROW(Signature::from_bytes(bad), DecodeError);
  bad = enc;
  bad[0] = 0x05;
  EXPECT_THROW(Signature::from_bytes(bad), DecodeError);
}

TEST(KeygenTest, AggregateFromAnyQualifiedSubset) {
  DeterministicRng rng(61);
  const ShareSet keys = ts_keygen(3, 2, rng);
  ASSERT_EQ(keys.shares.size(), 3u);
  for (const auto& s : oracle::subsets_at_least(3, 2)) {
    std::vector<GroupPoint> pubs;
    for (auto j : s) pubs.push_back(keys.public_share(j));
    EXPECT_EQ(reconstruct_in_exponent(s, pubs), keys.aggregate);
  }
  for (const auto& s : keys.shares) EXPECT_EQ(base_mul(s.value), keys.public_share(s.index));
}

TEST(KeygenTest, SinglePartyIsPlainKeypair) {
  DeterministicRng rng(62);
  const ShareSet keys = ts_keygen(1, 1, rng);
  EXPECT_EQ(base_mul(keys.shares[0].value), keys.aggregate);
  EXPECT_EQ(keys.public_shares[0], keys.aggregate);
}

TEST(KeygenTest, ExcludedDealerStillYieldsUsableKeys) {
  DeterministicRng rng(63);
  const ShareSet keys = ts_keygen(5, 2, rng, [](DealtShare& s) {
    if (s.dealer == 3 && s.recipient == 1) s.value += Scalar::one();
  });
  const Bytes m = message_of("after exclusion");
  const std::vector<PartyIndex> t = {2, 5};
  EXPECT_TRUE(ts_verify(keys.aggregate, m, ts_sign(m, keys, t, rng)));
}

TEST(SignTest, EveryPairOfTwoOfThreeVerifies) {
  DeterministicRng rng(64);
  const ShareSet keys = ts_keygen(3, 2, rng);
  const Bytes m = message_of("pay 10 to D");
  for (const auto& s : oracle::subsets_at_least(3, 2)) {
    const Signature sig = ts_sign(m, keys, s, rng);
    EXPECT_TRUE(ts_verify(keys.aggregate, m, sig));
  }
}

TEST(SignTest, SingleSignerIsPlainSchnorr) {
  DeterministicRng rng(65);
  const ShareSet keys = ts_keygen(1, 1, rng);
  const Bytes m = message_of("solo");
  const Signature sig = ts_sign(m, keys, first_t(1), rng);
  EXPECT_TRUE(ts_verify(keys.aggregate, m, sig));
  const Scalar e = challenge(sig.r, keys.aggregate, m);
  EXPECT_EQ(base_mul(sig.s), sig.r + e * base_mul(keys.shares[0].value));
}

TEST(VerifyTest, Negatives) {
  DeterministicRng rng(66);
  const ShareSet keys = ts_keygen(3, 2, rng);
  Bytes m = message_of("exact message");
  const Signature sig = ts_sign(m, keys, first_t(2), rng);
  ASSERT_TRUE(ts_verify(keys.aggregate, m, sig));

  for (std::size_t bit = 0; bit < m.size() * 8; bit += 7) {
    Bytes flipped = m;
    flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    EXPECT_FALSE(ts_verify(keys.aggregate, flipped, sig));
  }
  const GroupPoint other = keys.aggregate + GroupPoint::generator();
  EXPECT_FALSE(ts_verify(other, m, sig));
  EXPECT_FALSE(ts_verify(GroupPoint::identity(), m, sig));
  Signature bad = sig;
  bad.s += Scalar::one();
  EXPECT_FALSE(ts_verify(keys.aggregate, m, bad));
}

TEST(SignTest, SubThresholdRejectedBeforeAnyNonce) {
  DeterministicRng setup(67);
  const ShareSet keys = ts_keygen(5, 3, setup);
  CountingRng rng(1);
  const Bytes m = message_of("too few");
  const std::vector<PartyIndex> two = {1, 2};
  EXPECT_THROW(ts_sign(m, keys, two, rng), SubThreshold);
  EXPECT_THROW(ts_sign(m, keys, std::vector<PartyIndex>{}, rng), SubThreshold);
  EXPECT_EQ(rng.drawn, 0u);

  const std::vector<PartyIndex> dup = {1, 2, 2};
  EXPECT_THROW(ts_sign(m, keys, dup, rng), DomainError);
  EXPECT_EQ(rng.drawn, 0u);
}

TEST(SignTest, CorruptedPartialNamesTheSigner) {
  DeterministicRng rng(68);
  const ShareSet keys = ts_keygen(7, 3, rng);
  const Bytes m = message_of("robust");
  const std::vector<PartyIndex> t = {2, 4, 6, 7};
  for (PartyIndex culprit : t) {
    try {
      ts_sign(m, keys, t, rng, [&](SignRound2& r) {
        if (r.index == culprit) r.response += Scalar::one();
      });
      FAIL() << "corrupted partial accepted";
    } catch (const MisbehavingSigner& e) {
      EXPECT_EQ(e.party(), culprit);
    }
  }
}

TEST(SignerSessionTest, NonceIsSingleUse) {
  DeterministicRng rng(69);
  const ShareSet keys = ts_keygen(3, 2, rng);
  SignerSession session(keys.shares[0], rng);
  const Scalar e = random_scalar(rng);
  const SignRound2 first = session.round2(e);
  check_partial(session.round1(), first, keys.public_share(1), e);
  EXPECT_TRUE(session.used());
  EXPECT_THROW(session.round2(e), NonceReused);
  EXPECT_THROW(session.round2(random_scalar(rng)), NonceReused);
}

TEST(SignTest, DerivedAndOneTimeKeysSignWithoutRekeying) {
  DeterministicRng rng(70);
  const ShareSet keys = ts_keygen(5, 2, rng);
  const Bytes m = message_of("derived");

  // DKD child: shift every share by the offset.
  const ChainCode cc = rng.bytes<32>();
  const DerivationState root = DerivationState::root(keys, cc);
  const ChildPublic child = derive_child_public(root, DerivationTag::random(rng));
  ShareSet child_keys = keys;
  for (auto& s : child_keys.shares) s.value += child.offset;
  for (auto& p : child_keys.public_shares) p += base_mul(child.offset);
  child_keys.aggregate = child.child_pub;
  const std::vector<PartyIndex> t = {1, 3};
  EXPECT_TRUE(ts_verify(child.child_pub, m, ts_sign(m, child_keys, t, rng)));

  // DSAG one-time key under D = B + ρG.
  const Scalar rho = stealth_offset(base_mul(random_scalar(rng)), StealthLabel::random(rng));
  ShareSet one_time = child_keys;
  for (auto& s : one_time.shares) s = Share{s.index, recover_one_time_share(s, rho).secret};
  for (auto& p : one_time.public_shares) p += base_mul(rho);
  one_time.aggregate = child.child_pub + base_mul(rho);
  const Signature sig = ts_sign(m, one_time, t, rng);
  EXPECT_TRUE(ts_verify(one_time.aggregate, m, sig));
  EXPECT_FALSE(ts_verify(child.child_pub, m, sig));
  EXPECT_FALSE(ts_verify(keys.aggregate, m, sig));
}

TEST(SignTest, CompletenessTenThousandRounds) {
  DeterministicRng rng(71);
  const std::vector<std::pair<std::uint32_t, std::uint32_t>> configs = {{1, 1}, {3, 2}, {5, 2}, {7, 3}, {20, 2}};
  int failures = 0;
  for (int round = 0; round < 10000; ++round) {
    const auto [n, t] = configs[round % configs.size()];
    const ShareSet keys = ts_keygen(n, t, rng);
    std::vector<PartyIndex> signers;
    for (PartyIndex j = 1; j <= n; ++j) signers.push_back(j);
    for (std::size_t k = signers.size(); k > 1; --k) std::swap(signers[k - 1], signers[rng.uniform(k)]);
    signers.resize(t + rng.uniform(n - t + 1));
    Bytes m(1 + rng.uniform(64));
    rng.fill(m);
    if (!ts_verify(keys.aggregate, m, ts_sign(m, keys, signers, rng))) ++failures;
  }
  EXPECT_EQ(failures, 0);
}

}  // namespace
}  // namespace dao2
