// SPDX-License-Identifier: Apache-2.0

#include "dao2/dkd.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>

#include "dao2/errors.hpp"
#include "oracles/vandermonde.hpp"

namespace dao2 {
namespace {

DerivationTag counting_tag(std::uint8_t start) {
  DerivationTag t;
  for (std::size_t i = 0; i < kTagBytes; ++i) t.bytes[i] = static_cast<std::uint8_t>(start + i);
  return t;
}

// One DerivationState per receiver party, from a trusted-dealer sharing
// whose secret the test keeps.
struct Lineage {
  Scalar secret;
  std::vector<DerivationState> parties;
};

Lineage make_lineage(std::uint32_t n, std::uint32_t t, Rng& rng) {
  Lineage l;
  l.secret = random_scalar(rng);
  const ShareSet set = share_secret(l.secret, n, t, rng);
  const ChainCode cc = rng.bytes<32>();
  for (const auto& s : set.shares) {
    ShareSet mine = set;
    mine.shares = {s};
    l.parties.push_back(DerivationState::root(mine, cc));
  }
  return l;
}

// Golden values from Python's hmac/hashlib (tests/oracles/gen_vectors.py).
TEST(DeriveOffsetTest, GoldenVector) {
  const ChainCode zero_cc{};
  const auto d = derive_offset(GroupPoint::generator(), zero_cc, counting_tag(0));
  EXPECT_EQ(to_hex(d.offset.to_bytes()), "94084661d2b3235b7477f9d551391c262f2c4d6fe456174991120cd56f9885f2");
  EXPECT_EQ(to_hex(d.child_cc), "61027d0683cabe875e1c27d410c1f509bde4296ffa07b9743d7f630b96b9458d");

  const auto e = derive_offset(GroupPoint::generator(), zero_cc, counting_tag(1));
  EXPECT_EQ(to_hex(e.offset.to_bytes()), "1a49b60f750df52ac30b18597aaeace8bcbe8e7545421431bcd8b1e95450d092");
  EXPECT_EQ(to_hex(e.child_cc), "6b84fc85e17340c55308ca93cf689e5470055c20d34b34c9f7d2ff118682341e");
  EXPECT_NE(d.offset, e.offset);
}

TEST(DeriveOffsetTest, Deterministic) {
  DeterministicRng rng(30);
  const GroupPoint p = base_mul(random_scalar(rng));
  const ChainCode cc = rng.bytes<32>();
  const auto tag = DerivationTag::random(rng);
  const auto a = derive_offset(p, cc, tag);
  const auto b = derive_offset(p, cc, tag);
  EXPECT_EQ(a.offset, b.offset);
  EXPECT_EQ(a.child_cc, b.child_cc);
  EXPECT_THROW(derive_offset(GroupPoint::identity(), cc, tag), DomainError);
}

TEST(DeriveChildTest, PublicDerivationRelations) {
  DeterministicRng rng(31);
  Lineage l = make_lineage(3, 2, rng);
  const DerivationState& parent = l.parties[0];
  const auto tag = DerivationTag::random(rng);

  const ChildPublic child = derive_child_public(parent, tag);
  EXPECT_EQ(child.child_pub - parent.aggregate_pub(), base_mul(child.offset));

  const ChildPublic again = derive_child_public(parent.public_view(), tag);
  EXPECT_EQ(again.child_pub, child.child_pub);
  EXPECT_EQ(again.child_cc, child.child_cc);

  const DerivationState zero_step = derive_child_share(parent, Scalar::zero(), parent.chaincode());
  EXPECT_EQ(zero_step.aggregate_pub(), parent.aggregate_pub());
  EXPECT_EQ(zero_step.my_share()->value, parent.my_share()->value);
}

TEST(DeriveChildTest, ConsumedTagIsRejected) {
  DeterministicRng rng(32);
  Lineage l = make_lineage(3, 2, rng);
  const auto tag = DerivationTag::random(rng);
  const DerivationState used = l.parties[0].with_consumed(tag);
  EXPECT_THROW(derive_child_public(used, tag), TagConsumed);
  EXPECT_FALSE(l.parties[0].is_consumed(tag));
  EXPECT_NO_THROW(derive_child_public(used, DerivationTag::random(rng)));
}

TEST(DeriveChildTest, ParentIsUntouched) {
  DeterministicRng rng(33);
  Lineage l = make_lineage(3, 2, rng);
  const Bytes before = l.parties[1].serialize();
  const DerivationState child = derive_child(l.parties[1], DerivationTag::random(rng));
  EXPECT_EQ(l.parties[1].serialize(), before);
  EXPECT_EQ(child.epoch(), 1u);
}

TEST(DeriveChildTest, SharesStayConsistentAcrossConfigurations) {
  DeterministicRng rng(34);
  for (auto [n, t] : {std::pair{1u, 1u}, {3u, 2u}, {5u, 2u}, {7u, 3u}}) {
    Lineage l = make_lineage(n, t, rng);
    Scalar secret = l.secret;
    for (int step = 0; step < 3; ++step) {
      const auto tag = DerivationTag::random(rng);
      const ChildPublic c = derive_child_public(l.parties[0].public_view(), tag);
      secret += c.offset;
      for (auto& p : l.parties) p = derive_child_share(p, c.offset, c.child_cc).with_consumed(tag);

      for (const auto& p : l.parties) {
        ASSERT_TRUE(p.same_public_state(l.parties[0]));
        ASSERT_EQ(base_mul(p.my_share()->value), p.public_share(p.my_share()->index));
      }
      ASSERT_EQ(l.parties[0].aggregate_pub(), base_mul(secret));
      for (const auto& s : oracle::subsets_at_least(n, t)) {
        std::vector<Share> shares;
        std::vector<GroupPoint> pubs;
        for (auto j : s) {
          shares.push_back(*l.parties[j - 1].my_share());
          pubs.push_back(l.parties[0].public_share(j));
        }
        ASSERT_EQ(reconstruct(shares), secret);
        ASSERT_EQ(reconstruct_in_exponent(s, pubs), l.parties[0].aggregate_pub());
      }
    }
  }
}

TEST(DeriveChildTest, DepthThousandChainAgreesAndStaysFlat) {
  DeterministicRng rng(35);
  Lineage l = make_lineage(7, 2, rng);
  const GroupPoint root_pub = l.parties[0].aggregate_pub();

  auto time_step = [&](const DerivationState& state) {
    std::vector<double> samples;
    for (int r = 0; r < 31; ++r) {
      const auto tag = DerivationTag::random(rng);
      const auto t0 = std::chrono::steady_clock::now();
      const ChildPublic c = derive_child_public(state, tag);
      const DerivationState next = derive_child_share(state, c.offset, c.child_cc);
      const auto t1 = std::chrono::steady_clock::now();
      EXPECT_EQ(next.epoch(), state.epoch() + 1);
      samples.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
    std::nth_element(samples.begin(), samples.begin() + 15, samples.end());
    return samples[15];
  };

  const double shallow = time_step(l.parties[0]);
  for (int depth = 1; depth < 1000; ++depth) {
    const auto tag = DerivationTag::random(rng);
    const ChildPublic c = derive_child_public(l.parties[0].public_view(), tag);
    for (auto& p : l.parties) p = derive_child_share(p, c.offset, c.child_cc).with_consumed(tag);
  }
  const double deep = time_step(l.parties[0]);

  for (const auto& p : l.parties) ASSERT_TRUE(p.same_public_state(l.parties[0]));
  EXPECT_EQ(l.parties[0].epoch(), 999u);
  EXPECT_EQ(l.parties[0].consumed_tags().size(), 999u);
  EXPECT_NE(l.parties[0].aggregate_pub(), root_pub);
  EXPECT_LE(std::max(shallow, deep) / std::min(shallow, deep), 2.0) << shallow << " vs " << deep;
}

}  // namespace
}  // namespace dao2
