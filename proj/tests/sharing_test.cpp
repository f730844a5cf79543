// SPDX-License-Identifier: Apache-2.0

#include "dao2/sharing.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "dao2/errors.hpp"
#include "oracles/vandermonde.hpp"

namespace dao2 {
namespace {

std::vector<Share> pick(const ShareSet& set, const std::vector<PartyIndex>& idx) {
  std::vector<Share> out;
  for (auto i : idx) out.push_back(set.share_of(i));
  return out;
}

TEST(LagrangeTest, AnalyticValues) {
  const PartyIndex single[] = {1};
  EXPECT_EQ(lagrange_coeff(1, single), Scalar::one());
  const PartyIndex pair[] = {1, 2};
  EXPECT_EQ(lagrange_coeff(1, pair), Scalar::from_u64(2));
  EXPECT_EQ(lagrange_coeff(2, pair), -Scalar::one());
  const PartyIndex triple[] = {1, 2, 3};
  EXPECT_EQ(lagrange_coeff(1, triple), Scalar::from_u64(3));
}

TEST(LagrangeTest, TripleRecoversConstantOfExplicitPolynomial) {
  DeterministicRng rng(10);
  const std::vector<Scalar> coeffs = {random_scalar(rng), random_scalar(rng), random_scalar(rng)};
  const PartyIndex set[] = {1, 2, 3};
  Scalar acc;
  for (PartyIndex i : set) acc += lagrange_coeff(i, set) * oracle::evaluate_direct(coeffs, i);
  EXPECT_EQ(acc, coeffs[0]);
}

TEST(LagrangeTest, RejectsBadSets) {
  const PartyIndex set[] = {1, 2};
  EXPECT_THROW(lagrange_coeff(3, set), DomainError);
  const PartyIndex dup[] = {1, 1};
  EXPECT_THROW(lagrange_coeff(1, dup), DomainError);
  const PartyIndex zero[] = {0, 1};
  EXPECT_THROW(lagrange_coeff(1, zero), DomainError);
}

TEST(LagrangeTest, CoefficientsSumToOne) {
  for (std::uint32_t n = 1; n <= 7; ++n) {
    for (const auto& s : oracle::subsets_at_least(n, 1)) {
      Scalar sum;
      for (const auto& l : lagrange_coeffs(s)) sum += l;
      ASSERT_EQ(sum, Scalar::one());
    }
  }
}

TEST(ShareSecretTest, ConstantPolynomialWhenThresholdIsOne) {
  DeterministicRng rng(11);
  const Scalar secret = random_scalar(rng);
  const ShareSet set = share_secret(secret, 4, 1, rng);
  for (const auto& s : set.shares) EXPECT_EQ(s.value, secret);
}

TEST(ShareSecretTest, TwoOfTwo) {
  DeterministicRng rng(12);
  const Scalar secret = random_scalar(rng);
  const ShareSet set = share_secret(secret, 2, 2, rng);
  EXPECT_EQ(reconstruct(set.shares), secret);
}

TEST(ShareSecretTest, InvalidThresholds) {
  DeterministicRng rng(13);
  EXPECT_THROW(share_secret(Scalar::one(), 3, 4, rng), DomainError);
  EXPECT_THROW(share_secret(Scalar::one(), 3, 0, rng), DomainError);
}

TEST(ShareSecretTest, EveryQualifiedSubsetReconstructs) {
  DeterministicRng rng(14);
  for (auto [n, t] : {std::pair{3u, 2u}, {5u, 3u}, {7u, 2u}}) {
    const Scalar secret = random_scalar(rng);
    const ShareSet set = share_secret(secret, n, t, rng);
    for (const auto& s : oracle::subsets_at_least(n, t)) {
      ASSERT_EQ(reconstruct(pick(set, s)), secret);
      std::vector<GroupPoint> pubs;
      for (auto i : s) pubs.push_back(set.public_share(i));
      ASSERT_EQ(reconstruct_in_exponent(s, pubs), set.aggregate);
    }
  }
}

TEST(ReconstructTest, SubThresholdMisses) {
  const Scalar secret = Scalar::from_u64(424242);
  const Polynomial poly({secret, Scalar::from_u64(17)});
  std::vector<Share> one{{2, poly.evaluate(Scalar::from_u64(2))}};
  EXPECT_NE(reconstruct(one), secret);
}

TEST(ReconstructTest, OrderIndependentAndRejectsDuplicates) {
  DeterministicRng rng(15);
  const Scalar secret = random_scalar(rng);
  const ShareSet set = share_secret(secret, 5, 3, rng);
  auto shares = pick(set, {1, 3, 5, 4});
  std::sort(shares.begin(), shares.end(), [](auto& a, auto& b) { return a.index > b.index; });
  EXPECT_EQ(reconstruct(shares), secret);
  shares.push_back(shares.front());
  EXPECT_THROW(reconstruct(shares), DomainError);
}

TEST(ReconstructTest, MatchesVandermondeOracle) {
  DeterministicRng rng(16);
  for (std::uint32_t n = 1; n <= 6; ++n) {
    for (std::uint32_t t = 1; t <= n; ++t) {
      const Scalar secret = random_scalar(rng);
      const ShareSet set = share_secret(secret, n, t, rng);
      for (const auto& s : oracle::subsets_at_least(n, t)) {
        std::vector<std::pair<std::uint64_t, Scalar>> pts;
        for (std::size_t k = 0; k < t; ++k) pts.emplace_back(s[k], set.share_of(s[k]).value);
        const auto coeffs = oracle::interpolate_coefficients(pts);
        ASSERT_EQ(reconstruct(pick(set, s)), coeffs[0]);
        ASSERT_EQ(coeffs[0], secret);
      }
    }
  }
}

// ---------------------------------------------------------------------------

// Dealer constants recovered from a full set of dealt shares with the
// Vandermonde oracle.
Scalar dealer_constant(const DkgParty::Deal& deal, std::uint32_t t) {
  std::vector<std::pair<std::uint64_t, Scalar>> pts;
  for (std::uint32_t k = 0; k < t; ++k) pts.emplace_back(deal.shares[k].recipient, deal.shares[k].value);
  return oracle::interpolate_coefficients(pts)[0];
}

TEST(DkgTest, HonestThreeOfTwo) {
  const std::uint32_t n = 3, t = 2;
  DeterministicRng rng(20);
  std::vector<DkgParty> parties;
  for (PartyIndex j = 1; j <= n; ++j) parties.emplace_back(j, n, t);
  std::vector<DkgParty::Deal> deals;
  for (auto& p : parties) deals.push_back(p.deal(rng));

  Scalar expected;
  for (const auto& d : deals) expected += dealer_constant(d, t);

  for (const auto& d : deals) {
    for (const auto& s : d.shares) EXPECT_FALSE(parties[s.recipient - 1].receive(s, d.commitments));
  }
  std::vector<ShareSet> finals;
  for (const auto& p : parties) finals.push_back(p.finalize({}));

  EXPECT_EQ(finals[0].aggregate, base_mul(expected));
  for (const auto& s : oracle::subsets_at_least(n, t)) {
    std::vector<Share> shares;
    for (auto i : s) shares.push_back(finals[i - 1].shares.front());
    EXPECT_EQ(reconstruct(shares), expected);
  }
  for (const auto& f : finals) {
    EXPECT_EQ(f.public_shares, finals[0].public_shares);
    EXPECT_EQ(f.aggregate, finals[0].aggregate);
  }
}

TEST(DkgTest, CorruptedShareIsDetectedAndDealerExcluded) {
  DeterministicRng rng(21);
  const DkgResult result = run_dkg(4, 2, rng, [](DealtShare& s) {
    if (s.dealer == 2 && s.recipient == 3) s.value += Scalar::one();
  });
  ASSERT_EQ(result.complaints.size(), 1u);
  EXPECT_EQ(result.complaints[0].accuser, 3u);
  EXPECT_EQ(result.complaints[0].dealer, 2u);
  EXPECT_EQ(result.excluded_dealers, std::set<PartyIndex>{2});
  ASSERT_EQ(result.parties.size(), 4u);

  GroupPoint expected;
  for (const auto& c : result.qualified_commitments) expected += c.coeff_commits[0];
  EXPECT_EQ(result.parties[0].aggregate, expected);

  std::vector<PartyIndex> pair{1, 3};
  std::vector<GroupPoint> pubs{result.parties[0].public_share(1), result.parties[0].public_share(3)};
  EXPECT_EQ(reconstruct_in_exponent(pair, pubs), expected);
  const Share s1 = result.parties[0].shares.front();
  const Share s3 = result.parties[2].shares.front();
  EXPECT_EQ(base_mul(reconstruct(std::vector<Share>{s1, s3})), expected);
}

TEST(DkgTest, SingleBitCorruptionAlwaysDetected) {
  DeterministicRng rng(22);
  DkgParty dealer(1, 3, 2);
  const auto deal = dealer.deal(rng);
  const DealtShare honest = deal.shares[1];
  ASSERT_TRUE(dkg_verify(honest, deal.commitments));
  const auto enc = honest.value.to_bytes();
  for (std::size_t bit = 0; bit < 256; ++bit) {
    auto flipped = enc;
    flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    DealtShare bad = honest;
    bad.value = Scalar::from_bytes_reduce(flipped);
    ASSERT_FALSE(dkg_verify(bad, deal.commitments)) << bit;
  }
}

TEST(DkgTest, SinglePartyIsPlainKeypair) {
  DeterministicRng rng(23);
  const DkgResult result = run_dkg(1, 1, rng);
  ASSERT_EQ(result.parties.size(), 1u);
  const ShareSet& set = result.parties[0];
  EXPECT_EQ(base_mul(set.shares[0].value), set.aggregate);
  EXPECT_EQ(set.public_shares[0], set.aggregate);
}

TEST(DkgTest, WrongCommitmentLengthIsAComplaint) {
  DeterministicRng rng(24);
  DkgParty dealer(1, 3, 2);
  DkgParty receiver(2, 3, 2);
  auto deal = dealer.deal(rng);
  deal.commitments.coeff_commits.pop_back();
  const auto complaint = receiver.receive(deal.shares[1], deal.commitments);
  ASSERT_TRUE(complaint);
  EXPECT_EQ(complaint->dealer, 1u);
}

TEST(FeldmanTest, EvaluateRangeMatchesDirectEvaluation) {
  DeterministicRng rng(27);
  for (std::uint32_t t = 1; t <= 5; ++t) {
    FeldmanCommitments comm{1, {}};
    for (std::uint32_t k = 0; k < t; ++k) comm.coeff_commits.push_back(base_mul(random_scalar(rng)));
    const auto range = comm.evaluate_range(12);
    ASSERT_EQ(range.size(), 12u);
    for (PartyIndex j = 1; j <= 12; ++j) ASSERT_EQ(range[j - 1], comm.evaluate(j)) << "t=" << t << " j=" << j;
    EXPECT_EQ(comm.evaluate_range(t > 1 ? t - 1 : 0).size(), t > 1 ? t - 1 : 0u);
  }
}

TEST(DkgTest, BatchedReceiveIsolatesEveryBadDealer) {
  DeterministicRng rng(28);
  const std::uint32_t n = 6, t = 3;
  std::vector<DkgParty> parties;
  for (PartyIndex j = 1; j <= n; ++j) parties.emplace_back(j, n, t);
  std::vector<DkgParty::Deal> deals;
  for (auto& p : parties) deals.push_back(p.deal(rng));
  std::vector<FeldmanCommitments> comms;
  for (const auto& d : deals) comms.push_back(d.commitments);

  std::vector<DealtShare> inbox;
  for (const auto& d : deals) inbox.push_back(d.shares[3]);
  EXPECT_TRUE(DkgParty(4, n, t).receive_all(inbox, comms).empty());

  inbox[1].value += Scalar::one();
  inbox[4].value += Scalar::from_u64(2);
  const auto complaints = parties[3].receive_all(inbox, comms);
  ASSERT_EQ(complaints.size(), 2u);
  EXPECT_EQ(complaints[0].dealer, 2u);
  EXPECT_EQ(complaints[1].dealer, 5u);
  EXPECT_EQ(complaints[0].accuser, 4u);
}

// Offsetting corruptions pass the summed check; the combined share is then
// still consistent with the combined commitments.
TEST(DkgTest, CancellingCorruptionsLeaveConsistentShare) {
  DeterministicRng rng(29);
  const std::uint32_t n = 4, t = 2;
  std::vector<DkgParty> parties;
  for (PartyIndex j = 1; j <= n; ++j) parties.emplace_back(j, n, t);
  std::vector<DkgParty::Deal> deals;
  for (auto& p : parties) deals.push_back(p.deal(rng));
  std::vector<FeldmanCommitments> comms;
  for (const auto& d : deals) comms.push_back(d.commitments);

  std::vector<DealtShare> inbox;
  for (const auto& d : deals) inbox.push_back(d.shares[0]);
  inbox[1].value += Scalar::one();
  inbox[2].value = inbox[2].value - Scalar::one();
  DkgParty receiver(1, n, t);
  EXPECT_TRUE(receiver.receive_all(inbox, comms).empty());
  const ShareSet s = receiver.finalize({});
  EXPECT_EQ(base_mul(s.shares[0].value), s.public_share(1));
  EXPECT_THROW(receiver.finalize({2}), DomainError);
}

}  // namespace
}  // namespace dao2
