// SPDX-License-Identifier: Apache-2.0

#include "dao2/dsag.hpp"

#include <algorithm>

#include "dao2/errors.hpp"
#include "dao2/hash.hpp"

namespace dao2 {
namespace {

std::array<std::uint8_t, kPointBytes> frame_point(const GroupPoint& p) {
  if (p.is_identity()) return {};
  return p.to_bytes();
}

PartialDH partial_dh(const Share& share, const GroupPoint& other, Rng* commit_rng) {
  if (other.is_identity()) throw DomainError("partial DH against the identity");
  PartialDH out;
  out.index = share.index;
  out.term = share.value * other;
  if (commit_rng != nullptr) {
    out.opening_nonce = commit_rng->bytes<kNonceBytes>();
    out.commitment = commit_term(out.term, *out.opening_nonce);
  }
  return out;
}

}  // namespace

Digest32 commit_term(const GroupPoint& term, const OpeningNonce& nonce) {
  std::array<std::uint8_t, kPointBytes + kNonceBytes> buf{};
  const auto enc = frame_point(term);
  std::copy(enc.begin(), enc.end(), buf.begin());
  std::copy(nonce.begin(), nonce.end(), buf.begin() + kPointBytes);
  return sha256(buf);
}

PartialDH sender_partial_dh(const Share& my_share, const GroupPoint& child_pub, Rng* commit_rng) {
  return partial_dh(my_share, child_pub, commit_rng);
}

PartialDH receiver_partial_dh(const Share& my_child_share, const GroupPoint& sender_pub, Rng* commit_rng) {
  return partial_dh(my_child_share, sender_pub, commit_rng);
}

GroupPoint aggregate_shared_secret(std::span<const PartialDH> partials, std::uint32_t threshold,
                                   OpeningCheck check) {
  std::vector<const PartialDH*> sorted;
  for (const auto& p : partials) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->index < b->index; });

  std::vector<PartyIndex> set;
  for (auto* p : sorted) set.push_back(p->index);
  if (set.size() < threshold) {
    throw SubThreshold("shared-secret aggregation needs " + std::to_string(threshold) + " contributions, got " +
                       std::to_string(set.size()));
  }
  check_index_set(set);

  if (check == OpeningCheck::kRequired) {
    for (auto* p : sorted) {
      if (!p->commitment || !p->opening_nonce || commit_term(p->term, *p->opening_nonce) != *p->commitment) {
        throw InconsistentContribution(p->index, "opening of party " + std::to_string(p->index) +
                                                     " does not match its commitment");
      }
    }
  }

  const auto lambdas = lagrange_coeffs(set);
  GroupPoint acc;
  for (std::size_t k = 0; k < sorted.size(); ++k) acc += lambdas[k] * sorted[k]->term;
  return acc;
}

Scalar stealth_offset(const GroupPoint& shared_secret, const StealthLabel& label) {
  if (shared_secret.is_identity()) throw DegenerateSession("shared secret is the identity");
  std::array<std::uint8_t, kPointBytes + kLabelBytes> buf{};
  const auto enc = shared_secret.to_bytes();
  std::copy(enc.begin(), enc.end(), buf.begin());
  std::copy(label.bytes.begin(), label.bytes.end(), buf.begin() + kPointBytes);
  Scalar rho = hash_to_scalar(buf);
  secure_wipe(buf);
  return rho;
}

StealthDestination destination_from_offset(const GroupPoint& child_pub, const Scalar& rho, const StealthLabel& label,
                                           const DerivationTag& tag) {
  if (child_pub.is_identity()) throw DegenerateSession("child key is the identity");
  StealthDestination out{child_pub + base_mul(rho), tag, label};
  if (out.dest.is_identity()) throw DegenerateSession("destination is the identity");
  return out;
}

StealthDestination make_destination(const GroupPoint& shared_secret, const GroupPoint& child_pub,
                                    const StealthLabel& label, const DerivationTag& tag) {
  if (child_pub.is_identity()) throw DegenerateSession("child key is the identity");
  Scalar rho = stealth_offset(shared_secret, label);
  StealthDestination out = destination_from_offset(child_pub, rho, label, tag);
  rho.wipe();
  return out;
}

bool detect(const StealthDestination& candidate, const GroupPoint& child_pub, const GroupPoint& recv_shared_secret) {
  if (child_pub.is_identity() || recv_shared_secret.is_identity() || candidate.dest.is_identity()) return false;
  Scalar rho = stealth_offset(recv_shared_secret, candidate.label);
  const bool match = child_pub + base_mul(rho) == candidate.dest;
  rho.wipe();
  return match;
}

OneTimeShare recover_one_time_share(const Share& my_child_share, const Scalar& rho) {
  OneTimeShare out;
  out.index = my_child_share.index;
  out.secret = my_child_share.value + rho;
  out.pub = base_mul(out.secret);
  return out;
}

void verify_one_time_shares(const PublicShareList& publics, const GroupPoint& dest) {
  PublicShareList sorted = publics;
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.first < b.first; });
  std::vector<PartyIndex> set;
  std::vector<GroupPoint> points;
  for (const auto& [j, p] : sorted) {
    set.push_back(j);
    points.push_back(p);
  }
  if (!(reconstruct_in_exponent(set, points) == dest)) {
    throw InconsistentShares("one-time public shares do not reconstruct the destination");
  }
}

std::vector<PartyIndex> find_inconsistent_one_time_shares(const PublicShareList& publics,
                                                          const std::vector<GroupPoint>& child_public_shares,
                                                          const Scalar& rho) {
  const GroupPoint shift = base_mul(rho);
  std::vector<PartyIndex> bad;
  for (const auto& [j, p] : publics) {
    if (j == 0 || j > child_public_shares.size() || !(child_public_shares[j - 1] + shift == p)) bad.push_back(j);
  }
  std::sort(bad.begin(), bad.end());
  return bad;
}

void verify_one_time_shares_per_share(const PublicShareList& publics, const GroupPoint& dest,
                                      const std::vector<GroupPoint>& child_public_shares, const Scalar& rho) {
  try {
    verify_one_time_shares(publics, dest);
  } catch (const InconsistentShares&) {
    const auto bad = find_inconsistent_one_time_shares(publics, child_public_shares, rho);
    if (!bad.empty()) {
      throw MisbehavingParty(bad.front(), "one-time public share of party " + std::to_string(bad.front()) +
                                              " is inconsistent");
    }
    throw;
  }
}

}  // namespace dao2
