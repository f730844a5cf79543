// SPDX-License-Identifier: Apache-2.0
//
// Distributed stealth-address generation. A sender quorum holding shares of
// a computes Ω = Σ λ_i (a_i B) = aB against the receiver's child key B; the
// receiver quorum gets the same point as Σ λ_j (b_j A) = bA. Both sides then
// use ρ = H(enc(Ω) || ξ) and D = B + ρG, and each receiver share moves to
// d_j = b_j + ρ, which is again a sharing of the one-time key.

#pragma once

#include <optional>
#include <utility>

#include "dao2/dkd.hpp"
#include "dao2/group.hpp"
#include "dao2/rng.hpp"
#include "dao2/sharing.hpp"

namespace dao2 {

inline constexpr std::size_t kLabelBytes = 32;
inline constexpr std::size_t kNonceBytes = 32;

using OpeningNonce = std::array<std::uint8_t, kNonceBytes>;

struct StealthLabel {
  std::array<std::uint8_t, kLabelBytes> bytes{};

  static StealthLabel random(Rng& rng) { return StealthLabel{rng.bytes<kLabelBytes>()}; }
  friend auto operator<=>(const StealthLabel&, const StealthLabel&) = default;
};

struct StealthDestination {
  GroupPoint dest;
  DerivationTag tag;
  StealthLabel label;
};

struct PartialDH {
  PartyIndex index = 0;
  GroupPoint term;
  std::optional<Digest32> commitment;
  std::optional<OpeningNonce> opening_nonce;
};

struct OneTimeShare {
  PartyIndex index = 0;
  Scalar secret;
  GroupPoint pub;

  void wipe() { secret.wipe(); }
};

// SHA-256(enc(term) || nonce). The identity term is framed as 33 zero bytes.
Digest32 commit_term(const GroupPoint& term, const OpeningNonce& nonce);

// a_i * B. With a commit rng the commitment and its nonce are filled in.
PartialDH sender_partial_dh(const Share& my_share, const GroupPoint& child_pub, Rng* commit_rng = nullptr);

// b_j * A, the receiver-side mirror.
PartialDH receiver_partial_dh(const Share& my_child_share, const GroupPoint& sender_pub, Rng* commit_rng = nullptr);

enum class OpeningCheck { kRequired, kSkip };

// Σ λ_{i,S} term_i over S = indices of `partials`, ascending. Throws
// SubThreshold when |S| < threshold, DomainError for a malformed set, and
// InconsistentContribution naming the first party whose opening does not
// match its commitment (or that sent none when openings are required).
GroupPoint aggregate_shared_secret(std::span<const PartialDH> partials, std::uint32_t threshold,
                                   OpeningCheck check = OpeningCheck::kRequired);

// ρ = H(enc(Ω) || ξ). Throws DegenerateSession for an identity Ω.
Scalar stealth_offset(const GroupPoint& shared_secret, const StealthLabel& label);

// D = B + ρG. Throws DegenerateSession for an identity Ω or B.
StealthDestination make_destination(const GroupPoint& shared_secret, const GroupPoint& child_pub,
                                    const StealthLabel& label, const DerivationTag& tag);

// D = B + ρG for a given ρ. make_destination is this with ρ from the hash.
StealthDestination destination_from_offset(const GroupPoint& child_pub, const Scalar& rho, const StealthLabel& label,
                                           const DerivationTag& tag);

// Whether the candidate was built for `child_pub` from this shared secret.
// Never throws; degenerate inputs are simply not a match.
bool detect(const StealthDestination& candidate, const GroupPoint& child_pub, const GroupPoint& recv_shared_secret);

// d_j = b_j + ρ, D_j = d_j G.
OneTimeShare recover_one_time_share(const Share& my_child_share, const Scalar& rho);

using PublicShareList = std::vector<std::pair<PartyIndex, GroupPoint>>;

// Σ λ_{j,S} D_j == D. Throws InconsistentShares on mismatch; this aggregate
// check alone does not say which share is wrong.
void verify_one_time_shares(const PublicShareList& publics, const GroupPoint& dest);

// Per-share check D_j == B_j + ρG against the child public shares. Returns
// the indices that fail, ascending.
std::vector<PartyIndex> find_inconsistent_one_time_shares(const PublicShareList& publics,
                                                          const std::vector<GroupPoint>& child_public_shares,
                                                          const Scalar& rho);

// Aggregate check, then per-share isolation: throws MisbehavingParty naming
// the first bad index, or InconsistentShares if the aggregate fails while
// every share looks right (which would mean a bad destination).
void verify_one_time_shares_per_share(const PublicShareList& publics, const GroupPoint& dest,
                                      const std::vector<GroupPoint>& child_public_shares, const Scalar& rho);

}  // namespace dao2
