// SPDX-License-Identifier: Apache-2.0
//
// Distributed key derivation: a threshold-held extended key advances one
// epoch at a time by a public additive offset
//
//   (offset, cc_child) = HMAC-SHA512(cc_parent, enc(B_parent) || tag)
//   b_j' = b_j + offset,  B_j' = B_j + offset*G,  B' = B + offset*G
//
// so no party ever needs more than its own share.

#pragma once

#include <compare>
#include <memory>
#include <optional>
#include <set>

#include "dao2/group.hpp"
#include "dao2/rng.hpp"
#include "dao2/sharing.hpp"

namespace dao2 {

inline constexpr std::size_t kTagBytes = 16;
inline constexpr std::size_t kChainCodeBytes = 32;

using ChainCode = std::array<std::uint8_t, kChainCodeBytes>;

struct DerivationTag {
  std::array<std::uint8_t, kTagBytes> bytes{};

  static DerivationTag random(Rng& rng) { return DerivationTag{rng.bytes<kTagBytes>()}; }
  friend auto operator<=>(const DerivationTag&, const DerivationTag&) = default;
};

struct DerivationOffset {
  Scalar offset;
  ChainCode child_cc{};
};

// First 32 bytes of the HMAC, reduced mod q, are the offset; the last 32
// are the child chaincode. Throws DomainError for an identity parent key.
DerivationOffset derive_offset(const GroupPoint& parent_pub, const ChainCode& parent_cc, const DerivationTag& tag);

class DerivationState {
 public:
  using TagSet = std::set<DerivationTag>;

  DerivationState(std::uint64_t epoch, GroupPoint aggregate_pub, ChainCode chaincode,
                  std::vector<GroupPoint> public_shares, std::optional<Share> my_share);

  // Epoch-0 state from a DKG result. The share is kept only when the set
  // holds exactly one (a receiver party); otherwise the state is public.
  static DerivationState root(const ShareSet& keys, const ChainCode& chaincode);

  std::uint64_t epoch() const { return epoch_; }
  const GroupPoint& aggregate_pub() const { return aggregate_pub_; }
  const ChainCode& chaincode() const { return chaincode_; }
  const std::vector<GroupPoint>& public_shares() const { return public_shares_; }
  const GroupPoint& public_share(PartyIndex j) const;
  const std::optional<Share>& my_share() const { return my_share_; }
  const TagSet& consumed_tags() const { return *consumed_; }
  bool is_consumed(const DerivationTag& tag) const { return consumed_->count(tag) != 0; }

  // Copy with `tag` added; tags are never removed.
  DerivationState with_consumed(const DerivationTag& tag) const;

  // The same state without the secret share, as a sender would hold it.
  DerivationState public_view() const;

  // Same epoch, keys and chaincode (shares and tags not compared).
  bool same_public_state(const DerivationState& other) const;

  // Canonical byte image of every field, secret share included.
  Bytes serialize() const;

  // Overwrites and drops the secret share.
  void wipe_share();

 private:
  friend DerivationState derive_child_share(const DerivationState&, const Scalar&, const ChainCode&);

  std::uint64_t epoch_;
  GroupPoint aggregate_pub_;
  ChainCode chaincode_;
  std::vector<GroupPoint> public_shares_;
  std::optional<Share> my_share_;
  // Shared between parent and child until a tag is added.
  std::shared_ptr<const TagSet> consumed_;
};

struct ChildPublic {
  GroupPoint child_pub;
  ChainCode child_cc{};
  Scalar offset;
};

// Public-input-only step; any holder of the public state can run it.
// Throws TagConsumed if the parent lineage has already used `tag`.
ChildPublic derive_child_public(const DerivationState& parent, const DerivationTag& tag);

// Adds `offset` to the held share, to every public share and to the
// aggregate key, moves to `child_cc`, and increments the epoch. The parent
// is left untouched.
DerivationState derive_child_share(const DerivationState& parent, const Scalar& offset, const ChainCode& child_cc);

// derive_child_public followed by derive_child_share.
DerivationState derive_child(const DerivationState& parent, const DerivationTag& tag);

}  // namespace dao2
