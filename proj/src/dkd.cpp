// SPDX-License-Identifier: Apache-2.0

#include "dao2/dkd.hpp"

#include "dao2/errors.hpp"
#include "dao2/hash.hpp"

namespace dao2 {

DerivationOffset derive_offset(const GroupPoint& parent_pub, const ChainCode& parent_cc, const DerivationTag& tag) {
  if (parent_pub.is_identity()) throw DomainError("parent key is the identity");
  std::array<std::uint8_t, kPointBytes + kTagBytes> message{};
  const auto enc = parent_pub.to_bytes();
  std::copy(enc.begin(), enc.end(), message.begin());
  std::copy(tag.bytes.begin(), tag.bytes.end(), message.begin() + kPointBytes);

  Digest64 mac = hmac_sha512(parent_cc, message);
  DerivationOffset out;
  out.offset = Scalar::from_bytes_reduce(std::span<const std::uint8_t>(mac.data(), 32));
  std::copy(mac.begin() + 32, mac.end(), out.child_cc.begin());
  secure_wipe(mac);
  return out;
}

DerivationState::DerivationState(std::uint64_t epoch, GroupPoint aggregate_pub, ChainCode chaincode,
                                 std::vector<GroupPoint> public_shares, std::optional<Share> my_share)
    : epoch_(epoch),
      aggregate_pub_(aggregate_pub),
      chaincode_(chaincode),
      public_shares_(std::move(public_shares)),
      my_share_(my_share),
      consumed_(std::make_shared<const TagSet>()) {
  if (my_share_) {
    const PartyIndex j = my_share_->index;
    if (j == 0 || j > public_shares_.size()) throw DomainError("share index outside the public share list");
    if (!(base_mul(my_share_->value) == public_shares_[j - 1])) {
      throw DomainError("share does not match its public share");
    }
  }
}

DerivationState DerivationState::root(const ShareSet& keys, const ChainCode& chaincode) {
  std::optional<Share> mine;
  if (keys.shares.size() == 1) mine = keys.shares.front();
  return DerivationState(0, keys.aggregate, chaincode, keys.public_shares, mine);
}

const GroupPoint& DerivationState::public_share(PartyIndex j) const {
  if (j == 0 || j > public_shares_.size()) throw DomainError("party index out of range");
  return public_shares_[j - 1];
}

DerivationState DerivationState::with_consumed(const DerivationTag& tag) const {
  DerivationState out = *this;
  auto tags = std::make_shared<TagSet>(*consumed_);
  tags->insert(tag);
  out.consumed_ = std::move(tags);
  return out;
}

DerivationState DerivationState::public_view() const {
  DerivationState out = *this;
  out.my_share_.reset();
  return out;
}

bool DerivationState::same_public_state(const DerivationState& other) const {
  return epoch_ == other.epoch_ && aggregate_pub_ == other.aggregate_pub_ && chaincode_ == other.chaincode_ &&
         public_shares_ == other.public_shares_;
}

namespace {

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

Bytes DerivationState::serialize() const {
  Bytes out;
  put_u64(out, epoch_);
  append(out, aggregate_pub_.to_bytes());
  append(out, chaincode_);
  out.push_back(my_share_ ? 1 : 0);
  if (my_share_) {
    put_u64(out, my_share_->index);
    append(out, my_share_->value.to_bytes());
  }
  put_u64(out, public_shares_.size());
  for (const auto& p : public_shares_) append(out, p.to_bytes());
  put_u64(out, consumed_->size());
  for (const auto& t : *consumed_) append(out, t.bytes);
  return out;
}

void DerivationState::wipe_share() {
  if (my_share_) {
    my_share_->value.wipe();
    my_share_.reset();
  }
}

ChildPublic derive_child_public(const DerivationState& parent, const DerivationTag& tag) {
  if (parent.is_consumed(tag)) throw TagConsumed("derivation tag already consumed");
  DerivationOffset d = derive_offset(parent.aggregate_pub(), parent.chaincode(), tag);
  ChildPublic out;
  out.child_pub = parent.aggregate_pub() + base_mul(d.offset);
  out.child_cc = d.child_cc;
  out.offset = d.offset;
  d.offset.wipe();
  return out;
}

DerivationState derive_child_share(const DerivationState& parent, const Scalar& offset, const ChainCode& child_cc) {
  DerivationState child = parent;
  const GroupPoint shift = base_mul(offset);
  child.epoch_ = parent.epoch_ + 1;
  child.aggregate_pub_ = parent.aggregate_pub_ + shift;
  child.chaincode_ = child_cc;
  for (auto& p : child.public_shares_) p += shift;
  if (child.my_share_) child.my_share_->value += offset;
  return child;
}

DerivationState derive_child(const DerivationState& parent, const DerivationTag& tag) {
  ChildPublic c = derive_child_public(parent, tag);
  DerivationState out = derive_child_share(parent, c.offset, c.child_cc);
  c.offset.wipe();
  return out;
}

}  // namespace dao2
