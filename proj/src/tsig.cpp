// SPDX-License-Identifier: Apache-2.0

#include "dao2/tsig.hpp"

#include <algorithm>

#include "dao2/errors.hpp"

namespace dao2 {

std::array<std::uint8_t, kSignatureBytes> Signature::to_bytes() const {
  std::array<std::uint8_t, kSignatureBytes> out{};
  const auto re = r.to_bytes();
  const auto se = s.to_bytes();
  std::copy(re.begin(), re.end(), out.begin());
  std::copy(se.begin(), se.end(), out.begin() + kPointBytes);
  return out;
}

Signature Signature::from_bytes(ByteView data) {
  if (data.size() != kSignatureBytes) throw DecodeError("signature must be 65 bytes");
  Signature sig;
  sig.r = GroupPoint::from_bytes(data.first(kPointBytes));
  sig.s = Scalar::from_bytes(data.subspan(kPointBytes));
  return sig;
}

ShareSet ts_keygen(std::uint32_t n, std::uint32_t t, Rng& rng, const DealTamper& tamper) {
  DkgResult dkg = run_dkg(n, t, rng, tamper);
  ShareSet out = dkg.parties.front();
  out.shares.clear();
  for (const auto& p : dkg.parties) out.shares.push_back(p.shares.front());
  return out;
}

Scalar challenge(const GroupPoint& r, const GroupPoint& pub, ByteView message) {
  Bytes buf;
  buf.reserve(2 * kPointBytes + message.size());
  append(buf, r.to_bytes());
  append(buf, pub.to_bytes());
  append(buf, message);
  return hash_to_scalar(buf);
}

SignerSession::SignerSession(const Share& share, Rng& rng)
    : share_(share), nonce_(random_scalar(rng)), commitment_(base_mul(nonce_)) {}

SignerSession::~SignerSession() {
  nonce_.wipe();
  share_.value.wipe();
}

SignRound2 SignerSession::round2(const Scalar& e) {
  if (used_) throw NonceReused("signer " + std::to_string(share_.index) + " already responded in this session");
  used_ = true;
  SignRound2 out{share_.index, nonce_ + e * share_.value};
  nonce_.wipe();
  return out;
}

GroupPoint aggregate_nonce(std::span<const SignRound1> commitments) {
  std::vector<PartyIndex> set;
  std::vector<GroupPoint> points;
  for (const auto& c : commitments) {
    set.push_back(c.index);
    points.push_back(c.commitment);
  }
  return reconstruct_in_exponent(set, points);
}

void check_partial(const SignRound1& commitment, const SignRound2& response, const GroupPoint& public_share,
                   const Scalar& e) {
  if (commitment.index != response.index ||
      !(base_mul(response.response) == commitment.commitment + e * public_share)) {
    throw MisbehavingSigner(response.index,
                            "partial signature of signer " + std::to_string(response.index) + " fails verification");
  }
}

Signature combine_partials(const GroupPoint& r, std::span<const SignRound2> responses) {
  std::vector<PartyIndex> set;
  for (const auto& p : responses) set.push_back(p.index);
  const auto lambdas = lagrange_coeffs(set);
  Signature sig{r, Scalar::zero()};
  for (std::size_t k = 0; k < responses.size(); ++k) sig.s += lambdas[k] * responses[k].response;
  return sig;
}

Signature ts_sign(ByteView message, const ShareSet& keys, std::span<const PartyIndex> signers, Rng& rng,
                  const ResponseTamper& tamper) {
  if (signers.size() < keys.t) {
    throw SubThreshold("signing needs " + std::to_string(keys.t) + " signers, got " + std::to_string(signers.size()));
  }
  check_index_set(signers);
  std::vector<PartyIndex> set(signers.begin(), signers.end());
  std::sort(set.begin(), set.end());

  std::vector<SignerSession> sessions;
  sessions.reserve(set.size());
  for (auto i : set) sessions.emplace_back(keys.share_of(i), rng);

  std::vector<SignRound1> round1;
  for (const auto& s : sessions) round1.push_back(s.round1());
  const GroupPoint r = aggregate_nonce(round1);
  if (r.is_identity()) throw DegenerateSession("aggregate nonce is the identity");
  const Scalar e = challenge(r, keys.aggregate, message);

  std::vector<SignRound2> round2;
  for (std::size_t k = 0; k < sessions.size(); ++k) {
    SignRound2 resp = sessions[k].round2(e);
    if (tamper) tamper(resp);
    check_partial(round1[k], resp, keys.public_share(set[k]), e);
    round2.push_back(resp);
  }
  Signature sig = combine_partials(r, round2);
  for (auto& p : round2) p.response.wipe();
  return sig;
}

bool ts_verify(const GroupPoint& pub, ByteView message, const Signature& sig) {
  if (pub.is_identity() || sig.r.is_identity()) return false;
  const Scalar e = challenge(sig.r, pub, message);
  return base_mul(sig.s) == sig.r + e * pub;
}

}  // namespace dao2
