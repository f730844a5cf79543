// SPDX-License-Identifier: Apache-2.0
//
// Two-round threshold Schnorr over secp256k1.
//
//   round 1:  R_i = k_i G,            R = Σ λ_{i,T} R_i
//   round 2:  e = H(enc(R) || enc(X) || m),  s_i = k_i + e x_i,  s = Σ λ_{i,T} s_i
//   verify:   s G == R + e X
//
// Each s_i is checked against s_i G == R_i + e X_i before combination.

#pragma once

#include <functional>

#include "dao2/group.hpp"
#include "dao2/rng.hpp"
#include "dao2/sharing.hpp"

namespace dao2 {

inline constexpr std::size_t kSignatureBytes = kPointBytes + kScalarBytes;  // 65 on the wire
inline constexpr std::size_t kSignatureAccountedBytes = 64;

struct Signature {
  GroupPoint r;
  Scalar s;

  std::array<std::uint8_t, kSignatureBytes> to_bytes() const;
  // Throws DecodeError for a malformed R, an identity R or s >= q.
  static Signature from_bytes(ByteView data);

  friend bool operator==(const Signature& a, const Signature& b) { return a.r == b.r && a.s == b.s; }
};

// A DKG run; returns the combined view (every party's share).
ShareSet ts_keygen(std::uint32_t n, std::uint32_t t, Rng& rng, const DealTamper& tamper = {});

Scalar challenge(const GroupPoint& r, const GroupPoint& pub, ByteView message);

struct SignRound1 {
  PartyIndex index = 0;
  GroupPoint commitment;  // R_i
};

struct SignRound2 {
  PartyIndex index = 0;
  Scalar response;  // s_i
};

// One signer's side of one signature. The nonce is sampled at construction
// and erased once the response is produced; a second response throws
// NonceReused.
class SignerSession {
 public:
  SignerSession(const Share& share, Rng& rng);
  SignerSession(const SignerSession&) = delete;
  SignerSession& operator=(const SignerSession&) = delete;
  SignerSession(SignerSession&&) = default;
  ~SignerSession();

  PartyIndex index() const { return share_.index; }
  SignRound1 round1() const { return SignRound1{share_.index, commitment_}; }
  SignRound2 round2(const Scalar& e);
  bool used() const { return used_; }

 private:
  Share share_;
  Scalar nonce_;
  GroupPoint commitment_;
  bool used_ = false;
};

// Σ λ_{i,T} R_i, T taken from the messages.
GroupPoint aggregate_nonce(std::span<const SignRound1> commitments);

// s_i G == R_i + e X_i. Throws MisbehavingSigner(index) otherwise.
void check_partial(const SignRound1& commitment, const SignRound2& response, const GroupPoint& public_share,
                   const Scalar& e);

// Σ λ_{i,T} s_i; responses must cover the same set as the commitments.
Signature combine_partials(const GroupPoint& r, std::span<const SignRound2> responses);

// Test and fault-injection hook on partial responses in flight.
using ResponseTamper = std::function<void(SignRound2&)>;

// Runs both rounds for the signer set T in-process. Throws SubThreshold if
// |T| < keys.t before any nonce is drawn, DomainError for a malformed T or
// a share not held, and MisbehavingSigner for a bad partial.
Signature ts_sign(ByteView message, const ShareSet& keys, std::span<const PartyIndex> signers, Rng& rng,
                  const ResponseTamper& tamper = {});

bool ts_verify(const GroupPoint& pub, ByteView message, const Signature& sig);

}  // namespace dao2
