// SPDX-License-Identifier: Apache-2.0
//
// Fixed-layout encodings for every protocol object, and the per-session
// byte accounting.
//
//   object               layout                                    raw  accounted
//   descriptor           B(33) cc(32) tag(16)                       81   81
//   session metadata     tag(16) label(32)                          48   48
//   dh commitment        C_i(32)                                    32   32
//   dh opening           term(33) nonce(32)                         65   33
//   receiver share       term(33) D_j(33)                           66   66
//   sig round 1          R_i(33)                                    33   33
//   sig round 2          s_i(32)                                    32   32
//   signature            R(33) s(32)                                65   64
//   complaint            accused(4) reason(1)                        5    5
//   pay message          mode(1) dest(33) amount(8) tag(16) label(32) 90  90
//   spend message        0x02 dest(33) tag(16) amount(8)            58   58
//
// Integers are big-endian. An identity term (share value zero) is written
// as 33 zero bytes.

#pragma once

#include <optional>
#include <string_view>

#include "dao2/dkd.hpp"
#include "dao2/dsag.hpp"
#include "dao2/group.hpp"
#include "dao2/tsig.hpp"

namespace dao2 {

inline constexpr std::size_t kDescriptorBytes = kPointBytes + kChainCodeBytes + kTagBytes;
inline constexpr std::size_t kMetadataBytes = kTagBytes + kLabelBytes;
inline constexpr std::size_t kCommitmentBytes = 32;
inline constexpr std::size_t kOpeningBytes = kPointBytes + kNonceBytes;
inline constexpr std::size_t kOpeningAccountedBytes = kPointBytes;
inline constexpr std::size_t kReceiverShareBytes = 2 * kPointBytes;
inline constexpr std::size_t kComplaintBytes = 5;
inline constexpr std::size_t kPayMessageBytes = 1 + kPointBytes + 8 + kTagBytes + kLabelBytes;
inline constexpr std::size_t kSpendMessageBytes = 1 + kPointBytes + kTagBytes + 8;

enum class MessageKind : std::uint8_t {
  kDescriptor = 1,
  kDhCommitment,
  kDhOpening,
  kSessionMetadata,
  kReceiverShare,
  kSigRound1,
  kSigRound2,
  kSignature,
  kComplaint,
  kDescriptorEcho,
};

std::string_view kind_name(MessageKind kind);

// Length of a payload of this kind as counted in the session byte totals.
std::size_t accounted_length(MessageKind kind, std::size_t raw_length);

struct EncodedObject {
  MessageKind kind{};
  Bytes payload;
  std::size_t accounted_len = 0;

  static EncodedObject make(MessageKind kind, Bytes payload);
};

// ---------------------------------------------------------------------------
// Objects

struct SessionDescriptor {
  GroupPoint child_pub;
  ChainCode chaincode{};
  DerivationTag tag;

  friend bool operator==(const SessionDescriptor&, const SessionDescriptor&) = default;
};

struct SessionMetadata {
  DerivationTag tag;
  StealthLabel label;

  friend bool operator==(const SessionMetadata&, const SessionMetadata&) = default;
};

struct DhOpening {
  GroupPoint term;
  OpeningNonce nonce{};
};

struct ReceiverShare {
  GroupPoint term;        // Ω'_j = b_j A
  GroupPoint one_time;    // D_j
};

enum class ComplaintReason : std::uint8_t {
  kBadDealtShare = 1,
  kBadOpening,
  kBadOneTimeShare,
  kBadPartialSignature,
  kDivergentState,
};

struct Complaint {
  PartyIndex accused = 0;
  ComplaintReason reason{};

  friend bool operator==(const Complaint&, const Complaint&) = default;
};

enum class PaymentMode : std::uint8_t { kAnonymous = 0, kPlain = 1 };

struct PaymentMessage {
  PaymentMode mode = PaymentMode::kAnonymous;
  GroupPoint dest;
  std::uint64_t amount = 0;
  DerivationTag tag;
  std::optional<StealthLabel> label;  // absent in plain mode
};

struct SpendMessage {
  GroupPoint dest;
  DerivationTag tag;
  std::uint64_t amount = 0;
};

struct ChainTranscript {
  Bytes payment_message;
  Signature payment_sig;
  GroupPoint dest;
  DerivationTag tag;
  std::optional<StealthLabel> label;
  std::optional<Bytes> spend_message;
  std::optional<Signature> spend_sig;
};

enum class LedgerStatus : std::uint8_t { kPending = 0, kConfirmed = 1, kSpent = 2 };

std::string_view status_name(LedgerStatus status);

struct LedgerEntry {
  GroupPoint payer;  // sender DAO key A
  ChainTranscript transcript;
  LedgerStatus status = LedgerStatus::kPending;
};

// ---------------------------------------------------------------------------
// Encodings. Every decoder checks the exact length and rejects invalid or
// non-canonical points with DecodeError.

Bytes encode_descriptor(const SessionDescriptor& d);
SessionDescriptor decode_descriptor(ByteView data);

Bytes encode_metadata(const SessionMetadata& m);
SessionMetadata decode_metadata(ByteView data);

Bytes encode_commitment(const Digest32& c);
Digest32 decode_commitment(ByteView data);

Bytes encode_opening(const DhOpening& o);
DhOpening decode_opening(ByteView data);

Bytes encode_receiver_share(const ReceiverShare& r);
ReceiverShare decode_receiver_share(ByteView data);

Bytes encode_sig_round1(const GroupPoint& r_i);
GroupPoint decode_sig_round1(ByteView data);

Bytes encode_sig_round2(const Scalar& s_i);
Scalar decode_sig_round2(ByteView data);

Bytes encode_signature(const Signature& s);
Signature decode_signature(ByteView data);

Bytes encode_complaint(const Complaint& c);
Complaint decode_complaint(ByteView data);

Bytes encode_payment(const PaymentMessage& m);
PaymentMessage decode_payment(ByteView data);

Bytes encode_spend(const SpendMessage& m);
SpendMessage decode_spend(ByteView data);

// status(1) payer(33) m_pay(90) σ_pay(65) spent-flag(1) [m_spend(58) σ_spend(65)]
Bytes encode_ledger_entry(const LedgerEntry& e);
LedgerEntry decode_ledger_entry(ByteView data);

// ---------------------------------------------------------------------------
// Bus messages and accounting

enum class Dao : std::uint8_t { kSender = 1, kReceiver = 2 };

struct BusMessage {
  std::uint64_t session_id = 0;
  Dao dao = Dao::kSender;
  PartyIndex sender = 0;
  MessageKind kind{};
  Bytes payload;

  std::size_t accounted_len() const { return accounted_length(kind, payload.size()); }
};

struct CommBreakdown {
  std::uint32_t n = 0;
  std::size_t dkd_bytes = 0;
  std::size_t dsag_sender_bytes = 0;
  std::size_t sig_bytes = 0;
  std::size_t dsag_receiver_bytes = 0;
  std::size_t total = 0;  // the four components above
  std::size_t other_bytes = 0;  // signing rounds, complaints, echoes
  std::size_t raw_total = 0;    // every payload byte on the bus
};

// Sums a completed anonymous session. Requires one descriptor, one metadata
// message, a commitment and an opening from n_sender distinct sender
// parties, n_receiver receiver shares and two signatures; throws
// IncompleteTranscript otherwise.
CommBreakdown account_session(std::span<const BusMessage> transcript, std::uint32_t n_sender,
                              std::uint32_t n_receiver);
CommBreakdown account_session(std::span<const BusMessage> transcript, std::uint32_t n);

}  // namespace dao2
