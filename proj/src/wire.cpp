// SPDX-License-Identifier: Apache-2.0

#include "dao2/wire.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "dao2/errors.hpp"

namespace dao2 {
namespace {

class Reader {
 public:
  Reader(ByteView data, std::size_t expected, std::string_view what) : data_(data) {
    if (data.size() != expected) {
      throw DecodeError(std::string(what) + " must be " + std::to_string(expected) + " bytes, got " +
                        std::to_string(data.size()));
    }
  }

  ByteView take(std::size_t n) {
    if (pos_ + n > data_.size()) throw DecodeError("truncated input");
    ByteView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t byte() { return take(1)[0]; }
  std::uint64_t u64() { return be(8); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
  GroupPoint point() { return GroupPoint::from_bytes(take(kPointBytes)); }
  GroupPoint point_or_identity() {
    ByteView b = take(kPointBytes);
    if (std::all_of(b.begin(), b.end(), [](std::uint8_t x) { return x == 0; })) return GroupPoint::identity();
    return GroupPoint::from_bytes(b);
  }
  Scalar scalar() { return Scalar::from_bytes(take(kScalarBytes)); }
  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    std::array<std::uint8_t, N> out{};
    ByteView b = take(N);
    std::copy(b.begin(), b.end(), out.begin());
    return out;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::uint64_t be(int n) {
    std::uint64_t v = 0;
    for (auto b : take(n)) v = (v << 8) | b;
    return v;
  }

  ByteView data_;
  std::size_t pos_ = 0;
};

void put_be(Bytes& out, std::uint64_t v, int n) {
  for (int i = n - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_point(Bytes& out, const GroupPoint& p) { append(out, p.to_bytes()); }

void put_point_or_identity(Bytes& out, const GroupPoint& p) {
  if (p.is_identity()) {
    out.insert(out.end(), kPointBytes, 0);
  } else {
    put_point(out, p);
  }
}

constexpr std::uint8_t kSpendPrefix = 0x02;
constexpr std::size_t kLedgerBaseBytes = 1 + kPointBytes + kPayMessageBytes + kSignatureBytes + 1;
constexpr std::size_t kLedgerSpentBytes = kLedgerBaseBytes + kSpendMessageBytes + kSignatureBytes;

}  // namespace

std::string_view kind_name(MessageKind kind) {
  switch (kind) {
    case MessageKind::kDescriptor: return "descriptor";
    case MessageKind::kDhCommitment: return "dh-commitment";
    case MessageKind::kDhOpening: return "dh-opening";
    case MessageKind::kSessionMetadata: return "session-metadata";
    case MessageKind::kReceiverShare: return "receiver-share";
    case MessageKind::kSigRound1: return "sig-round-1";
    case MessageKind::kSigRound2: return "sig-round-2";
    case MessageKind::kSignature: return "signature";
    case MessageKind::kComplaint: return "complaint";
    case MessageKind::kDescriptorEcho: return "descriptor-echo";
  }
  return "unknown";
}

std::size_t accounted_length(MessageKind kind, std::size_t raw_length) {
  switch (kind) {
    case MessageKind::kDhOpening: return raw_length - kNonceBytes;
    case MessageKind::kSignature: return kSignatureAccountedBytes;
    default: return raw_length;
  }
}

EncodedObject EncodedObject::make(MessageKind kind, Bytes payload) {
  EncodedObject out{kind, std::move(payload), 0};
  out.accounted_len = accounted_length(kind, out.payload.size());
  return out;
}

std::string_view status_name(LedgerStatus status) {
  switch (status) {
    case LedgerStatus::kPending: return "pending";
    case LedgerStatus::kConfirmed: return "confirmed";
    case LedgerStatus::kSpent: return "spent";
  }
  return "unknown";
}

Bytes encode_descriptor(const SessionDescriptor& d) {
  Bytes out;
  put_point(out, d.child_pub);
  append(out, d.chaincode);
  append(out, d.tag.bytes);
  return out;
}

SessionDescriptor decode_descriptor(ByteView data) {
  Reader r(data, kDescriptorBytes, "descriptor");
  SessionDescriptor d;
  d.child_pub = r.point();
  d.chaincode = r.fixed<kChainCodeBytes>();
  d.tag.bytes = r.fixed<kTagBytes>();
  return d;
}

Bytes encode_metadata(const SessionMetadata& m) {
  Bytes out(m.tag.bytes.begin(), m.tag.bytes.end());
  append(out, m.label.bytes);
  return out;
}

SessionMetadata decode_metadata(ByteView data) {
  Reader r(data, kMetadataBytes, "session metadata");
  SessionMetadata m;
  m.tag.bytes = r.fixed<kTagBytes>();
  m.label.bytes = r.fixed<kLabelBytes>();
  return m;
}

Bytes encode_commitment(const Digest32& c) { return Bytes(c.begin(), c.end()); }

Digest32 decode_commitment(ByteView data) {
  Reader r(data, kCommitmentBytes, "commitment");
  return r.fixed<kCommitmentBytes>();
}

Bytes encode_opening(const DhOpening& o) {
  Bytes out;
  put_point_or_identity(out, o.term);
  append(out, o.nonce);
  return out;
}

DhOpening decode_opening(ByteView data) {
  Reader r(data, kOpeningBytes, "opening");
  DhOpening o;
  o.term = r.point_or_identity();
  o.nonce = r.fixed<kNonceBytes>();
  return o;
}

Bytes encode_receiver_share(const ReceiverShare& s) {
  Bytes out;
  put_point_or_identity(out, s.term);
  put_point(out, s.one_time);
  return out;
}

ReceiverShare decode_receiver_share(ByteView data) {
  Reader r(data, kReceiverShareBytes, "receiver share");
  ReceiverShare s;
  s.term = r.point_or_identity();
  s.one_time = r.point();
  return s;
}

Bytes encode_sig_round1(const GroupPoint& r_i) {
  Bytes out;
  put_point(out, r_i);
  return out;
}

GroupPoint decode_sig_round1(ByteView data) {
  Reader r(data, kPointBytes, "signing commitment");
  return r.point();
}

Bytes encode_sig_round2(const Scalar& s_i) {
  const auto b = s_i.to_bytes();
  return Bytes(b.begin(), b.end());
}

Scalar decode_sig_round2(ByteView data) {
  Reader r(data, kScalarBytes, "partial signature");
  return r.scalar();
}

Bytes encode_signature(const Signature& s) {
  const auto b = s.to_bytes();
  return Bytes(b.begin(), b.end());
}

Signature decode_signature(ByteView data) { return Signature::from_bytes(data); }

Bytes encode_complaint(const Complaint& c) {
  Bytes out;
  put_be(out, c.accused, 4);
  out.push_back(static_cast<std::uint8_t>(c.reason));
  return out;
}

Complaint decode_complaint(ByteView data) {
  Reader r(data, kComplaintBytes, "complaint");
  Complaint c;
  c.accused = r.u32();
  const std::uint8_t reason = r.byte();
  if (reason < 1 || reason > static_cast<std::uint8_t>(ComplaintReason::kDivergentState)) {
    throw DecodeError("unknown complaint reason");
  }
  c.reason = static_cast<ComplaintReason>(reason);
  return c;
}

Bytes encode_payment(const PaymentMessage& m) {
  if ((m.mode == PaymentMode::kAnonymous) != m.label.has_value()) {
    throw DomainError("anonymous payments carry a label and plain ones do not");
  }
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(m.mode));
  put_point(out, m.dest);
  put_be(out, m.amount, 8);
  append(out, m.tag.bytes);
  if (m.label) {
    append(out, m.label->bytes);
  } else {
    out.insert(out.end(), kLabelBytes, 0);
  }
  return out;
}

PaymentMessage decode_payment(ByteView data) {
  Reader r(data, kPayMessageBytes, "payment message");
  PaymentMessage m;
  const std::uint8_t mode = r.byte();
  if (mode > 1) throw DecodeError("unknown payment mode");
  m.mode = static_cast<PaymentMode>(mode);
  m.dest = r.point();
  m.amount = r.u64();
  m.tag.bytes = r.fixed<kTagBytes>();
  const auto label = r.fixed<kLabelBytes>();
  if (m.mode == PaymentMode::kAnonymous) {
    m.label = StealthLabel{label};
  } else if (std::any_of(label.begin(), label.end(), [](std::uint8_t b) { return b != 0; })) {
    throw DecodeError("plain payment with a nonzero label field");
  }
  return m;
}

Bytes encode_spend(const SpendMessage& m) {
  Bytes out;
  out.push_back(kSpendPrefix);
  put_point(out, m.dest);
  append(out, m.tag.bytes);
  put_be(out, m.amount, 8);
  return out;
}

SpendMessage decode_spend(ByteView data) {
  Reader r(data, kSpendMessageBytes, "spend message");
  if (r.byte() != kSpendPrefix) throw DecodeError("bad spend message prefix");
  SpendMessage m;
  m.dest = r.point();
  m.tag.bytes = r.fixed<kTagBytes>();
  m.amount = r.u64();
  return m;
}

Bytes encode_ledger_entry(const LedgerEntry& e) {
  const ChainTranscript& t = e.transcript;
  if (t.payment_message.size() != kPayMessageBytes) throw DomainError("payment message has the wrong length");
  if (t.spend_message.has_value() != t.spend_sig.has_value()) {
    throw DomainError("spend message and spend signature go together");
  }
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(e.status));
  put_point(out, e.payer);
  append(out, t.payment_message);
  append(out, t.payment_sig.to_bytes());
  out.push_back(t.spend_message ? 1 : 0);
  if (t.spend_message) {
    if (t.spend_message->size() != kSpendMessageBytes) throw DomainError("spend message has the wrong length");
    append(out, *t.spend_message);
    append(out, t.spend_sig->to_bytes());
  }
  return out;
}

LedgerEntry decode_ledger_entry(ByteView data) {
  if (data.size() < kLedgerBaseBytes) throw DecodeError("ledger entry truncated");
  const bool spent = data[kLedgerBaseBytes - 1] != 0;
  Reader r(data, spent ? kLedgerSpentBytes : kLedgerBaseBytes, "ledger entry");
  LedgerEntry e;
  const std::uint8_t status = r.byte();
  if (status > 2) throw DecodeError("unknown ledger status");
  e.status = static_cast<LedgerStatus>(status);
  e.payer = r.point();
  ByteView pay = r.take(kPayMessageBytes);
  const PaymentMessage m = decode_payment(pay);
  ChainTranscript& t = e.transcript;
  t.payment_message.assign(pay.begin(), pay.end());
  t.payment_sig = Signature::from_bytes(r.take(kSignatureBytes));
  t.dest = m.dest;
  t.tag = m.tag;
  t.label = m.label;
  if (r.byte() > 1) throw DecodeError("bad spend flag");
  if (spent) {
    ByteView spend = r.take(kSpendMessageBytes);
    decode_spend(spend);
    t.spend_message = Bytes(spend.begin(), spend.end());
    t.spend_sig = Signature::from_bytes(r.take(kSignatureBytes));
  }
  return e;
}

CommBreakdown account_session(std::span<const BusMessage> transcript, std::uint32_t n_sender,
                              std::uint32_t n_receiver) {
  CommBreakdown out;
  out.n = n_sender;
  std::map<MessageKind, std::set<PartyIndex>> senders;
  std::map<MessageKind, std::size_t> counts;
  for (const auto& m : transcript) {
    const std::size_t acc = m.accounted_len();
    out.raw_total += m.payload.size();
    ++counts[m.kind];
    senders[m.kind].insert(m.sender);
    switch (m.kind) {
      case MessageKind::kDescriptor: out.dkd_bytes += acc; break;
      case MessageKind::kDhCommitment:
      case MessageKind::kDhOpening:
      case MessageKind::kSessionMetadata: out.dsag_sender_bytes += acc; break;
      case MessageKind::kReceiverShare: out.dsag_receiver_bytes += acc; break;
      case MessageKind::kSignature: out.sig_bytes += acc; break;
      default: out.other_bytes += acc; break;
    }
  }
  auto require = [&](MessageKind kind, std::size_t count, bool distinct) {
    if (counts[kind] != count || (distinct && senders[kind].size() != count)) {
      throw IncompleteTranscript("transcript has " + std::to_string(counts[kind]) + " " +
                                 std::string(kind_name(kind)) + " messages, expected " + std::to_string(count));
    }
  };
  require(MessageKind::kDescriptor, 1, false);
  require(MessageKind::kSessionMetadata, 1, false);
  require(MessageKind::kDhCommitment, n_sender, true);
  require(MessageKind::kDhOpening, n_sender, true);
  require(MessageKind::kReceiverShare, n_receiver, true);
  require(MessageKind::kSignature, 2, false);
  out.total = out.dkd_bytes + out.dsag_sender_bytes + out.sig_bytes + out.dsag_receiver_bytes;
  return out;
}

CommBreakdown account_session(std::span<const BusMessage> transcript, std::uint32_t n) {
  return account_session(transcript, n, n);
}

}  // namespace dao2
