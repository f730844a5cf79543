// SPDX-License-Identifier: Apache-2.0

#include "dao2/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <json.hpp>

#include "dao2/errors.hpp"
#include "dao2/hash.hpp"

namespace dao2 {
namespace {

class Stopwatch {
 public:
  explicit Stopwatch(double& acc) : acc_(acc), start_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() {
    acc_ += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  double& acc_;
  std::chrono::steady_clock::time_point start_;
};

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_point_field(Bytes& out, const std::optional<GroupPoint>& p) {
  out.push_back(p ? 1 : 0);
  if (p) {
    if (p->is_identity()) {
      out.insert(out.end(), kPointBytes, 0);
    } else {
      append(out, p->to_bytes());
    }
  }
}

std::vector<PartyIndex> everyone(std::uint32_t n) {
  std::vector<PartyIndex> s(n);
  for (PartyIndex j = 1; j <= n; ++j) s[j - 1] = j;
  return s;
}

// Validates a party set against [1, n]; sorts it.
std::vector<PartyIndex> normalize_set(std::vector<PartyIndex> set, std::uint32_t n, std::string_view what) {
  std::sort(set.begin(), set.end());
  if (std::adjacent_find(set.begin(), set.end()) != set.end()) {
    throw ConfigError(std::string(what) + " has a duplicate index");
  }
  for (auto j : set) {
    if (j == 0 || j > n) throw ConfigError(std::string(what) + " has index " + std::to_string(j) + " out of range");
  }
  return set;
}

struct ResolvedSets {
  std::vector<PartyIndex> s;
  std::vector<PartyIndex> t;
};

// S defaults to everyone, T to the first `threshold` members of S.
ResolvedSets resolve_sets(const std::vector<PartyIndex>& s_in, const std::vector<PartyIndex>& t_in, std::uint32_t n,
                          std::uint32_t threshold, std::string_view side, bool t_within_s) {
  ResolvedSets r;
  r.s = s_in.empty() ? everyone(n) : normalize_set(s_in, n, std::string(side) + " S");
  if (t_in.empty()) {
    r.t.assign(r.s.begin(), r.s.begin() + std::min<std::size_t>(threshold, r.s.size()));
  } else {
    r.t = normalize_set(t_in, n, std::string(side) + " T");
  }
  if (r.s.size() < threshold) {
    throw SubThreshold(std::string(side) + " quorum has " + std::to_string(r.s.size()) + " members, threshold is " +
                       std::to_string(threshold));
  }
  if (r.t.size() < threshold) {
    throw SubThreshold(std::string(side) + " signer set has " + std::to_string(r.t.size()) +
                       " members, threshold is " + std::to_string(threshold));
  }
  if (t_within_s) {
    for (auto j : r.t) {
      if (!std::binary_search(r.s.begin(), r.s.end(), j)) {
        throw ConfigError(std::string(side) + " signer " + std::to_string(j) + " is outside the quorum");
      }
    }
  }
  return r;
}

std::map<PartyIndex, Bytes> by_sender(const std::vector<BusMessage>& delivered) {
  std::map<PartyIndex, Bytes> out;
  for (const auto& m : delivered) out[m.sender] = m.payload;
  return out;
}

// Both signing rounds over the bus for signer shares `shares` under `pub`.
Signature bus_sign(MessageBus& bus, std::uint64_t session, Dao dao, const std::vector<Share>& shares,
                   const std::function<GroupPoint(PartyIndex)>& public_share, const GroupPoint& pub,
                   ByteView message, Rng& rng, std::optional<PartyIndex> corrupt, double& ms) {
  std::vector<SignerSession> signers;
  {
    Stopwatch sw(ms);
    signers.reserve(shares.size());
    for (const auto& s : shares) signers.emplace_back(s, rng);
  }

  std::vector<BusMessage> r1;
  for (const auto& s : signers) {
    r1.push_back(BusMessage{0, dao, s.index(), MessageKind::kSigRound1, encode_sig_round1(s.round1().commitment)});
  }
  std::vector<SignRound1> commitments;
  for (const auto& [i, payload] : by_sender(bus.round(session, std::move(r1)))) {
    commitments.push_back(SignRound1{i, decode_sig_round1(payload)});
  }

  GroupPoint r;
  Scalar e;
  std::vector<SignRound2> own;
  {
    Stopwatch sw(ms);
    r = aggregate_nonce(commitments);
    if (r.is_identity()) throw DegenerateSession("aggregate nonce is the identity");
    e = challenge(r, pub, message);
    for (auto& s : signers) own.push_back(s.round2(e));
  }
  std::vector<BusMessage> r2;
  for (auto& resp : own) {
    if (corrupt && resp.index == *corrupt) resp.response += Scalar::one();
    r2.push_back(BusMessage{0, dao, resp.index, MessageKind::kSigRound2, encode_sig_round2(resp.response)});
    resp.response.wipe();
  }
  std::vector<SignRound2> responses;
  for (const auto& [i, payload] : by_sender(bus.round(session, std::move(r2)))) {
    responses.push_back(SignRound2{i, decode_sig_round2(payload)});
  }

  Signature sig;
  {
    Stopwatch sw(ms);
    for (std::size_t k = 0; k < responses.size(); ++k) {
      check_partial(commitments[k], responses[k], public_share(responses[k].index), e);
    }
    sig = combine_partials(r, responses);
  }
  for (auto& resp : responses) resp.response.wipe();
  bus.post(session, dao, shares.front().index, MessageKind::kSignature, encode_signature(sig));
  return sig;
}

void erase_all(std::vector<PartyState>& parties, const std::vector<PartyIndex>& which,
               std::optional<std::uint64_t> epoch, const AuditHook& audit, std::string_view event) {
  for (auto j : which) {
    parties[j - 1].erase_session(epoch);
    if (audit) audit(parties[j - 1], event);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Bus

MessageBus::MessageBus(std::uint64_t seed) : order_(seed, "bus-order") {}

std::uint64_t MessageBus::open_session() { return ++session_; }

std::vector<BusMessage> MessageBus::round(std::uint64_t session, std::vector<BusMessage> messages) {
  for (auto& m : messages) m.session_id = session;
  for (std::size_t k = messages.size(); k > 1; --k) std::swap(messages[k - 1], messages[order_.uniform(k)]);
  transcript_.insert(transcript_.end(), messages.begin(), messages.end());
  return messages;
}

BusMessage MessageBus::post(std::uint64_t session, Dao dao, PartyIndex sender, MessageKind kind, Bytes payload) {
  return round(session, {BusMessage{session, dao, sender, kind, std::move(payload)}}).front();
}

std::vector<BusMessage> MessageBus::session_transcript(std::uint64_t session) const {
  std::vector<BusMessage> out;
  for (const auto& m : transcript_) {
    if (m.session_id == session) out.push_back(m);
  }
  return out;
}

std::size_t MessageBus::count(std::uint64_t session, MessageKind kind) const {
  return std::count_if(transcript_.begin(), transcript_.end(),
                       [&](const BusMessage& m) { return m.session_id == session && m.kind == kind; });
}

std::string MessageBus::dump_json(std::optional<std::uint64_t> session) const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : transcript_) {
    if (session && m.session_id != *session) continue;
    out.push_back({{"session", m.session_id},
                   {"dao", m.dao == Dao::kSender ? "sender" : "receiver"},
                   {"sender", m.sender},
                   {"kind", kind_name(m.kind)},
                   {"raw_len", m.payload.size()},
                   {"accounted_len", m.accounted_len()},
                   {"payload", to_hex(m.payload)}});
  }
  return out.dump(2);
}

// ---------------------------------------------------------------------------
// Party state

const Share& PartyState::signing_share() const {
  if (long_term) return *long_term;
  if (derivation && derivation->my_share()) return *derivation->my_share();
  throw DomainError("party holds no signing share");
}

Bytes PartyState::serialize() const {
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(dao));
  put_u32(out, index);
  out.push_back(long_term ? 1 : 0);
  if (long_term) {
    put_u32(out, long_term->index);
    append(out, long_term->value.to_bytes());
  }
  out.push_back(derivation ? 1 : 0);
  if (derivation) {
    const Bytes d = derivation->serialize();
    put_u64(out, d.size());
    append(out, d);
  }
  put_u64(out, erased_epochs.size());
  for (auto e : erased_epochs) put_u64(out, e);
  put_point_field(out, dh_term);
  put_point_field(out, shared_secret);
  out.push_back(rho ? 1 : 0);
  if (rho) append(out, rho->to_bytes());
  out.push_back(one_time ? 1 : 0);
  if (one_time) {
    put_u32(out, one_time->index);
    append(out, one_time->secret.to_bytes());
    append(out, one_time->pub.to_bytes());
  }
  return out;
}

void PartyState::erase_session(std::optional<std::uint64_t> epoch) {
  if (dh_term) *dh_term = GroupPoint::identity();
  if (shared_secret) *shared_secret = GroupPoint::identity();
  if (rho) rho->wipe();
  if (one_time) one_time->wipe();
  dh_term.reset();
  shared_secret.reset();
  rho.reset();
  one_time.reset();
  if (epoch) erased_epochs.insert(*epoch);
}

std::vector<Bytes> SessionSecrets::encodings() const {
  std::vector<Bytes> out;
  auto add_point = [&](const GroupPoint& p) {
    if (p.is_identity()) return;
    const auto enc = p.to_bytes();
    out.emplace_back(enc.begin(), enc.end());
    out.emplace_back(enc.begin() + 1, enc.end());
  };
  auto add_scalar = [&](const Scalar& s) {
    const auto enc = s.to_bytes();
    out.emplace_back(enc.begin(), enc.end());
  };
  for (const auto& t : dh_terms) add_point(t);
  if (sender_secret) add_point(*sender_secret);
  if (receiver_secret) add_point(*receiver_secret);
  if (sender_rho) add_scalar(*sender_rho);
  if (receiver_rho) add_scalar(*receiver_rho);
  for (const auto& o : one_time) add_scalar(o.secret);
  return out;
}

// ---------------------------------------------------------------------------
// Ledger

Ledger::Ledger(std::filesystem::path path) : path_(std::move(path)) {}

const LedgerEntry& Ledger::at(std::size_t index) const {
  if (index >= entries_.size()) throw LedgerError("no ledger entry " + std::to_string(index));
  return entries_[index];
}

std::size_t Ledger::submit(const GroupPoint& payer, ChainTranscript transcript) {
  const PaymentMessage m = decode_payment(transcript.payment_message);
  if (!(m.dest == transcript.dest) || m.tag != transcript.tag || m.label != transcript.label) {
    throw LedgerError("transcript fields disagree with the payment message");
  }
  if (transcript.spend_message || transcript.spend_sig) throw LedgerError("a new entry cannot be spent");
  entries_.push_back(LedgerEntry{payer, std::move(transcript), LedgerStatus::kPending});
  persist(entries_.size() - 1);
  return entries_.size() - 1;
}

void Ledger::confirm(std::size_t index) {
  if (index >= entries_.size()) throw LedgerError("no ledger entry " + std::to_string(index));
  LedgerEntry& e = entries_[index];
  if (e.status != LedgerStatus::kPending) throw LedgerError("only pending entries can be confirmed");
  if (!ts_verify(e.payer, e.transcript.payment_message, e.transcript.payment_sig)) {
    throw LedgerError("payment signature does not verify under the payer key");
  }
  e.status = LedgerStatus::kConfirmed;
  persist(index);
}

void Ledger::mark_spent(std::size_t index, Bytes spend_message, const Signature& spend_sig) {
  if (index >= entries_.size()) throw LedgerError("no ledger entry " + std::to_string(index));
  LedgerEntry& e = entries_[index];
  if (e.status != LedgerStatus::kConfirmed) throw LedgerError("only confirmed entries can be spent");
  const SpendMessage m = decode_spend(spend_message);
  if (!(m.dest == e.transcript.dest) || m.tag != e.transcript.tag) {
    throw LedgerError("spend message names a different output");
  }
  if (!ts_verify(e.transcript.dest, spend_message, spend_sig)) {
    throw LedgerError("spend signature does not verify under the destination key");
  }
  e.transcript.spend_message = std::move(spend_message);
  e.transcript.spend_sig = spend_sig;
  e.status = LedgerStatus::kSpent;
  persist(index);
}

void Ledger::persist(std::size_t index) const {
  if (!path_) return;
  Bytes record;
  const Bytes enc = encode_ledger_entry(entries_[index]);
  put_u32(record, static_cast<std::uint32_t>(index));
  put_u32(record, static_cast<std::uint32_t>(enc.size()));
  append(record, enc);
  std::ofstream f(*path_, std::ios::binary | std::ios::app);
  if (!f) throw LedgerError("cannot open ledger file " + path_->string());
  f.write(reinterpret_cast<const char*>(record.data()), static_cast<std::streamsize>(record.size()));
  if (!f) throw LedgerError("cannot append to ledger file " + path_->string());
}

Ledger Ledger::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LedgerError("cannot open ledger file " + path.string());
  const Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::vector<LedgerEntry> entries;
  std::size_t pos = 0;
  auto u32 = [&]() {
    if (pos + 4 > data.size()) throw LedgerError("ledger file truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data[pos++];
    return v;
  };
  while (pos < data.size()) {
    const std::uint32_t index = u32();
    const std::uint32_t len = u32();
    if (pos + len > data.size()) throw LedgerError("ledger file truncated");
    LedgerEntry e = decode_ledger_entry(ByteView(data.data() + pos, len));
    pos += len;
    if (index == entries.size()) {
      if (e.status != LedgerStatus::kPending) throw LedgerError("ledger file adds an entry past pending");
      entries.push_back(std::move(e));
    } else if (index < entries.size()) {
      if (static_cast<int>(e.status) != static_cast<int>(entries[index].status) + 1) {
        throw LedgerError("ledger file moves an entry backwards or skips a status");
      }
      entries[index] = std::move(e);
    } else {
      throw LedgerError("ledger file skips an entry index");
    }
  }
  // Replay through the validating transitions.
  Ledger out;
  for (const auto& e : entries) {
    ChainTranscript t = e.transcript;
    t.spend_message.reset();
    t.spend_sig.reset();
    const std::size_t i = out.submit(e.payer, std::move(t));
    if (e.status >= LedgerStatus::kConfirmed) out.confirm(i);
    if (e.status == LedgerStatus::kSpent) out.mark_spent(i, *e.transcript.spend_message, *e.transcript.spend_sig);
  }
  out.path_ = path;
  return out;
}

// ---------------------------------------------------------------------------
// Deployment

void DeploymentConfig::validate() const {
  auto side = [](std::uint32_t n, std::uint32_t t, const char* name) {
    if (n == 0 || t == 0 || t > n) {
      throw ConfigError(std::string(name) + " DAO needs 1 <= t <= n, got n=" + std::to_string(n) +
                        " t=" + std::to_string(t));
    }
  };
  side(n1, t1, "sender");
  side(n2, t2, "receiver");
}

Deployment setup_deployment(const DeploymentConfig& config, Rng& rng, const SetupFaults& faults) {
  config.validate();
  Deployment dep;
  dep.config = config;
  dep.bus = MessageBus(rng.next_u64());

  DkgResult sender = run_dkg(config.n1, config.t1, rng, faults.sender_dkg);
  for (const auto& set : sender.parties) {
    PartyState p;
    p.dao = Dao::kSender;
    p.index = set.shares.front().index;
    p.long_term = set.shares.front();
    dep.senders.push_back(std::move(p));
  }
  dep.sender_pub = sender.parties.front().aggregate;
  dep.sender_public_shares = sender.parties.front().public_shares;
  dep.sender_complaints = sender.complaints;

  DkgResult receiver = run_dkg(config.n2, config.t2, rng, faults.receiver_dkg);
  Bytes commitments;
  for (const auto& c : receiver.qualified_commitments) {
    put_u32(commitments, c.dealer);
    for (const auto& p : c.coeff_commits) append(commitments, p.to_bytes());
  }
  const ChainCode root_cc = sha256(commitments);
  for (const auto& set : receiver.parties) {
    PartyState p;
    p.dao = Dao::kReceiver;
    p.index = set.shares.front().index;
    p.derivation = DerivationState::root(set, root_cc);
    dep.receivers.push_back(std::move(p));
  }
  dep.receiver_complaints = receiver.complaints;
  return dep;
}

bool states_consistent(const Deployment& dep) {
  const auto& first = *dep.receivers.front().derivation;
  for (const auto& r : dep.receivers) {
    if (!r.derivation || !r.derivation->same_public_state(first)) return false;
    if (r.derivation->consumed_tags() != first.consumed_tags()) return false;
    const auto& share = r.derivation->my_share();
    if (!share || !(base_mul(share->value) == first.public_share(share->index))) return false;
  }
  for (const auto& s : dep.senders) {
    if (!s.long_term || !(base_mul(s.long_term->value) == dep.sender_public_shares[s.index - 1])) return false;
  }
  std::vector<PartyIndex> set = everyone(dep.config.n1);
  set.resize(dep.config.t1);
  std::vector<GroupPoint> pubs(dep.sender_public_shares.begin(), dep.sender_public_shares.begin() + dep.config.t1);
  if (!(reconstruct_in_exponent(set, pubs) == dep.sender_pub)) return false;
  set = everyone(dep.config.n2);
  set.resize(dep.config.t2);
  pubs.assign(first.public_shares().begin(), first.public_shares().begin() + dep.config.t2);
  return reconstruct_in_exponent(set, pubs) == first.aggregate_pub();
}

// ---------------------------------------------------------------------------
// Phase I

Phase1Result phase1_run(Deployment& dep, const SessionOptions& options, Rng& rng) {
  const auto& cfg = dep.config;
  const ResolvedSets senders = resolve_sets(options.s1, options.t1, cfg.n1, cfg.t1, "sender", false);
  const PartyIndex coordinator = options.receiver_coordinator;
  if (coordinator == 0 || coordinator > cfg.n2) throw ConfigError("receiver coordinator out of range");

  Phase1Result out;
  StepTimings& timing = out.timings;
  const std::uint64_t session = dep.bus.open_session();
  out.session = session;

  // Step 1.1: the coordinator derives the child descriptor.
  const DerivationTag tag = options.tag ? *options.tag : DerivationTag::random(rng);
  ChildPublic child;
  {
    Stopwatch sw(timing.dkd_ms);
    child = derive_child_public(*dep.receivers[coordinator - 1].derivation, tag);
  }
  const SessionDescriptor descriptor{child.child_pub, child.child_cc, tag};
  child.offset.wipe();
  out.descriptor = descriptor;
  const Bytes descriptor_bytes = encode_descriptor(descriptor);
  dep.bus.post(session, Dao::kReceiver, coordinator, MessageKind::kDescriptor, descriptor_bytes);

  if (options.descriptor_cross_check) {
    std::vector<BusMessage> echoes;
    for (const auto& r : dep.receivers) {
      DerivationTag fed = tag;
      if (options.faults.divergent_tag && options.faults.divergent_tag->first == r.index) {
        fed = options.faults.divergent_tag->second;
      }
      ChildPublic mine = derive_child_public(*r.derivation, fed);
      mine.offset.wipe();
      echoes.push_back(BusMessage{0, Dao::kReceiver, r.index, MessageKind::kDescriptorEcho,
                                  encode_descriptor(SessionDescriptor{mine.child_pub, mine.child_cc, fed})});
    }
    std::vector<PartyIndex> divergent;
    for (const auto& m : dep.bus.round(session, std::move(echoes))) {
      if (m.payload != descriptor_bytes) divergent.push_back(m.sender);
    }
    std::sort(divergent.begin(), divergent.end());
    if (!divergent.empty()) {
      throw DivergentDerivation(divergent, "receiver parties disagree on the child descriptor");
    }
  }

  PaymentMessage pay{options.mode, descriptor.child_pub, options.amount, tag, std::nullopt};
  if (options.mode == PaymentMode::kAnonymous) {
    // Step 1.2: commit, open, aggregate, derive the destination.
    std::vector<PartialDH> partials;
    {
      Stopwatch sw(timing.dsag_sender_ms);
      for (auto i : senders.s) {
        partials.push_back(sender_partial_dh(*dep.senders[i - 1].long_term, descriptor.child_pub, &rng));
        dep.senders[i - 1].dh_term = partials.back().term;
      }
    }
    if (options.secret_probe) {
      for (const auto& p : partials) options.secret_probe->dh_terms.push_back(p.term);
    }

    std::vector<BusMessage> commits, openings;
    for (const auto& p : partials) {
      commits.push_back(BusMessage{0, Dao::kSender, p.index, MessageKind::kDhCommitment,
                                   encode_commitment(*p.commitment)});
    }
    const auto commit_by = by_sender(dep.bus.round(session, std::move(commits)));
    for (const auto& p : partials) {
      GroupPoint opened = p.term;
      if (options.faults.bad_opening && *options.faults.bad_opening == p.index) opened += GroupPoint::generator();
      openings.push_back(BusMessage{0, Dao::kSender, p.index, MessageKind::kDhOpening,
                                    encode_opening(DhOpening{opened, *p.opening_nonce})});
    }
    const auto open_by = by_sender(dep.bus.round(session, std::move(openings)));
    for (auto& p : partials) p.term = GroupPoint::identity();

    std::vector<PartialDH> received;
    for (const auto& [i, payload] : open_by) {
      const DhOpening o = decode_opening(payload);
      received.push_back(PartialDH{i, o.term, decode_commitment(commit_by.at(i)), o.nonce});
    }

    GroupPoint omega;
    StealthDestination dest;
    const StealthLabel label = StealthLabel::random(rng);
    try {
      Stopwatch sw(timing.dsag_sender_ms);
      omega = aggregate_shared_secret(received, cfg.t1);
      dest = make_destination(omega, descriptor.child_pub, label, tag);
    } catch (...) {
      erase_all(dep.senders, senders.s, std::nullopt, dep.audit, "abort-1.2");
      throw;
    }
    for (auto i : senders.s) {
      dep.senders[i - 1].shared_secret = omega;
      dep.senders[i - 1].rho = stealth_offset(omega, label);
    }
    if (options.secret_probe) {
      options.secret_probe->sender_secret = omega;
      options.secret_probe->sender_rho = stealth_offset(omega, label);
    }
    omega = GroupPoint::identity();
    for (auto& p : received) p.term = GroupPoint::identity();
    dep.bus.post(session, Dao::kSender, senders.s.front(), MessageKind::kSessionMetadata,
                 encode_metadata(SessionMetadata{tag, label}));
    erase_all(dep.senders, senders.s, std::nullopt, dep.audit, "erase-1.2");

    pay.dest = dest.dest;
    pay.label = label;
  }

  // Step 1.3: sign m_pay under A.
  const Bytes m_pay = encode_payment(pay);
  std::vector<Share> signer_shares;
  for (auto i : senders.t) signer_shares.push_back(*dep.senders[i - 1].long_term);
  const Signature sig = bus_sign(
      dep.bus, session, Dao::kSender, signer_shares, [&](PartyIndex i) { return dep.sender_public_shares[i - 1]; },
      dep.sender_pub, m_pay, rng, options.faults.bad_pay_partial, timing.pay_sign_ms);
  for (auto& s : signer_shares) s.value.wipe();

  out.transcript = ChainTranscript{m_pay, sig, pay.dest, tag, pay.label, std::nullopt, std::nullopt};
  out.ledger_index = dep.ledger.submit(dep.sender_pub, out.transcript);
  dep.ledger.confirm(out.ledger_index);
  dep.outstanding[tag] = Deployment::Outstanding{descriptor, session};
  return out;
}

// ---------------------------------------------------------------------------
// Phase II

Phase2Result phase2_run(Deployment& dep, std::size_t ledger_index, const SessionOptions& options, Rng& rng) {
  const auto& cfg = dep.config;
  const LedgerEntry entry = dep.ledger.at(ledger_index);
  if (entry.status != LedgerStatus::kConfirmed) throw LedgerError("only confirmed entries can be redeemed");
  const ResolvedSets receivers = resolve_sets(options.s2, options.t2, cfg.n2, cfg.t2, "receiver", true);

  Phase2Result out;
  out.transcript = entry.transcript;
  StepTimings& timing = out.timings;

  const auto known = dep.outstanding.find(entry.transcript.tag);
  if (known == dep.outstanding.end()) return out;
  const std::uint64_t session = known->second.session;
  const DerivationTag tag = entry.transcript.tag;
  const bool anonymous = entry.transcript.label.has_value();

  // Step 2.1: every party evolves its own state.
  std::vector<DerivationState> children;
  for (const auto& r : dep.receivers) children.push_back(derive_child(*r.derivation, tag));
  std::vector<PartyIndex> divergent;
  for (std::size_t j = 1; j < children.size(); ++j) {
    if (!children[j].same_public_state(children[0])) divergent.push_back(static_cast<PartyIndex>(j + 1));
  }
  if (!divergent.empty()) throw DivergentDerivation(divergent, "receiver parties derived different child states");
  const DerivationState& child = children[0];
  auto child_share = [&](PartyIndex j) -> const Share& { return *children[j - 1].my_share(); };

  GroupPoint signing_pub = child.aggregate_pub();
  std::vector<Share> signer_shares;
  std::function<GroupPoint(PartyIndex)> signer_public;

  if (anonymous) {
    std::vector<PartialDH> partials;
    GroupPoint omega;
    bool match = false;
    const StealthDestination candidate{entry.transcript.dest, tag, *entry.transcript.label};
    {
      Stopwatch sw(timing.dsag_receiver_ms);
      for (auto j : receivers.s) {
        partials.push_back(receiver_partial_dh(child_share(j), entry.payer));
        dep.receivers[j - 1].dh_term = partials.back().term;
      }
      omega = aggregate_shared_secret(partials, cfg.t2, OpeningCheck::kSkip);
      match = detect(candidate, child.aggregate_pub(), omega);
    }
    if (options.secret_probe) {
      for (const auto& p : partials) options.secret_probe->dh_terms.push_back(p.term);
      options.secret_probe->receiver_secret = omega;
    }
    if (!match) {
      erase_all(dep.receivers, receivers.s, std::nullopt, dep.audit, "skip-2.1");
      return out;
    }

    // Step 2.2: one-time shares, published with the DH terms.
    Scalar rho;
    std::vector<OneTimeShare> one_time;
    {
      Stopwatch sw(timing.dsag_receiver_ms);
      rho = stealth_offset(omega, candidate.label);
      for (auto j : receivers.s) one_time.push_back(recover_one_time_share(child_share(j), rho));
    }
    for (std::size_t k = 0; k < receivers.s.size(); ++k) {
      PartyState& p = dep.receivers[receivers.s[k] - 1];
      p.shared_secret = omega;
      p.rho = rho;
      p.one_time = one_time[k];
    }
    if (options.secret_probe) {
      options.secret_probe->receiver_rho = rho;
      for (const auto& o : one_time) options.secret_probe->one_time.push_back(o);
    }

    std::vector<BusMessage> shares_out;
    for (std::size_t k = 0; k < receivers.s.size(); ++k) {
      GroupPoint published = one_time[k].pub;
      if (options.faults.bad_one_time_share && *options.faults.bad_one_time_share == one_time[k].index) {
        published += GroupPoint::generator();
      }
      shares_out.push_back(BusMessage{0, Dao::kReceiver, one_time[k].index, MessageKind::kReceiverShare,
                                      encode_receiver_share(ReceiverShare{partials[k].term, published})});
    }
    PublicShareList publics;
    for (const auto& [j, payload] : by_sender(dep.bus.round(session, std::move(shares_out)))) {
      publics.emplace_back(j, decode_receiver_share(payload).one_time);
    }
    try {
      Stopwatch sw(timing.dsag_receiver_ms);
      if (options.per_share_check) {
        verify_one_time_shares_per_share(publics, entry.transcript.dest, child.public_shares(), rho);
      } else {
        verify_one_time_shares(publics, entry.transcript.dest);
      }
    } catch (...) {
      rho.wipe();
      for (auto& o : one_time) o.wipe();
      erase_all(dep.receivers, receivers.s, std::nullopt, dep.audit, "abort-2.2");
      throw;
    }

    signing_pub = entry.transcript.dest;
    std::map<PartyIndex, GroupPoint> pub_by;
    for (const auto& [j, p] : publics) pub_by[j] = p;
    for (const auto& o : one_time) {
      if (std::binary_search(receivers.t.begin(), receivers.t.end(), o.index)) {
        signer_shares.push_back(Share{o.index, o.secret});
      }
    }
    signer_public = [pub_by](PartyIndex j) { return pub_by.at(j); };
    rho.wipe();
    for (auto& o : one_time) o.wipe();
  } else {
    if (!(entry.transcript.dest == child.aggregate_pub())) return out;
    for (auto j : receivers.t) signer_shares.push_back(child_share(j));
    signer_public = [&child](PartyIndex j) { return child.public_share(j); };
  }

  // Step 2.3: redeem under the destination key.
  const Bytes m_spend = encode_spend(SpendMessage{entry.transcript.dest, tag, decode_payment(entry.transcript.payment_message).amount});
  Signature sig;
  try {
    sig = bus_sign(dep.bus, session, Dao::kReceiver, signer_shares, signer_public, signing_pub, m_spend, rng,
                   std::nullopt, timing.spend_sign_ms);
  } catch (...) {
    for (auto& s : signer_shares) s.value.wipe();
    erase_all(dep.receivers, receivers.s, std::nullopt, dep.audit, "abort-2.3");
    throw;
  }
  for (auto& s : signer_shares) s.value.wipe();
  dep.ledger.mark_spent(ledger_index, m_spend, sig);

  for (std::size_t j = 0; j < dep.receivers.size(); ++j) {
    PartyState& p = dep.receivers[j];
    p.derivation->wipe_share();
    p.derivation = children[j].with_consumed(tag);
    children[j].wipe_share();
    p.erase_session(p.derivation->epoch());
    if (dep.audit) dep.audit(p, "erase-2.3");
  }
  dep.outstanding.erase(known);

  out.owned = true;
  out.transcript = dep.ledger.at(ledger_index).transcript;
  return out;
}

// ---------------------------------------------------------------------------
// Scan

ScanResult scan_ledger(const Deployment& dep) {
  ScanResult out;
  const auto& lineage = *dep.receivers.front().derivation;
  const std::uint32_t t2 = dep.config.t2;

  struct Candidate {
    DerivationTag tag;
    DerivationState child;
    std::vector<Share> shares;
  };
  std::vector<Candidate> candidates;
  for (const auto& [tag, o] : dep.outstanding) {
    Candidate c{tag, derive_child(lineage, tag), {}};
    for (PartyIndex j = 1; j <= t2; ++j) c.shares.push_back(*derive_child(*dep.receivers[j - 1].derivation, tag).my_share());
    candidates.push_back(std::move(c));
  }

  for (std::size_t idx = 0; idx < dep.ledger.size(); ++idx) {
    const LedgerEntry& e = dep.ledger.at(idx);
    if (e.status == LedgerStatus::kSpent) continue;
    if (lineage.is_consumed(e.transcript.tag)) {
      out.notes.emplace_back(idx, "TagConsumed");
      continue;
    }
    for (const auto& c : candidates) {
      bool match = false;
      if (e.transcript.label) {
        std::vector<PartialDH> partials;
        for (const auto& s : c.shares) partials.push_back(receiver_partial_dh(s, e.payer));
        const GroupPoint omega = aggregate_shared_secret(partials, t2, OpeningCheck::kSkip);
        match = detect(StealthDestination{e.transcript.dest, e.transcript.tag, *e.transcript.label},
                       c.child.aggregate_pub(), omega);
      } else {
        match = e.transcript.dest == c.child.aggregate_pub();
      }
      if (match) {
        out.owned.push_back(idx);
        break;
      }
    }
  }
  for (auto& c : candidates) {
    c.child.wipe_share();
    for (auto& s : c.shares) s.value.wipe();
  }
  return out;
}

}  // namespace dao2
