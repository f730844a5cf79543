// SPDX-License-Identifier: Apache-2.0
//
// One transfer between two threshold-held organizations, simulated
// in-process over a recording message bus.
//
//   Phase I  (sender DAO pays)
//     1.1  a receiver coordinator derives δ = (B^(k), cc^(k), id^(k))
//     1.2  senders run the shared-secret round and publish D^(k), (id, ξ)
//     1.3  a signer set T1 signs m_pay under A; the ledger confirms
//   Phase II (receiver DAO redeems)
//     2.1  receivers evolve to B^(k), recompute Ω, detect D^(k)
//     2.2  one-time shares d_j = b_j^(k) + ρ, checked against D^(k)
//     2.3  T2 signs m_spend under D^(k); ledger marks spent; erase

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "dao2/dkd.hpp"
#include "dao2/dsag.hpp"
#include "dao2/sharing.hpp"
#include "dao2/tsig.hpp"
#include "dao2/wire.hpp"

namespace dao2 {

// ---------------------------------------------------------------------------
// Bus

// Delivers each round in a seeded, reproducible order and keeps the full
// transcript.
class MessageBus {
 public:
  explicit MessageBus(std::uint64_t seed);

  std::uint64_t open_session();

  // Stamps the messages with `session`, records the round and returns it
  // in delivery order.
  std::vector<BusMessage> round(std::uint64_t session, std::vector<BusMessage> messages);
  BusMessage post(std::uint64_t session, Dao dao, PartyIndex sender, MessageKind kind, Bytes payload);

  const std::vector<BusMessage>& transcript() const { return transcript_; }
  // Messages of one session, in delivery order.
  std::vector<BusMessage> session_transcript(std::uint64_t session) const;
  std::size_t count(std::uint64_t session, MessageKind kind) const;

  // JSON array of {session, dao, sender, kind, raw_len, accounted_len, payload}.
  std::string dump_json(std::optional<std::uint64_t> session = std::nullopt) const;

 private:
  DeterministicRng order_;
  std::uint64_t session_ = 0;
  std::vector<BusMessage> transcript_;
};

// ---------------------------------------------------------------------------
// Party state

struct PartyState {
  Dao dao = Dao::kSender;
  PartyIndex index = 0;
  std::optional<Share> long_term;            // a_i (sender parties)
  std::optional<DerivationState> derivation;  // b_j lineage (receiver parties)
  std::set<std::uint64_t> erased_epochs;

  // Per-session secrets, present only between computation and erasure.
  std::optional<GroupPoint> dh_term;      // Ω_i or Ω'_j
  std::optional<GroupPoint> shared_secret;  // Ω
  std::optional<Scalar> rho;
  std::optional<OneTimeShare> one_time;

  // The share this party signs with outside a redemption.
  const Share& signing_share() const;

  // Every field, secrets included, in a fixed layout.
  Bytes serialize() const;

  // Overwrites and drops the per-session secrets. Receivers record `epoch`.
  void erase_session(std::optional<std::uint64_t> epoch);
};

// Called after every erasure with the party and a short event name.
using AuditHook = std::function<void(const PartyState&, std::string_view)>;

// ---------------------------------------------------------------------------
// Ledger

class Ledger {
 public:
  Ledger() = default;
  // Every state change is appended to `path` as u32 index, u32 length,
  // encoded entry.
  explicit Ledger(std::filesystem::path path);

  // New pending entry; returns its index.
  std::size_t submit(const GroupPoint& payer, ChainTranscript transcript);
  // pending → confirmed; requires a valid payment signature under the payer.
  void confirm(std::size_t index);
  // confirmed → spent; requires a spend message for the entry's destination
  // and tag with a valid signature under that destination.
  void mark_spent(std::size_t index, Bytes spend_message, const Signature& spend_sig);

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  const LedgerEntry& at(std::size_t index) const;
  std::size_t size() const { return entries_.size(); }

  // Rebuilds a ledger from an append-only file, re-validating every entry.
  static Ledger load(const std::filesystem::path& path);

 private:
  void persist(std::size_t index) const;

  std::vector<LedgerEntry> entries_;
  std::optional<std::filesystem::path> path_;
};

// ---------------------------------------------------------------------------
// Deployment

struct DeploymentConfig {
  std::uint32_t n1 = 3;
  std::uint32_t t1 = 2;
  std::uint32_t n2 = 3;
  std::uint32_t t2 = 2;

  // Throws ConfigError unless 1 <= t <= n on both sides.
  void validate() const;
};

struct Deployment {
  DeploymentConfig config;
  std::vector<PartyState> senders;    // senders[i - 1] is party i
  std::vector<PartyState> receivers;  // receivers[j - 1] is party j
  GroupPoint sender_pub;              // A
  std::vector<GroupPoint> sender_public_shares;
  std::vector<DkgComplaint> sender_complaints;
  std::vector<DkgComplaint> receiver_complaints;
  Ledger ledger;
  MessageBus bus{0};
  AuditHook audit;
  // Descriptors issued by the receiver and not yet redeemed, by tag.
  struct Outstanding {
    SessionDescriptor descriptor;
    std::uint64_t session = 0;
  };
  std::map<DerivationTag, Outstanding> outstanding;
};

struct SetupFaults {
  DealTamper sender_dkg;
  DealTamper receiver_dkg;
};

// Runs both DKGs. The receiver root chaincode is SHA-256 over the
// qualified DKG commitments in dealer order.
Deployment setup_deployment(const DeploymentConfig& config, Rng& rng, const SetupFaults& faults = {});

// ---------------------------------------------------------------------------
// Sessions

// Scripted misbehaviour inside one session.
struct SessionFaults {
  std::optional<PartyIndex> bad_opening;          // sender opens term + G
  std::optional<PartyIndex> bad_one_time_share;   // receiver publishes D_j + G
  std::optional<PartyIndex> bad_pay_partial;      // sender signer adds 1 to s_i
  // Receiver party fed a different tag for the descriptor cross-check.
  std::optional<std::pair<PartyIndex, DerivationTag>> divergent_tag;
};

struct SessionSecrets {
  std::vector<GroupPoint> dh_terms;  // Ω_i and Ω'_j
  std::optional<GroupPoint> sender_secret;
  std::optional<GroupPoint> receiver_secret;
  std::optional<Scalar> sender_rho;
  std::optional<Scalar> receiver_rho;
  std::vector<OneTimeShare> one_time;

  // 32-byte scalars, and both the 33-byte encoding and 32-byte x of points.
  std::vector<Bytes> encodings() const;
};

struct SessionOptions {
  PaymentMode mode = PaymentMode::kAnonymous;
  std::uint64_t amount = 1;
  // Empty means everyone (S) or the first t of S (T).
  std::vector<PartyIndex> s1, t1, s2, t2;
  PartyIndex receiver_coordinator = 1;
  std::optional<DerivationTag> tag;  // sampled when absent
  bool descriptor_cross_check = false;
  bool per_share_check = false;
  SessionFaults faults;
  // Test hook: when set, receives every per-session secret before it is
  // erased.
  SessionSecrets* secret_probe = nullptr;
};

// Wall-clock milliseconds around the cryptographic work of each step.
struct StepTimings {
  double dkd_ms = 0;
  double dsag_sender_ms = 0;
  double pay_sign_ms = 0;
  double dsag_receiver_ms = 0;
  double spend_sign_ms = 0;
};

struct Phase1Result {
  std::uint64_t session = 0;
  std::size_t ledger_index = 0;
  SessionDescriptor descriptor;
  ChainTranscript transcript;
  StepTimings timings;
};

struct Phase2Result {
  bool owned = false;  // false: the entry was not ours and was skipped
  ChainTranscript transcript;
  StepTimings timings;
};

// Steps 1.1-1.3. Throws SubThreshold, InconsistentContribution,
// MisbehavingSigner, DivergentDerivation or TagConsumed.
Phase1Result phase1_run(Deployment& dep, const SessionOptions& options, Rng& rng);

// Steps 2.1-2.3 for one ledger entry. A destination that does not belong
// to this receiver is skipped with owned = false and no state change.
// Throws InconsistentShares / MisbehavingParty on bad one-time shares.
Phase2Result phase2_run(Deployment& dep, std::size_t ledger_index, const SessionOptions& options, Rng& rng);

struct ScanResult {
  std::vector<std::size_t> owned;
  std::vector<std::pair<std::size_t, std::string>> notes;
};

// detect() over every pending or confirmed entry against every outstanding
// descriptor. Entries whose tag the lineage already consumed are excluded
// with a note.
ScanResult scan_ledger(const Deployment& dep);

// All receiver parties agree on (epoch, B, cc, public shares) and all
// sender parties hold consistent shares of A.
bool states_consistent(const Deployment& dep);

// ---------------------------------------------------------------------------
// Fault injection

enum class FaultScenario {
  kNone,
  kBadDkgShare,
  kBadDhOpening,
  kBadOneTimeShare,
  kSubThresholdSign,
  kReusedTag,
  kMismatchedDerivationState,
};

std::string_view scenario_name(FaultScenario s);
std::optional<FaultScenario> parse_scenario(std::string_view name);
const std::vector<FaultScenario>& all_scenarios();

struct FaultOutcome {
  FaultScenario scenario = FaultScenario::kNone;
  bool detected = false;           // the expected detection fired
  std::string error_name;          // e.g. "InconsistentShares"; empty if none
  std::optional<PartyIndex> culprit;
  std::vector<PartyIndex> culprits;
  bool completed = false;          // a session redeemed after the fault
  bool states_consistent = false;  // honest parties never diverged
  std::string summary;
};

FaultOutcome inject_fault(FaultScenario scenario, std::uint64_t seed, const DeploymentConfig& config = {});

// ---------------------------------------------------------------------------
// Single-user reduction

struct SingleUserReport {
  bool destination_equal = false;
  bool offset_equal = false;
  bool one_time_key_equal = false;
  bool signatures_equal = false;  // same verification outcomes on both paths
  Bytes destination;
  Bytes offset;
  Bytes one_time_key;

  bool all_equal() const { return destination_equal && offset_equal && one_time_key_equal && signatures_equal; }
};

// n1 = n2 = t1 = t2 = 1: the full pipeline against a straight-line
// scan/spend-key stealth computation on the same inputs.
SingleUserReport degenerate_single_user(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Stress mode

struct SessionDigest {
  std::uint64_t seed = 0;
  Bytes destination;
  Bytes pay_sig;
  Bytes spend_sig;
  Bytes final_state;

  friend bool operator==(const SessionDigest&, const SessionDigest&) = default;
};

// One full anonymous transfer per seed on its own deployment, across
// `threads` worker threads. Results are in seed order and do not depend on
// the thread count.
std::vector<SessionDigest> run_sessions(const DeploymentConfig& config, std::span<const std::uint64_t> seeds,
                                        unsigned threads);

}  // namespace dao2
