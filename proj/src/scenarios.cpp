// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <thread>

#include "dao2/errors.hpp"
#include "dao2/hash.hpp"
#include "dao2/protocol.hpp"

namespace dao2 {
namespace {

struct ScenarioName {
  FaultScenario scenario;
  std::string_view name;
};

constexpr ScenarioName kNames[] = {
    {FaultScenario::kNone, "none"},
    {FaultScenario::kBadDkgShare, "bad-dkg-share"},
    {FaultScenario::kBadDhOpening, "bad-dh-opening"},
    {FaultScenario::kBadOneTimeShare, "bad-one-time-share"},
    {FaultScenario::kSubThresholdSign, "sub-threshold-sign"},
    {FaultScenario::kReusedTag, "reused-tag"},
    {FaultScenario::kMismatchedDerivationState, "mismatched-derivation-state"},
};

std::vector<PartyIndex> without(std::uint32_t n, PartyIndex excluded) {
  std::vector<PartyIndex> out;
  for (PartyIndex j = 1; j <= n; ++j) {
    if (j != excluded) out.push_back(j);
  }
  return out;
}

// One full transfer; true when the entry ends up spent.
bool transfer(Deployment& dep, Rng& rng, SessionOptions options = {}) {
  const Phase1Result p1 = phase1_run(dep, options, rng);
  options.tag.reset();
  options.faults = {};
  const Phase2Result p2 = phase2_run(dep, p1.ledger_index, options, rng);
  return p2.owned && dep.ledger.at(p1.ledger_index).status == LedgerStatus::kSpent;
}

std::string with_party(std::string text, PartyIndex j) { return text + " (party " + std::to_string(j) + ")"; }

void run_scenario(FaultScenario scenario, const DeploymentConfig& config, DeterministicRng& rng, FaultOutcome& out,
                  Deployment& dep) {
  switch (scenario) {
    case FaultScenario::kNone: {
      dep = setup_deployment(config, rng);
      out.completed = transfer(dep, rng);
      out.detected = out.completed && dep.sender_complaints.empty() && dep.receiver_complaints.empty();
      out.summary = "no fault detected";
      return;
    }

    case FaultScenario::kBadDkgShare: {
      const PartyIndex dealer = static_cast<PartyIndex>(1 + rng.uniform(config.n1));
      const PartyIndex victim = config.n1 > 1 ? dealer % config.n1 + 1 : dealer;
      SetupFaults faults;
      faults.sender_dkg = [dealer, victim](DealtShare& s) {
        if (s.dealer == dealer && s.recipient == victim) s.value += Scalar::one();
      };
      dep = setup_deployment(config, rng, faults);
      out.culprit = dealer;
      for (const auto& c : dep.sender_complaints) out.culprits.push_back(c.dealer);
      out.detected = out.culprits.size() == 1 && out.culprits.front() == dealer &&
                     dep.sender_complaints.front().accuser == victim;
      out.error_name = "DkgComplaint";
      out.completed = transfer(dep, rng);
      out.summary = with_party("DkgComplaint detected, dealer excluded", dealer);
      return;
    }

    case FaultScenario::kBadDhOpening: {
      dep = setup_deployment(config, rng);
      const PartyIndex bad = static_cast<PartyIndex>(1 + rng.uniform(config.n1));
      SessionOptions options;
      options.faults.bad_opening = bad;
      try {
        phase1_run(dep, options, rng);
      } catch (const InconsistentContribution& e) {
        out.error_name = e.name();
        out.culprit = e.party();
        out.detected = e.party() == bad;
      }
      out.summary = with_party(out.error_name + " detected", out.culprit.value_or(0));
      if (config.n1 > config.t1) {
        SessionOptions retry;
        retry.s1 = without(config.n1, bad);
        out.completed = transfer(dep, rng, retry);
      }
      return;
    }

    case FaultScenario::kBadOneTimeShare: {
      dep = setup_deployment(config, rng);
      const PartyIndex bad = static_cast<PartyIndex>(1 + rng.uniform(config.n2));
      const Phase1Result p1 = phase1_run(dep, {}, rng);
      SessionOptions options;
      options.faults.bad_one_time_share = bad;
      bool aggregate_fired = false;
      try {
        phase2_run(dep, p1.ledger_index, options, rng);
      } catch (const InconsistentShares& e) {
        out.error_name = e.name();
        aggregate_fired = true;
      }
      options.per_share_check = true;
      try {
        phase2_run(dep, p1.ledger_index, options, rng);
      } catch (const MisbehavingParty& e) {
        out.culprit = e.party();
      }
      out.detected = aggregate_fired && out.culprit == bad;
      out.summary = out.error_name + " detected";
      if (config.n2 > config.t2) {
        SessionOptions retry;
        retry.s2 = without(config.n2, bad);
        const Phase2Result p2 = phase2_run(dep, p1.ledger_index, retry, rng);
        out.completed = p2.owned && dep.ledger.at(p1.ledger_index).status == LedgerStatus::kSpent;
      }
      return;
    }

    case FaultScenario::kSubThresholdSign: {
      dep = setup_deployment(config, rng);
      if (config.t1 < 2) {
        out.summary = "sub-threshold signer set needs t1 >= 2";
        return;
      }
      SessionOptions options;
      for (PartyIndex i = 1; i < config.t1; ++i) options.t1.push_back(i);
      const std::size_t before = dep.bus.transcript().size();
      try {
        phase1_run(dep, options, rng);
      } catch (const SubThreshold& e) {
        out.error_name = e.name();
      }
      const bool silent = dep.bus.transcript().size() == before && dep.ledger.size() == 0;
      out.detected = out.error_name == "SubThreshold" && silent;
      out.summary = "SubThreshold rejected";
      out.completed = transfer(dep, rng);
      return;
    }

    case FaultScenario::kReusedTag: {
      dep = setup_deployment(config, rng);
      SessionOptions options;
      options.tag = DerivationTag::random(rng);
      out.completed = transfer(dep, rng, options);
      const std::size_t entries = dep.ledger.size();
      try {
        phase1_run(dep, options, rng);
      } catch (const TagConsumed& e) {
        out.error_name = e.name();
      }
      out.detected = out.error_name == "TagConsumed" && dep.ledger.size() == entries;
      out.summary = "TagConsumed rejected";
      out.completed = out.completed && transfer(dep, rng);
      return;
    }

    case FaultScenario::kMismatchedDerivationState: {
      dep = setup_deployment(config, rng);
      const PartyIndex victim = static_cast<PartyIndex>(1 + rng.uniform(config.n2));
      SessionOptions options;
      options.descriptor_cross_check = true;
      options.faults.divergent_tag = std::make_pair(victim, DerivationTag::random(rng));
      try {
        phase1_run(dep, options, rng);
      } catch (const DivergentDerivation& e) {
        out.error_name = e.name();
        out.culprits = e.parties();
      }
      std::size_t dh_messages = 0;
      for (const auto& m : dep.bus.transcript()) {
        if (m.kind == MessageKind::kDhCommitment || m.kind == MessageKind::kDhOpening) ++dh_messages;
      }
      out.detected = out.culprits == std::vector<PartyIndex>{victim} && dh_messages == 0;
      if (out.detected) out.culprit = victim;
      out.summary = with_party("DivergentDerivation detected", victim);
      SessionOptions retry;
      retry.descriptor_cross_check = true;
      out.completed = transfer(dep, rng, retry);
      return;
    }
  }
}

// Straight-line single-key stealth payment over the same inputs.
struct OracleResult {
  GroupPoint dest;
  Scalar offset;
  Scalar one_time_key;
};

OracleResult single_user_oracle(const Scalar& a, const Scalar& b, const GroupPoint& scan_pub, const ChainCode& cc,
                                const DerivationTag& tag, const StealthLabel& label) {
  const GroupPoint spend_pub = base_mul(b);
  Bytes msg;
  append(msg, spend_pub.to_bytes());
  append(msg, tag.bytes);
  const Digest64 mac = hmac_sha512(cc, msg);
  const Scalar omega = Scalar::from_bytes_reduce(ByteView(mac.data(), 32));
  const Scalar child_secret = b + omega;
  const GroupPoint child_pub = base_mul(child_secret);

  // Payer side: σ from a·B'. Payee side: σ' from b'·A. Both must agree.
  auto sigma_of = [&](const GroupPoint& shared) {
    Bytes buf;
    append(buf, shared.to_bytes());
    append(buf, label.bytes);
    const Digest32 h = sha256(buf);
    return Scalar::from_bytes_reduce(h);
  };
  const Scalar sigma = sigma_of(a * child_pub);
  const Scalar sigma_payee = sigma_of(child_secret * scan_pub);

  OracleResult out;
  out.dest = child_pub + base_mul(sigma);
  out.offset = sigma == sigma_payee ? sigma : Scalar::zero();
  out.one_time_key = child_secret + sigma_payee;
  return out;
}

bool oracle_schnorr_verify(const GroupPoint& pub, ByteView message, const Signature& sig) {
  if (pub.is_identity() || sig.r.is_identity()) return false;
  Bytes buf;
  append(buf, sig.r.to_bytes());
  append(buf, pub.to_bytes());
  append(buf, message);
  const Scalar e = Scalar::from_bytes_reduce(sha256(buf));
  return base_mul(sig.s) == sig.r + e * pub;
}

}  // namespace

std::string_view scenario_name(FaultScenario s) {
  for (const auto& n : kNames) {
    if (n.scenario == s) return n.name;
  }
  return "unknown";
}

std::optional<FaultScenario> parse_scenario(std::string_view name) {
  for (const auto& n : kNames) {
    if (n.name == name) return n.scenario;
  }
  return std::nullopt;
}

const std::vector<FaultScenario>& all_scenarios() {
  static const std::vector<FaultScenario> list = {
      FaultScenario::kBadDkgShare,      FaultScenario::kBadDhOpening, FaultScenario::kBadOneTimeShare,
      FaultScenario::kSubThresholdSign, FaultScenario::kReusedTag,    FaultScenario::kMismatchedDerivationState,
  };
  return list;
}

FaultOutcome inject_fault(FaultScenario scenario, std::uint64_t seed, const DeploymentConfig& config) {
  config.validate();
  FaultOutcome out;
  out.scenario = scenario;
  DeterministicRng rng(seed, "fault-injection");
  Deployment dep;
  try {
    run_scenario(scenario, config, rng, out, dep);
  } catch (const Error& e) {
    out.detected = false;
    out.completed = false;
    out.summary = std::string("unexpected ") + std::string(e.name()) + ": " + e.what();
  }
  out.states_consistent = !dep.receivers.empty() && states_consistent(dep);
  return out;
}

SingleUserReport degenerate_single_user(std::uint64_t seed) {
  DeterministicRng rng(seed, "single-user");
  Deployment dep = setup_deployment(DeploymentConfig{1, 1, 1, 1}, rng);

  const Scalar a = dep.senders[0].long_term->value;
  const DerivationState root = *dep.receivers[0].derivation;
  const Scalar b = root.my_share()->value;

  SessionSecrets probe;
  SessionOptions options;
  options.secret_probe = &probe;
  const Phase1Result p1 = phase1_run(dep, options, rng);
  const Phase2Result p2 = phase2_run(dep, p1.ledger_index, options, rng);

  SingleUserReport report;
  const OracleResult oracle = single_user_oracle(a, b, dep.sender_pub, root.chaincode(), p1.transcript.tag,
                                                 *p1.transcript.label);
  const auto dest = p2.transcript.dest.to_bytes();
  report.destination.assign(dest.begin(), dest.end());
  report.destination_equal = p2.transcript.dest == oracle.dest && base_mul(oracle.one_time_key) == oracle.dest;
  if (probe.sender_rho && probe.receiver_rho) {
    const auto rho = probe.receiver_rho->to_bytes();
    report.offset.assign(rho.begin(), rho.end());
    report.offset_equal = *probe.sender_rho == oracle.offset && *probe.receiver_rho == oracle.offset;
  }
  if (probe.one_time.size() == 1) {
    const auto d = probe.one_time[0].secret.to_bytes();
    report.one_time_key.assign(d.begin(), d.end());
    report.one_time_key_equal = probe.one_time[0].secret == oracle.one_time_key;
  }

  const auto& t = p2.transcript;
  bool same = p2.owned && t.spend_message && t.spend_sig;
  if (same) {
    const bool pay_ours = ts_verify(dep.sender_pub, t.payment_message, t.payment_sig);
    const bool spend_ours = ts_verify(t.dest, *t.spend_message, *t.spend_sig);
    same = pay_ours == oracle_schnorr_verify(base_mul(a), t.payment_message, t.payment_sig) &&
           spend_ours == oracle_schnorr_verify(oracle.dest, *t.spend_message, *t.spend_sig) && pay_ours && spend_ours;
    // A forged variant must fail on both paths.
    Signature forged = *t.spend_sig;
    forged.s += Scalar::one();
    same = same && !ts_verify(t.dest, *t.spend_message, forged) &&
           !oracle_schnorr_verify(oracle.dest, *t.spend_message, forged);
  }
  report.signatures_equal = same;
  return report;
}

std::vector<SessionDigest> run_sessions(const DeploymentConfig& config, std::span<const std::uint64_t> seeds,
                                        unsigned threads) {
  config.validate();
  std::vector<SessionDigest> out(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t k = next++; k < seeds.size(); k = next++) {
      try {
        DeterministicRng rng(seeds[k], "stress");
        Deployment dep = setup_deployment(config, rng);
        const Phase1Result p1 = phase1_run(dep, {}, rng);
        const Phase2Result p2 = phase2_run(dep, p1.ledger_index, {}, rng);
        SessionDigest& d = out[k];
        d.seed = seeds[k];
        const auto dest = p2.transcript.dest.to_bytes();
        d.destination.assign(dest.begin(), dest.end());
        const auto pay = p2.transcript.payment_sig.to_bytes();
        d.pay_sig.assign(pay.begin(), pay.end());
        if (p2.transcript.spend_sig) {
          const auto spend = p2.transcript.spend_sig->to_bytes();
          d.spend_sig.assign(spend.begin(), spend.end());
        }
        for (const auto& r : dep.receivers) append(d.final_state, r.derivation->public_view().serialize());
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };

  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < count; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace dao2
