// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <sstream>

#include "dao2/cli.hpp"
#include "dao2/errors.hpp"

namespace dao2::cli {
namespace {

using nlohmann::json;

std::string hex_of(const GroupPoint& p) {
  if (p.is_identity()) return std::string(2 * kPointBytes, '0');
  return to_hex(p.to_bytes());
}

json entry_json(std::size_t index, const LedgerEntry& e) {
  const PaymentMessage pay = decode_payment(e.transcript.payment_message);
  json j = {{"index", index},
            {"status", status_name(e.status)},
            {"mode", pay.mode == PaymentMode::kAnonymous ? "anonymous" : "plain"},
            {"payer", hex_of(e.payer)},
            {"dest", hex_of(e.transcript.dest)},
            {"amount", pay.amount},
            {"tag", to_hex(e.transcript.tag.bytes)},
            {"payment_sig", to_hex(e.transcript.payment_sig.to_bytes())}};
  if (e.transcript.label) j["label"] = to_hex(e.transcript.label->bytes);
  if (e.transcript.spend_sig) j["spend_sig"] = to_hex(e.transcript.spend_sig->to_bytes());
  return j;
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

double sign_ms(const StepTimings& t) { return (t.pay_sign_ms + t.spend_sign_ms) / 2; }

json timings_json(const StepTimings& t) {
  return {{"dkd_ms", t.dkd_ms},
          {"dsag_sender_ms", t.dsag_sender_ms},
          {"pay_sign_ms", t.pay_sign_ms},
          {"dsag_receiver_ms", t.dsag_receiver_ms},
          {"spend_sign_ms", t.spend_sign_ms},
          {"sign_ms", sign_ms(t)}};
}

json comm_json(const CommBreakdown& c) {
  return {{"dkd", c.dkd_bytes},           {"dsag_sender", c.dsag_sender_bytes},
          {"signatures", c.sig_bytes},     {"dsag_receiver", c.dsag_receiver_bytes},
          {"total", c.total},             {"other", c.other_bytes},
          {"raw_total", c.raw_total}};
}

CommandResult failure(json report, std::string_view error, const std::string& message, int code) {
  CommandResult out;
  report["ok"] = false;
  report["error"] = std::string(error);
  report["message"] = message;
  out.report = std::move(report);
  out.table = std::string(error) + ": " + message + "\n";
  out.exit_code = code;
  return out;
}

}  // namespace

std::string CommandResult::render(Format format) const {
  if (format == Format::kJson) return report.dump(2) + "\n";
  return table;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("DAO2_SEED");
  if (env == nullptr) return 1;
  std::uint64_t v = 0;
  const std::string_view s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return 1;
  return v;
}

// ---------------------------------------------------------------------------
// demo

CommandResult cmd_demo(const DemoOptions& options) {
  const DeploymentConfig config{options.n1, options.t, options.n2, options.t};
  json report = {{"command", "demo"},
                 {"seed", options.seed},
                 {"config",
                  {{"n1", config.n1},
                   {"t1", config.t1},
                   {"n2", config.n2},
                   {"t2", config.t2},
                   {"mode", options.mode == PaymentMode::kAnonymous ? "anonymous" : "plain"}}}};
  try {
    config.validate();
  } catch (const ConfigError& e) {
    return failure(std::move(report), e.name(), e.what(), kExitConfig);
  }

  DeterministicRng rng(options.seed, "demo");
  Deployment dep;
  try {
    dep = setup_deployment(config, rng);
    SessionOptions session;
    session.mode = options.mode;
    const Phase1Result p1 = phase1_run(dep, session, rng);
    const Phase2Result p2 = phase2_run(dep, p1.ledger_index, session, rng);
    if (!p2.owned) throw DomainError("receiver did not recognise its own payment");

    const bool anonymous = options.mode == PaymentMode::kAnonymous;
    json steps = json::array();
    auto step = [&](const char* id, const std::string& summary, double ms) {
      steps.push_back({{"step", id}, {"summary", summary}, {"ms", ms}});
    };
    step("1.1", "descriptor issued for child key " + hex_of(p1.descriptor.child_pub), p1.timings.dkd_ms);
    step("1.2", anonymous ? "stealth destination " + hex_of(p1.transcript.dest) : "plain payment, no stealth round",
         p1.timings.dsag_sender_ms);
    step("1.3", "payment signed by the sender DAO and confirmed", p1.timings.pay_sign_ms);
    step("2.1", "receiver DAO evolved to epoch " + std::to_string(dep.receivers[0].derivation->epoch()), 0.0);
    step("2.2", anonymous ? "one-time shares verified against the destination" : "no one-time shares in plain mode",
         p2.timings.dsag_receiver_ms);
    step("2.3", "output spent and session secrets erased", p2.timings.spend_sign_ms);

    json ledger = json::array();
    for (std::size_t i = 0; i < dep.ledger.size(); ++i) ledger.push_back(entry_json(i, dep.ledger.at(i)));

    report["ok"] = true;
    report["steps"] = steps;
    report["ledger"] = ledger;
    report["states_consistent"] = states_consistent(dep);
    report["transcript"] = json::parse(dep.bus.dump_json(p1.session));
    if (anonymous) report["comm"] = comm_json(account_session(dep.bus.session_transcript(p1.session), config.n1, config.n2));

    std::ostringstream t;
    t << "demo  n1=" << config.n1 << " n2=" << config.n2 << " t=" << options.t
      << " mode=" << report["config"]["mode"].get<std::string>() << " seed=" << options.seed << "\n";
    for (const auto& s : steps) {
      t << "  " << s["step"].get<std::string>() << "  " << std::setw(9) << fixed(s["ms"].get<double>()) << " ms  "
        << s["summary"].get<std::string>() << "\n";
    }
    t << "ledger\n";
    for (const auto& e : ledger) {
      t << "  #" << e["index"].get<std::size_t>() << " " << e["status"].get<std::string>() << " dest "
        << e["dest"].get<std::string>() << " amount " << e["amount"].get<std::uint64_t>() << "\n";
    }
    t << "bus messages: " << report["transcript"].size() << "\n";
    return CommandResult{kExitOk, std::move(report), t.str()};
  } catch (const ConfigError& e) {
    return failure(std::move(report), e.name(), e.what(), kExitConfig);
  } catch (const Error& e) {
    return failure(std::move(report), e.name(), e.what(), kExitFailure);
  }
}

// ---------------------------------------------------------------------------
// bench

void BenchConfig::validate() const {
  if (n_values.empty()) throw ConfigError("bench needs at least one n");
  if (t == 0) throw ConfigError("bench needs t >= 1");
  if (repetitions == 0) throw ConfigError("bench needs at least one repetition");
  for (auto n : n_values) {
    if (n < t) throw ConfigError("bench needs n >= t, got n=" + std::to_string(n));
  }
}

double median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2;
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return 0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0;
  return std::min(1.0, sxy * sxy / (sxx * syy));
}

BenchReport run_bench(const BenchConfig& config) {
  config.validate();
  struct Sweep {
    std::uint32_t n;
    DeterministicRng rng;
    Deployment dep;
    std::vector<double> dkd, sender, pay, receiver, spend;
    CommBreakdown comm;
  };
  std::vector<Sweep> sweeps;
  for (auto n : config.n_values) {
    Sweep s{n, DeterministicRng(config.seed, "bench-" + std::to_string(n)), {}, {}, {}, {}, {}, {}, {}};
    s.dep = setup_deployment({n, config.t, n, config.t}, s.rng);
    sweeps.push_back(std::move(s));
  }
  auto session = [](Sweep& s) {
    const Phase1Result p1 = phase1_run(s.dep, {}, s.rng);
    const Phase2Result p2 = phase2_run(s.dep, p1.ledger_index, {}, s.rng);
    return std::make_pair(p1, p2);
  };
  // Untimed warm-up, then repetitions interleaved across n so drift in
  // machine speed hits every column alike.
  for (auto& s : sweeps) session(s);
  for (std::uint32_t k = 0; k < config.repetitions; ++k) {
    for (auto& s : sweeps) {
      const auto [p1, p2] = session(s);
      s.dkd.push_back(p1.timings.dkd_ms);
      s.sender.push_back(p1.timings.dsag_sender_ms);
      s.pay.push_back(p1.timings.pay_sign_ms);
      s.receiver.push_back(p2.timings.dsag_receiver_ms);
      s.spend.push_back(p2.timings.spend_sign_ms);
      if (k == 0) s.comm = account_session(s.dep.bus.session_transcript(p1.session), s.n);
    }
  }
  BenchReport out;
  for (const auto& s : sweeps) {
    out.rows.push_back(BenchRow{
        s.n, StepTimings{median(s.dkd), median(s.sender), median(s.pay), median(s.receiver), median(s.spend)}, s.comm});
  }

  std::vector<double> xs, ys_sender, ys_receiver, signs;
  for (const auto& r : out.rows) {
    xs.push_back(r.n);
    ys_sender.push_back(r.median_ms.dsag_sender_ms);
    ys_receiver.push_back(r.median_ms.dsag_receiver_ms);
    signs.push_back(sign_ms(r.median_ms));
  }
  out.dsag_sender_r2 = r_squared(xs, ys_sender);
  out.dsag_receiver_r2 = r_squared(xs, ys_receiver);
  const auto [lo, hi] = std::minmax_element(signs.begin(), signs.end());
  out.sign_ratio = *lo > 0 ? *hi / *lo : 0;
  return out;
}

CommandResult cmd_bench(const BenchConfig& config) {
  json report = {{"command", "bench"},
                 {"seed", config.seed},
                 {"config", {{"n_values", config.n_values}, {"t", config.t}, {"repetitions", config.repetitions}}}};
  BenchReport bench;
  try {
    bench = run_bench(config);
  } catch (const ConfigError& e) {
    return failure(std::move(report), e.name(), e.what(), kExitConfig);
  } catch (const Error& e) {
    return failure(std::move(report), e.name(), e.what(), kExitFailure);
  }

  json rows = json::array();
  std::ostringstream t;
  t << "bench  t=" << config.t << " repetitions=" << config.repetitions << " seed=" << config.seed
    << "  (median ms; accounted bytes)\n";
  t << std::setw(4) << "n" << std::setw(10) << "dkd" << std::setw(10) << "dsag-s" << std::setw(10) << "dsag-r"
    << std::setw(10) << "sign" << " |" << std::setw(6) << "dkd" << std::setw(8) << "dsag-s" << std::setw(6) << "sig"
    << std::setw(8) << "dsag-r" << std::setw(7) << "total" << "\n";
  for (const auto& r : bench.rows) {
    rows.push_back({{"n", r.n}, {"timings", timings_json(r.median_ms)}, {"comm", comm_json(r.comm)}});
    t << std::setw(4) << r.n << std::setw(10) << fixed(r.median_ms.dkd_ms) << std::setw(10)
      << fixed(r.median_ms.dsag_sender_ms) << std::setw(10) << fixed(r.median_ms.dsag_receiver_ms) << std::setw(10)
      << fixed(sign_ms(r.median_ms)) << " |" << std::setw(6) << r.comm.dkd_bytes << std::setw(8)
      << r.comm.dsag_sender_bytes << std::setw(6) << r.comm.sig_bytes << std::setw(8) << r.comm.dsag_receiver_bytes
      << std::setw(7) << r.comm.total << "\n";
  }
  t << "linearity R^2: dsag-sender " << fixed(bench.dsag_sender_r2, 4) << ", dsag-receiver "
    << fixed(bench.dsag_receiver_r2, 4) << "\n";
  t << "sign max/min ratio: " << fixed(bench.sign_ratio, 3) << "\n";

  report["ok"] = true;
  report["rows"] = rows;
  report["diagnostics"] = {{"dsag_sender_r2", bench.dsag_sender_r2},
                           {"dsag_receiver_r2", bench.dsag_receiver_r2},
                           {"sign_ratio", bench.sign_ratio}};
  return CommandResult{kExitOk, std::move(report), t.str()};
}

// ---------------------------------------------------------------------------
// depth

DepthReport run_depth(const DepthOptions& options) {
  if (options.depth == 0) throw ConfigError("depth must be at least 1");
  if (options.repetitions == 0) throw ConfigError("depth needs at least one repetition");
  DeterministicRng rng(options.seed, "depth");
  Deployment dep = setup_deployment({1, 1, options.n, options.t}, rng);
  std::vector<DerivationState> states;
  for (const auto& r : dep.receivers) states.push_back(*r.derivation);

  auto derive_all = [](const std::vector<DerivationState>& from, const DerivationTag& tag) {
    std::vector<DerivationState> next;
    next.reserve(from.size());
    for (const auto& s : from) next.push_back(derive_child(s, tag));
    return next;
  };

  // Build the lineage untimed, keeping the parent state of each checkpoint
  // derivation.
  DepthReport out;
  std::vector<std::pair<std::uint32_t, std::vector<DerivationState>>> snapshots;
  GroupPoint first_key;
  const std::uint32_t checkpoints[] = {1, 10, 100, 1000};
  for (std::uint32_t d = 1; d <= options.depth; ++d) {
    if (std::find(std::begin(checkpoints), std::end(checkpoints), d) != std::end(checkpoints)) {
      snapshots.emplace_back(d, states);
    }
    const DerivationTag tag = DerivationTag::random(rng);
    auto next = derive_all(states, tag);
    for (auto& s : states) s.wipe_share();
    for (auto& s : next) s = s.with_consumed(tag);
    states = std::move(next);
    if (d == 1) first_key = states[0].aggregate_pub();
  }

  // Samples interleaved across checkpoints, after one warm-up pass.
  std::vector<std::vector<double>> samples(snapshots.size());
  for (std::uint32_t k = 0; k <= options.repetitions; ++k) {
    for (std::size_t c = 0; c < snapshots.size(); ++c) {
      const DerivationTag probe = DerivationTag::random(rng);
      const auto start = std::chrono::steady_clock::now();
      auto discard = derive_all(snapshots[c].second, probe);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      for (auto& s : discard) s.wipe_share();
      if (k > 0) samples[c].push_back(ms);
    }
  }
  for (std::size_t c = 0; c < snapshots.size(); ++c) {
    out.points.push_back(DepthPoint{snapshots[c].first, median(samples[c])});
    for (auto& s : snapshots[c].second) s.wipe_share();
  }

  double lo = out.points.front().median_ms, hi = lo;
  for (const auto& p : out.points) {
    lo = std::min(lo, p.median_ms);
    hi = std::max(hi, p.median_ms);
  }
  out.flatness = lo > 0 ? hi / lo : 0;
  out.states_equal = true;
  for (const auto& s : states) {
    out.states_equal = out.states_equal && s.same_public_state(states[0]) &&
                       s.consumed_tags() == states[0].consumed_tags() &&
                       base_mul(s.my_share()->value) == states[0].public_share(s.my_share()->index);
  }
  const GroupPoint& root_key = dep.receivers[0].derivation->aggregate_pub();
  out.key_moved = options.depth == 1 ? !(states[0].aggregate_pub() == root_key)
                                     : !(states[0].aggregate_pub() == first_key);
  for (auto& s : states) s.wipe_share();
  return out;
}

CommandResult cmd_depth(const DepthOptions& options) {
  json report = {{"command", "depth"},
                 {"seed", options.seed},
                 {"config",
                  {{"depth", options.depth}, {"n", options.n}, {"t", options.t}, {"repetitions", options.repetitions}}}};
  DepthReport depth;
  try {
    if (options.t == 0 || options.t > options.n) throw ConfigError("depth needs 1 <= t <= n");
    depth = run_depth(options);
  } catch (const ConfigError& e) {
    return failure(std::move(report), e.name(), e.what(), kExitConfig);
  } catch (const Error& e) {
    return failure(std::move(report), e.name(), e.what(), kExitFailure);
  }
  json points = json::array();
  std::ostringstream t;
  t << "depth  n=" << options.n << " t=" << options.t << " depth=" << options.depth << " seed=" << options.seed
    << "\n";
  t << std::setw(8) << "depth" << std::setw(14) << "median ms" << "\n";
  for (const auto& p : depth.points) {
    points.push_back({{"depth", p.depth}, {"median_ms", p.median_ms}});
    t << std::setw(8) << p.depth << std::setw(14) << fixed(p.median_ms, 4) << "\n";
  }
  t << "flatness max/min: " << fixed(depth.flatness, 3) << "\n";
  t << "states equal across parties: " << (depth.states_equal ? "yes" : "no") << "\n";
  t << "aggregate key moved: " << (depth.key_moved ? "yes" : "no") << "\n";
  report["ok"] = true;
  report["points"] = points;
  report["flatness"] = depth.flatness;
  report["states_equal"] = depth.states_equal;
  report["key_moved"] = depth.key_moved;
  return CommandResult{depth.states_equal ? kExitOk : kExitFailure, std::move(report), t.str()};
}

// ---------------------------------------------------------------------------
// attack

CommandResult cmd_attack(FaultScenario scenario, std::uint64_t seed) {
  const FaultOutcome o = inject_fault(scenario, seed);
  const bool ok = o.detected && o.states_consistent;
  json report = {{"command", "attack"},
                 {"seed", seed},
                 {"scenario", std::string(scenario_name(scenario))},
                 {"ok", ok},
                 {"detected", o.detected},
                 {"error", o.error_name},
                 {"culprits", o.culprits},
                 {"completed", o.completed},
                 {"states_consistent", o.states_consistent},
                 {"summary", o.summary}};
  report["culprit"] = o.culprit ? json(*o.culprit) : json(nullptr);
  std::ostringstream t;
  t << o.summary << "\n";
  t << "  scenario: " << scenario_name(scenario) << "  seed: " << seed << "\n";
  if (o.culprit) t << "  culprit: party " << *o.culprit << "\n";
  t << "  session completed afterwards: " << (o.completed ? "yes" : "no") << "\n";
  t << "  honest states consistent: " << (o.states_consistent ? "yes" : "no") << "\n";
  return CommandResult{ok ? kExitOk : kExitFailure, std::move(report), t.str()};
}

}  // namespace dao2::cli
