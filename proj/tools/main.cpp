// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "dao2/cli.hpp"

using namespace dao2;
using namespace dao2::cli;

int main(int argc, char** argv) {
  CLI::App app{"dao2: private transfers between threshold-controlled organizations"};
  app.require_subcommand(1);

  std::uint64_t seed = default_seed();
  Format format = Format::kTable;
  std::string out_path;
  const std::map<std::string, Format> formats = {{"table", Format::kTable}, {"json", Format::kJson}};
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "RNG seed (default $DAO2_SEED or 1)");
    sub->add_option("--format", format, "table or json")->transform(CLI::CheckedTransformer(formats));
    sub->add_option("--out", out_path, "also write the output to this file");
  };

  DemoOptions demo;
  std::string mode = "anonymous";
  auto* demo_cmd = app.add_subcommand("demo", "setup and one full transfer");
  demo_cmd->add_option("--n1", demo.n1, "sender DAO size");
  demo_cmd->add_option("--n2", demo.n2, "receiver DAO size");
  demo_cmd->add_option("--t", demo.t, "threshold on both sides");
  demo_cmd->add_option("--mode", mode, "anonymous or plain")->check(CLI::IsMember({"anonymous", "plain"}));
  common(demo_cmd);

  BenchConfig bench;
  auto* bench_cmd = app.add_subcommand("bench", "timing and communication sweep over n");
  bench_cmd->add_option("--n", bench.n_values, "party counts")->delimiter(',');
  bench_cmd->add_option("--t", bench.t, "threshold");
  bench_cmd->add_option("--reps", bench.repetitions, "repetitions per n (median reported)");
  common(bench_cmd);

  DepthOptions depth;
  auto* depth_cmd = app.add_subcommand("depth", "per-derivation cost along a long lineage");
  depth_cmd->add_option("--depth", depth.depth, "number of derivations")->check(CLI::PositiveNumber);
  depth_cmd->add_option("--n", depth.n, "receiver DAO size");
  depth_cmd->add_option("--t", depth.t, "threshold");
  depth_cmd->add_option("--reps", depth.repetitions, "samples per checkpoint");
  common(depth_cmd);

  std::string scenario;
  std::vector<std::string> names = {"none"};
  for (auto s : all_scenarios()) names.emplace_back(scenario_name(s));
  auto* attack_cmd = app.add_subcommand("attack", "run one fault-injection scenario");
  attack_cmd->add_option("--scenario", scenario, "scenario name")->required()->check(CLI::IsMember(names));
  common(attack_cmd);

  CLI11_PARSE(app, argc, argv);

  CommandResult result;
  if (*demo_cmd) {
    demo.mode = mode == "plain" ? PaymentMode::kPlain : PaymentMode::kAnonymous;
    demo.seed = seed;
    result = cmd_demo(demo);
  } else if (*bench_cmd) {
    bench.seed = seed;
    result = cmd_bench(bench);
  } else if (*depth_cmd) {
    depth.seed = seed;
    result = cmd_depth(depth);
  } else {
    result = cmd_attack(*parse_scenario(scenario), seed);
  }

  const std::string text = result.render(format);
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    f << text;
    if (!f) {
      std::cerr << "cannot write " << out_path << "\n";
      return kExitFailure;
    }
  }
  if (result.exit_code != kExitOk && format == Format::kJson) {
    std::cerr << result.report.value("error", "error") << "\n";
  }
  return result.exit_code;
}
