// SPDX-License-Identifier: Apache-2.0
//
// Command implementations behind the dao2 executable. Each returns its
// report as JSON plus a rendered table, so tests can drive them directly.

#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "dao2/protocol.hpp"

namespace dao2::cli {

enum class Format { kTable, kJson };

struct CommandResult {
  int exit_code = 0;
  nlohmann::json report;
  std::string table;

  std::string render(Format format) const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

// Default seed: $DAO2_SEED when set and numeric, else 1.
std::uint64_t default_seed();

struct DemoOptions {
  std::uint32_t n1 = 3;
  std::uint32_t n2 = 3;
  std::uint32_t t = 2;
  PaymentMode mode = PaymentMode::kAnonymous;
  std::uint64_t seed = 1;
};

// Setup plus one full transfer.
CommandResult cmd_demo(const DemoOptions& options);

struct BenchConfig {
  std::vector<std::uint32_t> n_values = {3, 5, 7, 10, 15, 20};
  std::uint32_t t = 2;
  std::uint32_t repetitions = 10;
  std::uint64_t seed = 1;

  void validate() const;
};

// Least-squares coefficient of determination of y against x.
double r_squared(const std::vector<double>& x, const std::vector<double>& y);
double median(std::vector<double> values);

struct BenchRow {
  std::uint32_t n = 0;
  StepTimings median_ms;
  CommBreakdown comm;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double dsag_sender_r2 = 0;
  double dsag_receiver_r2 = 0;
  double sign_ratio = 0;  // max/min median signing time across n
};

BenchReport run_bench(const BenchConfig& config);
CommandResult cmd_bench(const BenchConfig& config);

struct DepthOptions {
  std::uint32_t depth = 1000;
  std::uint32_t n = 3;
  std::uint32_t t = 2;
  std::uint32_t repetitions = 31;
  std::uint64_t seed = 1;
};

struct DepthPoint {
  std::uint32_t depth = 0;
  double median_ms = 0;
};

struct DepthReport {
  std::vector<DepthPoint> points;  // checkpoints 1, 10, 100, 1000 up to the depth
  double flatness = 0;             // max/min of the checkpoint medians
  bool states_equal = false;       // all parties agree at the final depth
  bool key_moved = false;          // final aggregate key differs from depth 1
};

DepthReport run_depth(const DepthOptions& options);
CommandResult cmd_depth(const DepthOptions& options);

// Exit 0 iff the scenario's expected detection fired and no honest state
// diverged.
CommandResult cmd_attack(FaultScenario scenario, std::uint64_t seed);

}  // namespace dao2::cli
