/*
 * Copyright 2026 The bedrock-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BEDROCK_HARNESS_HPP_
#define BEDROCK_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bedrock/system.hpp"

namespace bedrock {

struct SimConfig : SystemConfig {
  std::string memory_image;  // optional preload file
};

// Flat `key = value` text, `#` comments. Unknown keys are a Parse error.
SimConfig parse_config(std::string_view text);
// One key of the file format; throws Parse. Does not validate the result.
void set_config_key(SimConfig& cfg, std::string_view key,
                    std::string_view value);
SimConfig load_config(const std::string& path);
std::string format_config(const SimConfig& cfg);

// ---- Traces ----

enum class TraceKind : uint8_t {
  kLd,
  kSt,
  kLdu,
  kStu,
  kAmoAdd,
  kAmoSwap,
  kLr,
  kSc,
  kFence,
};
const char* to_string(TraceKind k);

struct TraceOp {
  int lce = 0;
  TraceKind op = TraceKind::kLd;
  uint64_t addr = 0;
  int size = 8;
  uint64_t data = 0;

  bool operator==(const TraceOp&) const = default;
};

// `<lce_id> <OP>[.size] <hex addr> [<hex data>]` per line; size defaults to 8.
std::vector<TraceOp> parse_trace(std::string_view text, int num_lces);
std::vector<TraceOp> load_trace(const std::string& path, int num_lces);
std::string format_trace(const std::vector<TraceOp>& trace);

// ---- Trace execution ----

enum class Dispatch : uint8_t {
  // Each LCE issues its own ops in order as soon as it is free.
  kFree,
  // Global trace order; an op also waits until no earlier op to its way
  // group is in flight. Engine timing cannot change the outcome.
  kOrdered,
};

struct RunOptions {
  Dispatch dispatch = Dispatch::kOrdered;
  bool abort_on_violation = true;
};

struct CompletedOp {
  size_t index = 0;  // position in the trace
  uint64_t cycle = 0;
  uint64_t value = 0;
  bool miss = false;
};

struct ClassOccupancy {
  uint64_t count = 0;
  uint64_t busy_cycles = 0;
};

struct RunStats {
  uint64_t cycles = 0;
  uint64_t ops = 0;
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t messages = 0;
  uint64_t transactions = 0;
  uint64_t busy_cycles = 0;
  uint64_t stall_cycles = 0;
  uint64_t invalidations = 0;
  uint64_t transfers = 0;
  uint64_t upgrades = 0;
  uint64_t replacements = 0;
  std::map<std::string, ClassOccupancy> by_class;
};

struct LineSnapshot {
  int lce = 0;
  int set = 0;
  int way = 0;
  uint64_t tag = 0;
  CoherenceState state = CoherenceState::I;
  std::vector<uint8_t> data;

  bool operator==(const LineSnapshot&) const = default;
};

struct DirSnapshot {
  int lce = 0;
  int set = 0;
  int way = 0;
  uint64_t tag = 0;
  CoherenceState state = CoherenceState::I;

  bool operator==(const DirSnapshot&) const = default;
};

struct Snapshot {
  std::map<uint64_t, std::vector<uint8_t>> memory;
  std::vector<LineSnapshot> lines;       // valid lines only
  std::vector<DirSnapshot> directory;    // valid entries only
};
Snapshot snapshot(const System& sys);

struct RunResult {
  Snapshot snapshot;
  RunStats stats;
  std::vector<Violation> violations;
  std::vector<CompletedOp> completions;  // global completion order
  uint64_t checked_loads = 0;
  bool ok() const { return violations.empty(); }
};

// Throws MonitorViolation (cycle and way group in the message) when
// abort_on_violation is set.
RunResult run_trace(const SimConfig& cfg, const std::vector<TraceOp>& trace,
                    const RunOptions& opts = {});

// Intervals [admission, requester completion] of cacheable transactions
// that overlap within a way group.
std::vector<Violation> way_group_serial(
    const System& sys, const std::vector<std::vector<uint64_t>>& miss_done);

std::string format_report(const RunResult& r);

// ---- Engine equivalence ----

struct EquivalenceReport {
  bool memory_equal = true;
  bool caches_equal = true;
  bool directory_equal = true;
  uint64_t fsm_cycles = 0;
  uint64_t ucode_cycles = 0;
  size_t fsm_violations = 0;
  size_t ucode_violations = 0;
  std::vector<std::string> differences;  // first few

  bool equivalent() const {
    return memory_equal && caches_equal && directory_equal &&
           fsm_violations == 0 && ucode_violations == 0;
  }
  double ratio() const;  // ucode cycles / fsm cycles
};

EquivalenceReport compare_engines(const SimConfig& cfg,
                                  const std::vector<TraceOp>& trace);
std::string format_report(const EquivalenceReport& r);

// ---- Random workloads ----

struct WorkloadParams {
  int cores = 2;
  size_t ops = 1000;
  int footprint = 256;       // shared blocks
  int private_blocks = 512;  // per core
  double write_ratio = 0.3;
  double sharing = 0.5;      // fraction of ops to the shared pool
  double atomic_ratio = 0.05;
  double ifetch_ratio = 0.1;
  double uncached_ratio = 0.0;
  int block_bytes = 64;
  uint64_t base = 0x80000000ull;
  uint64_t io_base = 0x10000000ull;
};

std::vector<TraceOp> random_workload(uint64_t seed, const WorkloadParams& p);

// ---- Occupancy ----

enum class OccRow : uint8_t {
  kReadExclII,
  kReadNeII,
  kReadIS,
  kReadIEClean,
  kReadIEDirty,
  kReadIM,
  kReadIOF,
  kWriteII,
  kWriteIS,
  kWriteIEM,
  kWriteIOF,
  kWriteSS,
  kWriteSOF,
  kWriteOFOF,
};
inline constexpr int kNumOccRows = 14;
const char* to_string(OccRow r);
std::optional<OccRow> parse_occ_row(std::string_view name);

struct OccupancyScenario {
  OccRow row = OccRow::kReadExclII;
  int cores = 8;
  int sharers = 0;  // S as used by the row's formula
  int beats = 1;    // N
  ReplacementKind replacement = ReplacementKind::kNone;
  // Which of the row's owner states to prepare (E or M, O or F); I picks
  // the first.
  CoherenceState variant = CoherenceState::I;
};

struct OccupancyRow {
  EngineKind engine = EngineKind::kFsm;
  OccupancyScenario scenario;
  std::string request_class;
  std::string lce_state;
  std::string dir_state;
  uint64_t measured = 0;
  uint64_t model = 0;
  bool match = false;
};

// Closed forms of the occupancy table. Throws SetupImpossible for
// combinations the table leaves blank.
uint64_t occupancy_model(EngineKind engine, const OccupancyScenario& sc);
// Throws SetupImpossible when the scenario has no table cell.
void validate_scenario(EngineKind engine, const OccupancyScenario& sc);
// `before_issue` sees the prepared system just before the request issues.
OccupancyRow setup_and_measure(
    const SimConfig& base, EngineKind engine, const OccupancyScenario& sc,
    const std::function<void(System&)>& before_issue = {});
// Every valid S for every row, both owner variants, with and without
// replacement; N from `beats`.
std::vector<OccupancyScenario> occupancy_grid(EngineKind engine, int cores,
                                              const std::vector<int>& beats);
std::vector<OccupancyRow> occupancy_sweep(const SimConfig& base,
                                          EngineKind engine, int cores,
                                          const std::vector<int>& beats);
std::string occupancy_csv_header();
std::string occupancy_csv_line(const OccupancyRow& row);

// ---- Directory overhead ----

enum class OverheadScheme : uint8_t { kDuplicateTag, kComplete, kCoarse };

struct OverheadParams {
  OverheadScheme scheme = OverheadScheme::kDuplicateTag;
  int caches = 2;
  int coarse_bits = 8;
  int tag_bits = 28;
  int state_bits = 3;
  int block_bits = 512;
  // Entry width rounding in bits; 0 picks 32 for DuplicateTag and 1 (no
  // rounding) for the sharer-vector schemes.
  int pad = 0;
};

// Percent of data storage spent on one directory entry per cached block.
double overhead_percent(const OverheadParams& p);

}  // namespace bedrock

#endif  // BEDROCK_HARNESS_HPP_
