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

#include "doctest.h"

#include <map>
#include <random>
#include <set>

#include "bedrock/error.hpp"
#include "bedrock/harness.hpp"

using namespace bedrock;
using S = CoherenceState;

namespace {

// Loads, stores and atomics to a small pool of 8-byte words.
std::vector<TraceOp> word_trace(uint64_t seed, int cores, size_t n) {
  std::mt19937_64 rng(seed);
  std::vector<TraceOp> out;
  for (size_t i = 0; i < n; ++i) {
    TraceOp op;
    op.lce = static_cast<int>(rng() % cores);
    op.addr = 0x80000000ull + (rng() % 24) * 64 + (rng() % 2) * 8;
    switch (rng() % 6) {
      case 0: case 1: op.op = TraceKind::kLd; break;
      case 2: case 3: op.op = TraceKind::kSt; break;
      case 4: op.op = TraceKind::kAmoAdd; break;
      default: op.op = TraceKind::kAmoSwap; break;
    }
    op.data = rng() & 0xffffffff;
    out.push_back(op);
  }
  return out;
}

// Serial replay over the global completion order: every load and atomic
// must return the last value written to its word.
size_t serial_mismatches(const std::vector<TraceOp>& trace,
                         const RunResult& r) {
  std::map<uint64_t, uint64_t> mem;
  size_t bad = 0;
  for (const CompletedOp& c : r.completions) {
    const TraceOp& op = trace[c.index];
    uint64_t& cur = mem[op.addr];
    switch (op.op) {
      case TraceKind::kLd: bad += c.value != cur; break;
      case TraceKind::kSt: cur = op.data; break;
      case TraceKind::kAmoAdd: bad += c.value != cur; cur += op.data; break;
      case TraceKind::kAmoSwap: bad += c.value != cur; cur = op.data; break;
      default: break;
    }
  }
  return bad;
}

}  // namespace

TEST_CASE("serial replay reproduces every returned value") {
  for (EngineKind e : {EngineKind::kFsm, EngineKind::kUcode}) {
    for (Protocol p : {Protocol::kMoesif, Protocol::kMesi}) {
      for (int cores : {2, 4}) {
        SimConfig cfg;
        cfg.cores = cores;
        cfg.engine = e;
        cfg.protocol = p;
        auto trace = word_trace(11 + cores, cores, 3000);
        RunResult r = run_trace(cfg, trace);
        CAPTURE(to_string(e));
        CAPTURE(to_string(p));
        CHECK(r.ok());
        REQUIRE(r.completions.size() == trace.size());
        CHECK(serial_mismatches(trace, r) == 0);
      }
    }
  }
}

TEST_CASE("free dispatch keeps the invariants") {
  SimConfig cfg;
  cfg.cores = 4;
  auto trace = word_trace(5, 4, 2000);
  RunOptions o;
  o.dispatch = Dispatch::kFree;
  RunResult r = run_trace(cfg, trace, o);
  CHECK(r.ok());
  CHECK(serial_mismatches(trace, r) == 0);
}

TEST_CASE("runs are deterministic") {
  SimConfig cfg;
  cfg.cores = 4;
  cfg.engine = EngineKind::kUcode;
  auto trace = word_trace(9, 4, 1000);
  RunResult a = run_trace(cfg, trace);
  RunResult b = run_trace(cfg, trace);
  CHECK(format_report(a) == format_report(b));
  CHECK(a.stats.cycles == b.stats.cycles);
}

TEST_CASE("random workloads") {
  WorkloadParams p;
  p.cores = 4;
  p.ops = 2000;
  auto a = random_workload(42, p);
  auto b = random_workload(42, p);
  auto c = random_workload(43, p);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.size() == 2000);
  for (const TraceOp& op : a) {
    CHECK(op.lce >= 0);
    CHECK(op.lce < 2 * p.cores);
  }
  p.write_ratio = 0;
  p.atomic_ratio = 0;
  for (const TraceOp& op : random_workload(7, p)) {
    CHECK(op.op != TraceKind::kSt);
    CHECK(op.op != TraceKind::kAmoAdd);
    CHECK(op.op != TraceKind::kAmoSwap);
  }
}

TEST_CASE("engines agree on a random workload") {
  WorkloadParams p;
  p.cores = 4;
  p.ops = 3000;
  SimConfig cfg;
  cfg.cores = 4;
  EquivalenceReport r = compare_engines(cfg, random_workload(3, p));
  CHECK(r.equivalent());
  CHECK(r.ucode_cycles >= r.fsm_cycles);
  CHECK(r.ratio() >= 1.0);
}

TEST_CASE("trace text") {
  auto t = parse_trace("# comment\n0 ST 80000000 2a\n1 LD.4 80000004\n2 FENCE\n", 4);
  REQUIRE(t.size() == 3);
  CHECK(t[0].op == TraceKind::kSt);
  CHECK(t[0].data == 0x2a);
  CHECK(t[1].size == 4);
  CHECK(parse_trace(format_trace(t), 4) == t);
  CHECK_THROWS_AS(parse_trace("9 LD 80000000\n", 4), Error);
  CHECK_THROWS_AS(parse_trace("0 JUMP 80000000\n", 4), Error);
}

TEST_CASE("config keys") {
  SimConfig c = parse_config("# two\ncores = 4\nengine = ucode\nprotocol = mesi\n"
                             "random_permute = true\n");
  CHECK(c.cores == 4);
  CHECK(c.engine == EngineKind::kUcode);
  CHECK(c.protocol == Protocol::kMesi);
  CHECK(c.random_permute);
  SimConfig again = parse_config(format_config(c));
  CHECK(format_config(again) == format_config(c));

  set_config_key(c, "mem_latency", "7");
  CHECK(c.mem_latency == 7);
  CHECK_THROWS_AS(set_config_key(c, "colour", "red"), Error);
  CHECK_THROWS_AS(set_config_key(c, "cores", "many"), Error);
  try {
    parse_config("cores = 2\n\nbogus = 1\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("monitors flag SWMR and single-owner breaks") {
  SimConfig cfg;
  cfg.cores = 4;
  std::vector<uint8_t> data(64, 1);
  const uint64_t a = 0x80000040ull, b = 0x80000080ull, c = 0x800000c0ull;
  {
    System sys(cfg);
    sys.prepare_block(a, {{0, S::M}, {2, S::S}}, data);
    sys.monitor().on_state_change(0, a);
    sys.monitor().end_cycle();
    REQUIRE(sys.monitor().violations().size() == 1);
    CHECK(sys.monitor().violations()[0].invariant == "SWMR");
  }
  {
    System sys(cfg);
    sys.prepare_block(b, {{0, S::O}, {1, S::S}, {2, S::S}, {3, S::S}}, data);
    sys.monitor().on_state_change(0, b);
    sys.monitor().end_cycle();
    CHECK(sys.monitor().violations().empty());
  }
  {
    System sys(cfg);
    sys.prepare_block(c, {{0, S::O}, {1, S::F}}, data);
    sys.monitor().on_state_change(1, c);
    sys.monitor().end_cycle();
    REQUIRE(sys.monitor().violations().size() == 1);
    CHECK(sys.monitor().violations()[0].invariant == "SingleOwner");
  }
}

TEST_CASE("directory overhead") {
  OverheadParams p;
  for (int c : {2, 3, 16, 64}) {
    p.caches = c;
    CHECK(overhead_percent(p) == doctest::Approx(6.25));
  }
  p.scheme = OverheadScheme::kComplete;
  p.caches = 6;
  CHECK(overhead_percent(p) == doctest::Approx(100.0 * 37 / 512));
  p.scheme = OverheadScheme::kCoarse;
  p.caches = 64;
  p.coarse_bits = 8;
  CHECK(overhead_percent(p) == doctest::Approx(100.0 * 39 / 512));
  p.scheme = OverheadScheme::kDuplicateTag;
  p.pad = 1;
  CHECK(overhead_percent(p) == doctest::Approx(100.0 * 31 / 512));
  p.caches = 1;
  CHECK_THROWS_AS(overhead_percent(p), Error);
}

TEST_CASE("occupancy scenarios without a table cell") {
  OccupancyScenario sc{OccRow::kWriteIS, 8, 0, 1, ReplacementKind::kNone, S::I};
  try {
    validate_scenario(EngineKind::kFsm, sc);
    FAIL("expected SetupImpossible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSetupImpossible);
  }
  sc = {OccRow::kReadExclII, 8, 0, 1, ReplacementKind::kClean, S::I};
  CHECK_NOTHROW(validate_scenario(EngineKind::kFsm, sc));
  CHECK_THROWS_AS(validate_scenario(EngineKind::kUcode, sc), Error);
  sc = {OccRow::kWriteSS, 8, 2, 1, ReplacementKind::kDirty, S::I};
  CHECK_THROWS_AS(validate_scenario(EngineKind::kFsm, sc), Error);
  CHECK(parse_occ_row("write_of_of") == OccRow::kWriteOFOF);
  CHECK_FALSE(parse_occ_row("write_x").has_value());
}
