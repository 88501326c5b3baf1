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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Expected values come from oracles written here, not from
// the library's own models.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "bedrock/checker.hpp"
#include "bedrock/directory.hpp"
#include "bedrock/error.hpp"
#include "bedrock/harness.hpp"
#include "bedrock/protocol.hpp"
#include "bedrock/ucode/assembler.hpp"

#ifndef BEDROCK_SOURCE_DIR
#define BEDROCK_SOURCE_DIR "."
#endif

namespace {

using namespace bedrock;
using S = CoherenceState;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---- Occupancy oracle ----

struct OracleRow {
  OccRow row;
  int fsm;
  int ucode;
  int s_coeff_offset;  // -1: no S term; else 2 * (S - offset)
  bool n_term;
  int s_lo;            // -1: S fixed at 0
  bool requester_miss;
  std::vector<S> owners;
};

const std::vector<OracleRow>& oracle_rows() {
  static const std::vector<OracleRow> rows = {
      {OccRow::kReadExclII, 8, 12, -1, false, -1, true, {}},
      {OccRow::kReadNeII, 8, 26, -1, false, -1, true, {}},
      {OccRow::kReadIS, 8, 26, -1, false, 1, true, {}},
      {OccRow::kReadIEClean, 9, 36, -1, false, -1, true, {}},
      {OccRow::kReadIEDirty, 9, 35, -1, true, -1, true, {}},
      {OccRow::kReadIM, 9, 32, -1, false, -1, true, {}},
      {OccRow::kReadIOF, 9, 27, -1, false, 0, true, {S::O, S::F}},
      {OccRow::kWriteII, 8, 23, -1, false, -1, true, {}},
      {OccRow::kWriteIS, 8, 24, 0, false, 1, true, {}},
      {OccRow::kWriteIEM, 9, 27, -1, false, -1, true, {S::E, S::M}},
      {OccRow::kWriteIOF, 9, 28, 0, false, 0, true, {S::O, S::F}},
      {OccRow::kWriteSS, 9, 24, 1, false, 1, false, {}},
      {OccRow::kWriteSOF, 9, 30, 0, false, 1, false, {S::O, S::F}},
      {OccRow::kWriteOFOF, 9, 24, 0, false, 0, false, {S::O, S::F}},
  };
  return rows;
}

uint64_t oracle_cycles(const OracleRow& r, EngineKind e,
                       const OccupancyScenario& sc) {
  const bool fsm = e == EngineKind::kFsm;
  int64_t v = (fsm ? r.fsm : r.ucode) + sc.cores / 2;
  if (r.s_coeff_offset >= 0) v += 2 * (sc.sharers - r.s_coeff_offset);
  if (r.n_term) v += sc.beats;
  if (sc.replacement == ReplacementKind::kClean) v += fsm ? 2 : 7;
  if (sc.replacement == ReplacementKind::kDirty) v += (fsm ? 1 : 6) + sc.beats;
  return static_cast<uint64_t>(v);
}

std::vector<OccupancyScenario> oracle_grid(EngineKind e, int cores) {
  std::vector<OccupancyScenario> out;
  for (const OracleRow& r : oracle_rows()) {
    std::vector<S> vars = r.owners.empty() ? std::vector<S>{S::I} : r.owners;
    int lo = r.s_lo < 0 ? 0 : r.s_lo;
    int hi = r.s_lo < 0 ? 0 : cores - 1;
    for (S v : vars)
      for (int s = lo; s <= hi; ++s)
        for (int n : {1, 8})
          for (ReplacementKind rk : {ReplacementKind::kNone,
                                     ReplacementKind::kClean,
                                     ReplacementKind::kDirty}) {
            if (rk != ReplacementKind::kNone &&
                (!r.requester_miss ||
                 (e == EngineKind::kUcode && r.row == OccRow::kReadExclII)))
              continue;
            out.push_back({r.row, cores, s, n, rk, v});
          }
  }
  return out;
}

Outcome occupancy(EngineKind e,
                  const std::function<bool(std::string&)>& examples) {
  SimConfig base;
  size_t total = 0, bad = 0;
  std::string first_bad;
  for (int cores : {2, 4, 8, 16}) {
    auto grid = oracle_grid(e, cores);
    if (grid.size() != occupancy_grid(e, cores, {1, 8}).size()) {
      ++bad;
      if (first_bad.empty())
        first_bad = "sweep size differs at C=" + std::to_string(cores);
    }
    for (const OccupancyScenario& sc : grid) {
      const OracleRow& r = oracle_rows()[static_cast<int>(sc.row)];
      OccupancyRow got = setup_and_measure(base, e, sc);
      ++total;
      if (got.measured != oracle_cycles(r, e, sc)) {
        ++bad;
        if (first_bad.empty()) first_bad = occupancy_csv_line(got);
      }
    }
  }
  std::string ex;
  bool ex_ok = examples(ex);
  Outcome o;
  o.pass = bad == 0 && ex_ok;
  std::ostringstream os;
  os << total << " scenarios, " << bad << " mismatches; " << ex;
  if (!first_bad.empty()) os << "; first mismatch: " << first_bad;
  o.detail = os.str();
  return o;
}

uint64_t measure(EngineKind e, OccRow row, int cores, int s = 0, int n = 1,
                 ReplacementKind rk = ReplacementKind::kNone,
                 const SimConfig& base = {}) {
  return setup_and_measure(base, e, {row, cores, s, n, rk, S::I}).measured;
}

Outcome criterion_fsm() {
  return occupancy(EngineKind::kFsm, [](std::string& out) {
    uint64_t a = measure(EngineKind::kFsm, OccRow::kReadExclII, 8);
    uint64_t b = measure(EngineKind::kFsm, OccRow::kWriteIS, 8, 3);
    uint64_t c = measure(EngineKind::kFsm, OccRow::kReadIEDirty, 8, 0, 8);
    out = "Read I/I C=8: " + std::to_string(a) +
          ", Write I/S S=3 C=8: " + std::to_string(b) +
          ", Read I/E dirty C=8 N=8: " + std::to_string(c);
    return a == 12 && b == 18 && c == 21;
  });
}

Outcome criterion_ucode() {
  return occupancy(EngineKind::kUcode, [](std::string& out) {
    uint64_t a = measure(EngineKind::kUcode, OccRow::kReadNeII, 8);
    uint64_t b = measure(EngineKind::kUcode, OccRow::kWriteSS, 8, 4);
    uint64_t c = measure(EngineKind::kUcode, OccRow::kWriteII, 8, 0, 1,
                         ReplacementKind::kClean);
    uint64_t d = measure(EngineKind::kUcode, OccRow::kWriteII, 8, 0, 8,
                         ReplacementKind::kDirty);
    uint64_t w = measure(EngineKind::kUcode, OccRow::kWriteII, 8);
    out = "Read-NE C=8: " + std::to_string(a) +
          ", Write S/S S=4 C=8: " + std::to_string(b) +
          ", replacement clean +" + std::to_string(c - w) + " dirty N=8 +" +
          std::to_string(d - w);
    return a == 30 && b == 34 && c - w == 7 && d - w == 14;
  });
}

// ---- Microcode size ----

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome criterion_size() {
  auto src = read_file(std::string(BEDROCK_SOURCE_DIR) + "/microcode/moesif.S");
  ucode::Program p = ucode::assemble_or_throw(src);
  const int n = p.size();
  const double rel = 100.0 * (n - 125) / 125.0;
  Outcome o;
  o.pass = n <= 256 && n >= 62.5 && n <= 187.5;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%d instructions (limit 256), %+.1f%% against 125", n, rel);
  o.detail = buf;
  return o;
}

// ---- Model checking ----

Outcome criterion_checker() {
  std::ostringstream os;
  bool ok = true;
  for (Protocol p : {Protocol::kMesi, Protocol::kMoesif}) {
    for (int c = 2; c <= 4; ++c) {
      CheckResult r = explore(p, c);
      if (!r.verified || r.bounded || r.invariant) ok = false;
      os << to_string(p) << "/" << c << ": " << r.states << " states; ";
    }
  }
  auto t0 = std::chrono::steady_clock::now();
  CheckOptions cap;
  cap.max_states = 10'000'000;
  CheckResult big = explore(Protocol::kMesi, 8, Mutation::kNone, cap);
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  if (big.invariant) ok = false;
  os << "mesi/8: " << (big.verified ? "verified " : "bounded ") << big.states
     << " states in " << static_cast<int>(secs) << " s; ";
  for (Mutation m : mutation_catalog()) {
    for (Protocol p : {Protocol::kMesi, Protocol::kMoesif}) {
      RuleSet rules = mutate(p, m);
      CheckResult r = explore(rules, 2);
      bool found = r.invariant.has_value() && r.trace.size() <= 12;
      bool replays = found && replay(rules, 2, r.trace) == r.invariant;
      if (!found || !replays) ok = false;
      if (p == Protocol::kMoesif)
        os << to_string(m) << " -> "
           << (r.invariant ? *r.invariant : std::string("none")) << " at "
           << r.trace.size() << "; ";
    }
  }
  Outcome o;
  o.pass = ok;
  o.detail = os.str();
  if (o.detail.size() > 2) o.detail.resize(o.detail.size() - 2);
  return o;
}

// ---- Engine equivalence ----

Outcome criterion_equivalence() {
  int runs = 0, failed = 0;
  double ratio_sum = 0;
  std::string first;
  for (int cores : {2, 4, 8}) {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
      WorkloadParams wp;
      wp.cores = cores;
      wp.ops = 10000;
      SimConfig cfg;
      cfg.cores = cores;
      cfg.seed = seed;
      auto trace = random_workload(seed * 7919 + cores, wp);
      EquivalenceReport r = compare_engines(cfg, trace);
      ++runs;
      ratio_sum += r.ratio();
      if (!r.equivalent()) {
        ++failed;
        if (first.empty())
          first = "cores " + std::to_string(cores) + " seed " +
                  std::to_string(seed) + ": " +
                  (r.differences.empty() ? std::string("monitor violation")
                                         : r.differences.front());
      }
    }
  }
  Outcome o;
  o.pass = failed == 0;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%d runs of 10000 ops, %d differ; mean ucode/fsm cycle ratio "
                "%.3f (reported only)",
                runs, failed, ratio_sum / runs);
  o.detail = buf;
  if (!first.empty()) o.detail += "; " + first;
  return o;
}

// ---- Directory overhead ----

Outcome criterion_overhead() {
  bool ok = true;
  double prev = 0;
  OverheadParams p;
  // 28 tag bits + 3 state bits padded to one 32-bit word per 512-bit block.
  const double dup_expected = 100.0 * 32 / 512;
  for (int c = 2; c <= 64; ++c) {
    p.caches = c;
    p.scheme = OverheadScheme::kDuplicateTag;
    double dup = overhead_percent(p);
    if (std::abs(dup - dup_expected) > 1e-12) ok = false;
    p.scheme = OverheadScheme::kComplete;
    double full = overhead_percent(p);
    if (!(full > dup) || !(full > prev)) ok = false;
    prev = full;
  }
  p.caches = 64;
  double full64 = overhead_percent(p);
  Outcome o;
  o.pass = ok;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "duplicate tag %.2f%% for 2..64 caches; complete rises to "
                "%.2f%% at 64",
                dup_expected, full64);
  o.detail = buf;
  return o;
}

// ---- Protocol tables ----

// Cache-controller table as printed: rows I S E M O F, columns Load Store Inv
// DATA STW WB TR ST-WB ST-TR ST-TR-WB; empty string is a blank cell.
const char* const kLceCells[6][10] = {
    {"ReqRd", "ReqWr", "", "CohAck/X", "", "", "", "", "", ""},
    {"Hit", "ReqWr", "InvAck/I", "", "CohAck/M", "", "", "", "", ""},
    {"Hit", "Hit/M", "", "", "", "NullWB/E", "", "NullWB/X", "DATA/X",
     "DATA, NullWB/X"},
    {"Hit", "Hit", "", "", "", "DirtyWB/M", "", "DirtyWB/X", "DATA/X",
     "DATA, DirtyWB/X"},
    {"Hit", "ReqWr", "", "", "CohAck/M", "DirtyWB/O", "DATA/O", "DirtyWB/X",
     "DATA/X", ""},
    {"Hit", "ReqWr", "", "", "CohAck/M", "", "DATA/F", "", "DATA/X", ""},
};

// Directory table, rows I S E M O F, columns ReqRd ReqRd-NE ReqWr-from-I
// ReqWr-from-S ReqWr-from-O/F Replacement.
const char* const kDirCells[6][6] = {
    {"DATA to Req/E", "DATA to Req/S", "DATA to Req/M", "", "", ""},
    {"DATA to Req/S", "DATA to Req/S", "Inv all S, DATA to Req/M",
     "Inv other S, STW^M to Req/M", "", ""},
    {"ST^F-TR^S-WB to Owner/F", "ST^F-TR^S-WB to Owner/F",
     "ST^I-TR^M to Owner/M", "", "", "ST^I-WB to Req/I"},
    {"ST^O-TR^S to Owner/O", "ST^O-TR^S to Owner/O", "ST^I-TR^M to Owner/M",
     "", "", "ST^I-WB to Req/I"},
    {"TR^S to Owner/O", "TR^S to Owner/O", "Inv all S, ST^I-TR^M to Owner/M",
     "Inv other S and Owner, STW^M to Req/M", "Inv all S, STW^M to Req/M",
     "ST^I-WB to Req/I"},
    {"TR^S to Owner/F", "TR^S to Owner/F", "Inv all S, ST^I-TR^M to Owner/M",
     "Inv other S and Owner, STW^M to Req/M", "Inv all S, STW^M to Req/M",
     ""},
};

// MESI keeps the I and S rows; E and M downgrade the owner to S with a
// writeback on reads.
const char* const kMesiDirCells[4][6] = {
    {"DATA to Req/E", "DATA to Req/S", "DATA to Req/M", "", "", ""},
    {"DATA to Req/S", "DATA to Req/S", "Inv all S, DATA to Req/M",
     "Inv other S, STW^M to Req/M", "", ""},
    {"ST^S-TR^S-WB to Owner/S", "ST^S-TR^S-WB to Owner/S",
     "ST^I-TR^M to Owner/M", "", "", "ST^I-WB to Req/I"},
    {"ST^S-TR^S-WB to Owner/S", "ST^S-TR^S-WB to Owner/S",
     "ST^I-TR^M to Owner/M", "", "", "ST^I-WB to Req/I"},
};

std::vector<std::string> split(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t k = s.find(sep, pos);
    out.push_back(s.substr(pos, k - pos));
    if (k == std::string::npos) break;
    pos = k + sep.size();
  }
  return out;
}

LceEmission emission_of(const std::string& word) {
  if (word == "ReqRd") return LceEmission::kReqRd;
  if (word == "ReqWr") return LceEmission::kReqWr;
  if (word == "InvAck") return LceEmission::kInvAck;
  if (word == "CohAck") return LceEmission::kCohAck;
  if (word == "NullWB") return LceEmission::kNullWb;
  if (word == "DirtyWB") return LceEmission::kDirtyWb;
  if (word == "DATA") return LceEmission::kDataToTarget;
  fail(ErrorCode::kInternal, "oracle word " + word);
}

S state_of(char c) {
  switch (c) {
    case 'I': return S::I;
    case 'S': return S::S;
    case 'E': return S::E;
    case 'M': return S::M;
    case 'O': return S::O;
    case 'F': return S::F;
  }
  fail(ErrorCode::kInternal, std::string("oracle state ") + c);
}

bool throws_impossible(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == ErrorCode::kImpossibleTransition;
  }
  return false;
}

// Compares one cache-controller cell against the strict table. Attached-state
// cells are probed with every valid attached state.
bool lce_cell_matches(S state, LceEventKind kind, const std::string& text) {
  const bool carries = event_carries_state(kind);
  std::vector<std::optional<S>> probes;
  if (carries)
    for (S a : {S::S, S::E, S::M, S::O, S::F}) probes.push_back(a);
  else
    probes.push_back(std::nullopt);
  if (text.empty()) {
    for (auto a : probes)
      if (!throws_impossible([&] { lce_event_action(state, {kind, a}); }))
        return false;
    return true;
  }
  auto slash = split(text, "/");
  std::optional<char> next;
  if (slash.size() == 2) next = slash[1][0];
  const bool hit = slash[0] == "Hit";
  std::vector<LceEmission> sends;
  if (!hit)
    for (const std::string& w : split(slash[0], ", "))
      sends.push_back(emission_of(w));
  for (auto a : probes) {
    LceAction act = lce_event_action(state, {kind, a});
    if (act.hit != hit || act.num_sends != sends.size()) return false;
    for (size_t i = 0; i < sends.size(); ++i)
      if (act.sends[i] != sends[i]) return false;
    S want = !next ? state : *next == 'X' ? *a : state_of(*next);
    if (act.next_state != want) return false;
  }
  return true;
}

bool dir_cell_matches(Protocol p, S row, DirRequestKind k,
                      const std::string& text) {
  if (text.empty())
    return throws_impossible([&] { dir_request_plan(row, k, p); });
  DirectivePlan plan = dir_request_plan(row, k, p);
  if (render_plan(plan) != text) return false;
  // Independent field checks: next state and invalidation target set.
  if (plan.next_dir_state != state_of(text.back())) return false;
  InvalidateSet want = InvalidateSet::kNone;
  if (text.rfind("Inv all S", 0) == 0) want = InvalidateSet::kAllSharers;
  else if (text.rfind("Inv other S and Owner", 0) == 0)
    want = InvalidateSet::kOtherSharersAndOwner;
  else if (text.rfind("Inv other S", 0) == 0)
    want = InvalidateSet::kOtherSharers;
  return plan.invalidate_set == want;
}

Outcome criterion_tables() {
  int dir_cells = 0, dir_blank = 0, lce_cells = 0, lce_blank = 0, bad = 0;
  std::string first;
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) {
      ++dir_cells;
      std::string text = kDirCells[r][c];
      if (text.empty()) ++dir_blank;
      if (!dir_cell_matches(Protocol::kMoesif, kAllStates[r],
                            static_cast<DirRequestKind>(c), text)) {
        ++bad;
        if (first.empty())
          first = std::string("dir ") + to_string(kAllStates[r]) + "/" +
                  to_string(static_cast<DirRequestKind>(c));
      }
    }
    for (int c = 0; c < kNumLceEvents; ++c) {
      ++lce_cells;
      std::string text = kLceCells[r][c];
      if (text.empty()) ++lce_blank;
      if (!lce_cell_matches(kAllStates[r], static_cast<LceEventKind>(c),
                            text)) {
        ++bad;
        if (first.empty())
          first = std::string("lce ") + to_string(kAllStates[r]) + "/" +
                  to_string(static_cast<LceEventKind>(c));
      }
    }
  }
  int mesi_cells = 0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 6; ++c, ++mesi_cells)
      if (!dir_cell_matches(Protocol::kMesi, kAllStates[r],
                            static_cast<DirRequestKind>(c),
                            kMesiDirCells[r][c])) {
        ++bad;
        if (first.empty()) first = "mesi dir row " + std::to_string(r);
      }
  for (S r : {S::O, S::F})
    for (int c = 0; c < 6; ++c, ++mesi_cells)
      if (!throws_impossible([&] {
            dir_request_plan(r, static_cast<DirRequestKind>(c), Protocol::kMesi);
          })) {
        ++bad;
        if (first.empty()) first = "mesi O/F row accepted";
      }
  Outcome o;
  o.pass = bad == 0 && dir_cells == 36;
  std::ostringstream os;
  os << dir_cells << " directory cells (" << dir_blank << " blank), "
     << lce_cells << " cache-controller cells (" << lce_blank << " blank), "
     << mesi_cells << " MESI directory cells; " << bad << " mismatches";
  if (!first.empty()) os << "; first: " << first;
  o.detail = os.str();
  return o;
}

// ---- Latency micro-properties ----

Outcome criterion_latency() {
  std::ostringstream os;
  bool ok = true;

  for (int c : {2, 4, 8, 16, 32}) {
    SegmentConfig sc;
    sc.num_caches = c;
    DirectorySegment seg(sc);
    int lat = seg.read_way_group(0x80000000ull, 0, 0).latency;
    if (lat != 1 + c / 2) ok = false;
    if (c == 8) os << "way-group read C=8: " << lat << " cycles; ";
  }

  // Each extra sharer costs two cycles in both engines, and the FSM's
  // invalidation phase is 2*S on top of the no-sharer write.
  int slope_bad = 0;
  for (EngineKind e : {EngineKind::kFsm, EngineKind::kUcode}) {
    for (int s = 1; s + 1 <= 7; ++s) {
      uint64_t a = measure(e, OccRow::kWriteIS, 8, s);
      uint64_t b = measure(e, OccRow::kWriteIS, 8, s + 1);
      if (b - a != 2) ++slope_bad;
    }
  }
  uint64_t none = measure(EngineKind::kFsm, OccRow::kWriteII, 8);
  uint64_t five = measure(EngineKind::kFsm, OccRow::kWriteIS, 8, 5);
  if (slope_bad || five - none != 10) ok = false;
  os << "invalidating 5 sharers: +" << (five - none) << " cycles; ";

  // Flip the static hint on the fast-path dispatch branch.
  std::string src =
      read_file(std::string(BEDROCK_SOURCE_DIR) + "/microcode/moesif.S");
  const std::string branch = "  bfz full_path rqf nerf rf csf cef cmf cof cff";
  size_t at = src.find(branch + "\n");
  uint64_t bubble = 0;
  if (at == std::string::npos || src.find(branch + "\n", at + 1) !=
                                     std::string::npos) {
    ok = false;
    os << "fast-path branch not found; ";
  } else {
    src.insert(at + branch.size(), " pt");
    auto path = std::filesystem::temp_directory_path() /
                ("bedrock_mispredict_" + std::to_string(::getpid()) + ".S");
    {
      std::ofstream out(path);
      out << src;
    }
    SimConfig flipped;
    flipped.ucode_path = path.string();
    uint64_t base = measure(EngineKind::kUcode, OccRow::kReadExclII, 8);
    uint64_t mis = measure(EngineKind::kUcode, OccRow::kReadExclII, 8, 0, 1,
                           ReplacementKind::kNone, flipped);
    std::filesystem::remove(path);
    bubble = mis - base;
    if (bubble != 1) ok = false;
    os << "mispredict bubble: " << bubble << " cycle; ";
  }

  PendingBits pb(4);
  pb.adjust(2, +1);
  bool fwd = pb.read(2) && pb.count(2) == 1 && pb.committed(2) == 0;
  pb.commit();
  pb.adjust(2, -1);
  fwd = fwd && !pb.read(2) && pb.committed(2) == 1;
  pb.commit();
  fwd = fwd && !pb.read(2) && pb.all_zero();
  if (!fwd) ok = false;
  os << "pending-bit forwarding " << (fwd ? "same cycle" : "missing");

  Outcome o;
  o.pass = ok;
  o.detail = os.str();
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"occupancy (fsm)", criterion_fsm},
      {"occupancy (ucode)", criterion_ucode},
      {"microcode size", criterion_size},
      {"model checking", criterion_checker},
      {"engine equivalence", criterion_equivalence},
      {"directory overhead", criterion_overhead},
      {"protocol tables", criterion_tables},
      {"latency properties", criterion_latency},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
