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

#include <string>
#include <vector>

#include "bedrock/error.hpp"
#include "bedrock/harness.hpp"
#include "bedrock/ucode/assembler.hpp"
#include "bedrock/ucode/engine.hpp"

using namespace bedrock;
using namespace bedrock::ucode;

TEST_CASE("every instruction survives encode and decode") {
  for (const char* name : {"moesif", "mesi"}) {
    const Program& p = builtin_program(name);
    for (const Instr& in : p.instrs) {
      Instr back = decode(encode(in));
      CHECK(back == canonical(in));
      CHECK(encode(back) == encode(in));
    }
  }
}

TEST_CASE("listing reassembles to the same words") {
  for (const char* name : {"moesif", "mesi"}) {
    const Program& p = builtin_program(name);
    Program again = assemble_or_throw(disassemble(p));
    CHECK(again.words() == p.words());
    CHECK(disassemble(again) == disassemble(p));
  }
}

TEST_CASE("binary image round trip") {
  const Program& p = builtin_program("moesif");
  std::vector<uint8_t> bin = write_binary(p);
  CHECK(looks_binary(bin));
  REQUIRE(bin.size() == 12 + 4 * p.instrs.size());
  CHECK(std::string(bin.begin(), bin.begin() + 4) == "BRUC");
  Program back = read_binary(bin);
  CHECK(back.words() == p.words());
  bin.resize(bin.size() - 2);
  CHECK_THROWS_AS(read_binary(bin), Error);
}

TEST_CASE("assembler diagnostics") {
  AssembleResult r = assemble("  wfq req\n  frobnicate r1\n  bi nowhere\n");
  CHECK_FALSE(r.ok());
  REQUIRE(r.diagnostics.size() >= 2);
  CHECK(r.diagnostics[0].line == 2);
  CHECK(r.diagnostics[0].str().find("frobnicate") != std::string::npos);

  std::string big;
  for (int i = 0; i < 300; ++i) big += "  gad\n";
  AssembleResult large = assemble(big);
  CHECK_FALSE(large.ok());
  CHECK(large.too_large);
  try {
    assemble_or_throw(big);
    FAIL("expected ProgramTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kProgramTooLarge);
  }
}

TEST_CASE("labels resolve to their instruction") {
  Program p = assemble_or_throw("top:\n  wfq req\n  popq req\nloop:\n  bi top\n");
  CHECK(p.size() == 3);
  CHECK(p.label("loop") == 2);
  CHECK(p.instrs[2].target == 0);
}

// Reference walk of the fast path: the read-miss-to-I request retires the
// straight-line front of the program, with every branch falling through,
// then jumps back to the dispatch loop.
TEST_CASE("fast path retires the expected instruction sequence") {
  std::vector<std::string> retired;
  SimConfig cfg;
  OccupancyScenario sc{OccRow::kReadExclII, 4, 0, 1, ReplacementKind::kNone,
                       CoherenceState::I};
  setup_and_measure(cfg, EngineKind::kUcode, sc, [&](System& sys) {
    auto& u = dynamic_cast<UcodeCce&>(sys.cce(0));
    u.set_retire_hook([&](int, const Instr& in) {
      retired.push_back(mnemonic(in.op));
    });
  });
  const std::vector<std::string> want = {"wfq", "popq", "rdp",  "bf",   "bf",
                                         "wdp", "pushq", "rdw", "gad",  "bfz",
                                         "wde", "specq", "bi"};
  REQUIRE(retired.size() >= want.size());
  CHECK(std::vector<std::string>(retired.begin(),
                                 retired.begin() + want.size()) == want);
}

TEST_CASE("taken hint on a falling-through branch costs one bubble") {
  const std::string line = "  bfz full_path rqf nerf rf csf cef cmf cof cff\n";
  std::string src = builtin_source("moesif");
  size_t at = src.find(line);
  REQUIRE(at != std::string::npos);
  std::string flipped = src;
  flipped.insert(at + line.size() - 1, " pt");
  Program a = assemble_or_throw(src);
  Program b = assemble_or_throw(flipped);
  CHECK(a.size() == b.size());
  int diff = 0;
  for (int i = 0; i < a.size(); ++i) diff += a.instrs[i] == b.instrs[i] ? 0 : 1;
  CHECK(diff == 1);
}
