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

#ifndef BEDROCK_CHECKER_HPP_
#define BEDROCK_CHECKER_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bedrock/protocol.hpp"

namespace bedrock {

// ---- Rule sets ----

enum class NextRule : uint8_t { kFixed, kAttached };

struct LceRule {
  bool hit = false;
  std::array<LceEmission, 2> sends{};
  uint8_t num_sends = 0;
  NextRule next = NextRule::kFixed;
  CoherenceState fixed = CoherenceState::I;

  bool operator==(const LceRule&) const = default;
};

// Abstract transition relation of one protocol: every cache-controller and
// directory cell, blank cells held as nullopt.
struct RuleSet {
  Protocol protocol = Protocol::kMoesif;
  std::array<std::array<std::optional<LceRule>, kNumLceEvents>, kNumStates>
      lce{};
  std::array<std::array<std::optional<DirectivePlan>, kNumDirRequests>,
             kNumStates>
      dir{};

  // Throws ImpossibleTransition on a blank cell.
  LceAction lce_action(CoherenceState s, const LceEvent& e) const;
  const std::optional<DirectivePlan>& plan(CoherenceState row,
                                           DirRequestKind k) const {
    return dir[static_cast<int>(row)][static_cast<int>(k)];
  }
};

// Read off the executable cache-controller table and the directory table.
RuleSet extract_rules(Protocol protocol);

enum class Mutation : uint8_t {
  kNone,
  kDropInvalidations,    // S row, ReqWr from I: no invalidations
  kGrantEWithSharers,    // S row, ReqRd: grant E
  kSkipWriteback,        // M cache, ST-WB: NullWB instead of DirtyWB
  kWrongTransferState,   // M row, ReqRd: owner transfers E
};
const char* to_string(Mutation m);
// Throws UnknownMutation.
Mutation parse_mutation(std::string_view id);
const std::vector<Mutation>& mutation_catalog();

// Returns a rule set differing from `rules` in exactly one cell.
RuleSet mutate(const RuleSet& rules, Mutation m);
RuleSet mutate(Protocol protocol, Mutation m);

// Number of cells where two rule sets differ.
int rule_difference(const RuleSet& a, const RuleSet& b);

// ---- Exploration ----

struct CheckOptions {
  uint64_t max_states = 0;  // 0 = unbounded
  bool symmetry = true;     // cache-id canonicalization
};

struct CheckResult {
  bool verified = false;
  bool bounded = false;  // state limit reached before the frontier emptied
  uint64_t states = 0;
  uint64_t transitions = 0;
  int depth = 0;  // deepest BFS level reached
  std::optional<std::string> invariant;
  std::vector<std::string> trace;  // from the initial state, numbered 1..
  std::string final_state;
};

// Invariant names: "SWMR", "single-owner", "data-value",
// "no-impossible-transition".
CheckResult explore(const RuleSet& rules, int caches,
                    const CheckOptions& opts = {});
CheckResult explore(Protocol protocol, int caches, Mutation m = Mutation::kNone,
                    const CheckOptions& opts = {});

// Replays a counterexample by label; returns the invariant broken at the end
// (nullopt when the trace does not end in a violation). Throws
// InvalidArgument when a label is not enabled.
std::optional<std::string> replay(const RuleSet& rules, int caches,
                                  const std::vector<std::string>& trace);

std::string format_result(const CheckResult& r);

}  // namespace bedrock

#endif  // BEDROCK_CHECKER_HPP_
