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

#include "bedrock/checker.hpp"
#include "bedrock/error.hpp"

using namespace bedrock;
using S = CoherenceState;

TEST_CASE("extracted rules agree with the executable tables") {
  for (Protocol p : {Protocol::kMoesif, Protocol::kMesi}) {
    RuleSet rs = extract_rules(p);
    for (S s : kAllStates) {
      for (int k = 0; k < kNumLceEvents; ++k) {
        auto kind = static_cast<LceEventKind>(k);
        const auto& rule = rs.lce[static_cast<int>(s)][k];
        std::optional<S> probe;
        if (event_carries_state(kind)) probe = S::S;
        std::optional<LceAction> want;
        try {
          want = lce_event_action_exec(s, {kind, probe});
        } catch (const Error&) {
        }
        CAPTURE(to_string(s));
        CAPTURE(to_string(kind));
        REQUIRE(rule.has_value() == want.has_value());
        if (!rule) continue;
        CHECK(rule->hit == want->hit);
        REQUIRE(rule->num_sends == want->num_sends);
        for (int i = 0; i < rule->num_sends; ++i)
          CHECK(rule->sends[i] == want->sends[i]);
        for (S att : {S::I, S::S, S::E, S::M, S::O, S::F}) {
          std::optional<S> a;
          if (event_carries_state(kind)) a = att;
          LceAction act = lce_event_action_exec(s, {kind, a});
          S got = rule->next == NextRule::kAttached ? att : rule->fixed;
          CHECK(got == act.next_state);
        }
      }
      for (int k = 0; k < kNumDirRequests; ++k) {
        auto req = static_cast<DirRequestKind>(k);
        std::optional<DirectivePlan> want;
        try {
          want = dir_request_plan(s, req, p);
        } catch (const Error&) {
        }
        const auto& got = rs.plan(s, req);
        REQUIRE(got.has_value() == want.has_value());
        if (got) CHECK(*got == *want);
      }
    }
  }
}

TEST_CASE("each mutation changes exactly one cell") {
  for (Protocol p : {Protocol::kMoesif, Protocol::kMesi}) {
    RuleSet base = extract_rules(p);
    CHECK(rule_difference(base, mutate(base, Mutation::kNone)) == 0);
    for (Mutation m : mutation_catalog()) {
      CAPTURE(to_string(m));
      CHECK(rule_difference(base, mutate(base, m)) == 1);
      CHECK(parse_mutation(to_string(m)) == m);
    }
  }
  CHECK(mutation_catalog().size() == 4);
  CHECK(parse_mutation("none") == Mutation::kNone);
  CHECK_THROWS_AS(parse_mutation("flip-everything"), Error);
}

TEST_CASE("small models verify") {
  for (Protocol p : {Protocol::kMoesif, Protocol::kMesi}) {
    CheckResult r = explore(p, 2);
    CHECK(r.verified);
    CHECK_FALSE(r.bounded);
    CHECK_FALSE(r.invariant.has_value());
    CHECK(r.states > 10);
  }
}

TEST_CASE("symmetry reduction keeps the verdict") {
  CheckOptions plain;
  plain.symmetry = false;
  CheckResult a = explore(Protocol::kMesi, 3);
  CheckResult b = explore(Protocol::kMesi, 3, Mutation::kNone, plain);
  CHECK(a.verified);
  CHECK(b.verified);
  CHECK(a.states <= b.states);
}

TEST_CASE("exploration is deterministic") {
  CheckResult a = explore(Protocol::kMoesif, 3, Mutation::kSkipWriteback);
  CheckResult b = explore(Protocol::kMoesif, 3, Mutation::kSkipWriteback);
  CHECK(a.states == b.states);
  CHECK(a.trace == b.trace);
  CHECK(format_result(a) == format_result(b));
}

TEST_CASE("counterexamples replay and are short") {
  for (Mutation m : mutation_catalog()) {
    RuleSet rules = mutate(Protocol::kMoesif, m);
    CheckResult r = explore(rules, 2);
    CAPTURE(to_string(m));
    REQUIRE(r.invariant.has_value());
    CHECK(r.trace.size() <= 12);
    CHECK(replay(rules, 2, r.trace) == r.invariant);
    // The unmutated protocol accepts the same prefix without a violation.
    RuleSet good = extract_rules(Protocol::kMoesif);
    std::optional<std::string> clean;
    try {
      clean = replay(good, 2, r.trace);
    } catch (const Error&) {
    }
    CHECK_FALSE(clean.has_value());
  }
}

TEST_CASE("state limit reports a bounded run") {
  CheckOptions o;
  o.max_states = 100;
  CheckResult r = explore(Protocol::kMoesif, 4, Mutation::kNone, o);
  CHECK(r.bounded);
  CHECK_FALSE(r.verified);
  CHECK_FALSE(r.invariant.has_value());
  CHECK(format_result(r).rfind("Bounded", 0) == 0);
}

TEST_CASE("replay rejects labels that are not enabled") {
  RuleSet rules = extract_rules(Protocol::kMesi);
  CHECK_THROWS_AS(replay(rules, 2, {"dir recv CohAck from c0"}), Error);
}
