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

#include "bedrock/error.hpp"
#include "bedrock/protocol.hpp"

using namespace bedrock;
using S = CoherenceState;

namespace {

bool impossible(S state, LceEvent ev) {
  try {
    lce_event_action(state, ev);
  } catch (const Error& e) {
    return e.code() == ErrorCode::kImpossibleTransition;
  }
  return false;
}

}  // namespace

TEST_CASE("encoded tables render to the golden text") {
  CHECK_NOTHROW(validate_tables());
  CHECK(render_lce_table() == golden_lce_table());
  CHECK(render_dir_table(Protocol::kMoesif) == golden_dir_table(Protocol::kMoesif));
  CHECK(render_dir_table(Protocol::kMesi) == golden_dir_table(Protocol::kMesi));
}

TEST_CASE("cache controller cells") {
  LceAction a = lce_event_action(S::I, {LceEventKind::kLoad, {}});
  CHECK_FALSE(a.hit);
  REQUIRE(a.num_sends == 1);
  CHECK(a.sends[0] == LceEmission::kReqRd);

  a = lce_event_action(S::E, {LceEventKind::kStore, {}});
  CHECK(a.hit);
  CHECK(a.next_state == S::M);

  a = lce_event_action(S::M, {LceEventKind::kStTrWb, S::O});
  REQUIRE(a.num_sends == 2);
  CHECK(a.sends[0] == LceEmission::kDataToTarget);
  CHECK(a.sends[1] == LceEmission::kDirtyWb);
  CHECK(a.next_state == S::O);

  a = lce_event_action(S::O, {LceEventKind::kTr, S::S});
  CHECK(a.emits(LceEmission::kDataToTarget));
  CHECK(a.next_state == S::O);

  a = lce_event_action(S::I, {LceEventKind::kData, S::F});
  CHECK(a.next_state == S::F);
  CHECK(a.emits(LceEmission::kCohAck));
}

TEST_CASE("blank cache controller cells are impossible") {
  CHECK(impossible(S::I, {LceEventKind::kInv, {}}));
  CHECK(impossible(S::S, {LceEventKind::kData, S::S}));
  CHECK(impossible(S::E, {LceEventKind::kTr, S::S}));
  CHECK(impossible(S::O, {LceEventKind::kStTrWb, S::S}));
  CHECK(impossible(S::F, {LceEventKind::kWb, {}}));
  CHECK(impossible(S::F, {LceEventKind::kStWb, S::I}));
  CHECK(impossible(S::O, {LceEventKind::kInv, {}}));
  // Attached-state commands without their state.
  CHECK(impossible(S::M, {LceEventKind::kStWb, {}}));
}

TEST_CASE("executable table amends only the listed cells") {
  const auto& amend = lce_table_amendments();
  REQUIRE(amend.size() == 2);
  for (const TableCellRef& ref : amend) {
    CHECK(impossible(ref.state, {ref.kind, {}}));
    LceAction a = lce_event_action_exec(ref.state, {ref.kind, {}});
    CHECK(a.emits(LceEmission::kInvAck));
    CHECK(a.next_state == S::I);
  }
  for (S s : kAllStates) {
    for (int k = 0; k < kNumLceEvents; ++k) {
      auto kind = static_cast<LceEventKind>(k);
      bool amended = false;
      for (const TableCellRef& ref : amend)
        amended |= ref.state == s && ref.kind == kind;
      if (amended) continue;
      std::optional<S> att;
      if (event_carries_state(kind)) att = S::S;
      bool strict_blank = impossible(s, {kind, att});
      bool exec_blank = false;
      try {
        lce_event_action_exec(s, {kind, att});
      } catch (const Error&) {
        exec_blank = true;
      }
      CHECK(strict_blank == exec_blank);
    }
  }
}

TEST_CASE("directory cells") {
  DirectivePlan p = dir_request_plan(S::S, DirRequestKind::kReqWrFromS);
  CHECK(p.invalidate_set == InvalidateSet::kOtherSharers);
  CHECK(p.next_dir_state == S::M);
  CHECK(render_plan(p) == "Inv other S, STW^M to Req/M");

  p = dir_request_plan(S::O, DirRequestKind::kReqWrFromS);
  CHECK(p.invalidate_set == InvalidateSet::kOtherSharersAndOwner);

  p = dir_request_plan(S::E, DirRequestKind::kReqRd);
  REQUIRE(p.owner_command.has_value());
  CHECK(p.owner_command->command == OwnerCommandKind::kStTrWb);
  CHECK(p.owner_command->set_owner_state == S::F);
  CHECK(p.owner_command->transfer_state == S::S);

  p = dir_request_plan(S::M, DirRequestKind::kReqRd, Protocol::kMesi);
  REQUIRE(p.owner_command.has_value());
  CHECK(p.owner_command->set_owner_state == S::S);
  CHECK(p.next_dir_state == S::S);

  p = dir_request_plan(S::I, DirRequestKind::kReqRd);
  CHECK(p.requester_grant == RequesterGrant::kDataFromMemory);
  CHECK(p.grant_state == S::E);
}

TEST_CASE("blank directory cells are impossible") {
  auto blank = [](S row, DirRequestKind k, Protocol p = Protocol::kMoesif) {
    try {
      dir_request_plan(row, k, p);
    } catch (const Error& e) {
      return e.code() == ErrorCode::kImpossibleTransition;
    }
    return false;
  };
  CHECK(blank(S::I, DirRequestKind::kReqWrFromS));
  CHECK(blank(S::I, DirRequestKind::kReplacement));
  CHECK(blank(S::S, DirRequestKind::kReplacement));
  CHECK(blank(S::E, DirRequestKind::kReqWrFromOf));
  CHECK(blank(S::F, DirRequestKind::kReplacement));
  CHECK(blank(S::O, DirRequestKind::kReqRd, Protocol::kMesi));
  CHECK_FALSE(blank(S::O, DirRequestKind::kReplacement));
}

TEST_CASE("state predicates") {
  CHECK(is_owner(S::F));
  CHECK_FALSE(is_owner(S::S));
  CHECK(is_writable(S::E));
  CHECK_FALSE(is_writable(S::O));
  CHECK(is_dirty(S::O));
  CHECK_FALSE(is_dirty(S::F));
  CHECK(state_permissions(S::M).write);
  CHECK_FALSE(state_permissions(S::F).write);
  CHECK(state_permissions(S::F).read);
  CHECK_FALSE(protocol_has_state(Protocol::kMesi, S::O));
  CHECK(parse_state("F") == S::F);
  CHECK_FALSE(parse_state("Q").has_value());
}
