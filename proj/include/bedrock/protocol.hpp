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

#ifndef BEDROCK_PROTOCOL_HPP_
#define BEDROCK_PROTOCOL_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bedrock {

enum class CoherenceState : uint8_t { I = 0, S, E, M, O, F };
inline constexpr int kNumStates = 6;
inline constexpr std::array<CoherenceState, kNumStates> kAllStates = {
    CoherenceState::I, CoherenceState::S, CoherenceState::E,
    CoherenceState::M, CoherenceState::O, CoherenceState::F};

char state_char(CoherenceState s);
const char* to_string(CoherenceState s);
std::optional<CoherenceState> parse_state(std::string_view text);

constexpr bool is_valid(CoherenceState s) { return s != CoherenceState::I; }
constexpr bool is_owner(CoherenceState s) {
  return s == CoherenceState::E || s == CoherenceState::M ||
         s == CoherenceState::O || s == CoherenceState::F;
}
constexpr bool is_writable(CoherenceState s) {
  return s == CoherenceState::E || s == CoherenceState::M;
}
// Dirty with respect to memory; a silently upgraded E line is tracked as M by
// the cache itself.
constexpr bool is_dirty(CoherenceState s) {
  return s == CoherenceState::M || s == CoherenceState::O;
}

struct Permissions {
  bool read;
  bool write;
};
Permissions state_permissions(CoherenceState s);

enum class Protocol : uint8_t { kMoesif, kMesi };
const char* to_string(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view text);
bool protocol_has_state(Protocol p, CoherenceState s);

// ---- Cache controller table ----

enum class LceEventKind : uint8_t {
  kLoad = 0,
  kStore,
  kInv,
  kData,
  kStW,
  kWb,
  kTr,
  kStWb,
  kStTr,
  kStTrWb,
};
inline constexpr int kNumLceEvents = 10;
const char* to_string(LceEventKind k);
bool event_carries_state(LceEventKind k);

struct LceEvent {
  LceEventKind kind;
  std::optional<CoherenceState> attached_state;
};

enum class LceEmission : uint8_t {
  kReqRd,
  kReqWr,
  kInvAck,
  kCohAck,
  kNullWb,
  kDirtyWb,
  kDataToTarget,
};
const char* to_string(LceEmission e);

struct LceAction {
  bool hit = false;
  std::array<LceEmission, 2> sends{};
  uint8_t num_sends = 0;
  CoherenceState next_state = CoherenceState::I;

  bool emits(LceEmission e) const;
};

// Strict cache-controller table; blank cells throw ImpossibleTransition.
LceAction lce_event_action(CoherenceState state, const LceEvent& event);

// Executable variant used by the cache model. Identical to the strict table
// except for the documented amendments listed by lce_table_amendments().
LceAction lce_event_action_exec(CoherenceState state, const LceEvent& event);

struct TableCellRef {
  CoherenceState state;
  LceEventKind kind;
};
const std::vector<TableCellRef>& lce_table_amendments();

// ---- Directory table ----

enum class DirRequestKind : uint8_t {
  kReqRd = 0,
  kReqRdNe,
  kReqWrFromI,
  kReqWrFromS,
  kReqWrFromOf,
  kReplacement,
};
inline constexpr int kNumDirRequests = 6;
const char* to_string(DirRequestKind k);

enum class InvalidateSet : uint8_t {
  kNone,
  kAllSharers,
  kOtherSharers,
  kOtherSharersAndOwner,
};

enum class OwnerCommandKind : uint8_t { kStTr, kStTrWb, kTr, kStWb, kStW };
const char* to_string(OwnerCommandKind k);

struct OwnerCommand {
  OwnerCommandKind command;
  std::optional<CoherenceState> set_owner_state;
  std::optional<CoherenceState> transfer_state;
};

enum class RequesterGrant : uint8_t { kDataFromMemory, kUpgrade, kNone };

struct DirectivePlan {
  InvalidateSet invalidate_set = InvalidateSet::kNone;
  std::optional<OwnerCommand> owner_command;
  RequesterGrant requester_grant = RequesterGrant::kNone;
  CoherenceState grant_state = CoherenceState::I;
  CoherenceState next_dir_state = CoherenceState::I;
};

bool operator==(const OwnerCommand& a, const OwnerCommand& b);
bool operator==(const DirectivePlan& a, const DirectivePlan& b);

DirectivePlan dir_request_plan(CoherenceState dir_state, DirRequestKind req,
                               Protocol protocol = Protocol::kMoesif);

// Cell text in the same notation as the golden tables, e.g. "DATA to Req/E".
std::string render_plan(const DirectivePlan& plan);
std::string render_lce_action(const LceAction& action, LceEventKind kind);

// Full-table renderings compared against the embedded golden text.
std::string render_lce_table();
std::string render_dir_table(Protocol protocol);
const char* golden_lce_table();
const char* golden_dir_table(Protocol protocol);
// Throws Error(kInternal) on any drift between the encoded and golden tables.
void validate_tables();

// ---- Request classification ----

enum class AddressClass : uint8_t {
  kCacheableCoherent,
  kUncachedToCacheable,
  kUncachedToUncacheable,
};
const char* to_string(AddressClass c);

struct Region {
  uint64_t base;
  uint64_t limit;  // exclusive; 0 means top of the address space
  bool cacheable;
};

class RegionMap {
 public:
  // Default map: [0, 0x8000_0000) is uncacheable I/O, the rest is DRAM.
  RegionMap();
  explicit RegionMap(std::vector<Region> regions);

  bool cacheable(uint64_t addr) const;
  const std::vector<Region>& regions() const { return regions_; }

 private:
  std::vector<Region> regions_;
};

AddressClass classify_request(uint64_t addr, bool uncached,
                              const RegionMap& regions);

}  // namespace bedrock

#endif  // BEDROCK_PROTOCOL_HPP_
