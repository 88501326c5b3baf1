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

#include "bedrock/protocol.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "bedrock/error.hpp"

namespace bedrock {

namespace {

using S = CoherenceState;

constexpr const char* kStateNames[] = {"I", "S", "E", "M", "O", "F"};

// Next-state resolution for a cache-controller cell.
enum class NextKind : uint8_t { kBlank, kSame, kFixed, kAttached };

struct LceCell {
  NextKind next = NextKind::kBlank;
  S fixed = S::I;
  std::array<LceEmission, 2> sends{};
  uint8_t num_sends = 0;
  bool hit = false;
};

constexpr LceCell blank() { return LceCell{}; }
constexpr LceCell hit_same() { return LceCell{NextKind::kSame, S::I, {}, 0, true}; }
constexpr LceCell hit_to(S s) { return LceCell{NextKind::kFixed, s, {}, 0, true}; }
constexpr LceCell send_same(LceEmission e) {
  return LceCell{NextKind::kSame, S::I, {e}, 1, false};
}
constexpr LceCell send_to(LceEmission e, S s) {
  return LceCell{NextKind::kFixed, s, {e}, 1, false};
}
constexpr LceCell send_x(LceEmission e) {
  return LceCell{NextKind::kAttached, S::I, {e}, 1, false};
}
constexpr LceCell send2_x(LceEmission a, LceEmission b) {
  return LceCell{NextKind::kAttached, S::I, {a, b}, 2, false};
}

using E = LceEmission;

// Rows I,S,E,M,O,F; columns Load, Store, Inv, DATA, STW, WB, TR, ST-WB,
// ST-TR, ST-TR-WB.
constexpr LceCell kLceTable[kNumStates][kNumLceEvents] = {
    // I
    {send_same(E::kReqRd), send_same(E::kReqWr), blank(), send_x(E::kCohAck),
     blank(), blank(), blank(), blank(), blank(), blank()},
    // S
    {hit_same(), send_same(E::kReqWr), send_to(E::kInvAck, S::I), blank(),
     send_to(E::kCohAck, S::M), blank(), blank(), blank(), blank(), blank()},
    // E
    {hit_same(), hit_to(S::M), blank(), blank(), blank(),
     send_to(E::kNullWb, S::E), blank(), send_x(E::kNullWb),
     send_x(E::kDataToTarget), send2_x(E::kDataToTarget, E::kNullWb)},
    // M
    {hit_same(), hit_same(), blank(), blank(), blank(),
     send_to(E::kDirtyWb, S::M), blank(), send_x(E::kDirtyWb),
     send_x(E::kDataToTarget), send2_x(E::kDataToTarget, E::kDirtyWb)},
    // O
    {hit_same(), send_same(E::kReqWr), blank(), blank(),
     send_to(E::kCohAck, S::M), send_to(E::kDirtyWb, S::O),
     send_to(E::kDataToTarget, S::O), send_x(E::kDirtyWb),
     send_x(E::kDataToTarget), blank()},
    // F
    {hit_same(), send_same(E::kReqWr), blank(), blank(),
     send_to(E::kCohAck, S::M), blank(), send_to(E::kDataToTarget, S::F),
     blank(), send_x(E::kDataToTarget), blank()},
};

const char* const kGoldenLceTable =
    "State | Load | Store | Inv | DATA | STW | WB | TR | ST-WB | ST-TR | "
    "ST-TR-WB\n"
    "I | ReqRd | ReqWr | - | CohAck/X | - | - | - | - | - | -\n"
    "S | Hit | ReqWr | InvAck/I | - | CohAck/M | - | - | - | - | -\n"
    "E | Hit | Hit/M | - | - | - | NullWB/E | - | NullWB/X | DATA/X | "
    "DATA, NullWB/X\n"
    "M | Hit | Hit | - | - | - | DirtyWB/M | - | DirtyWB/X | DATA/X | "
    "DATA, DirtyWB/X\n"
    "O | Hit | ReqWr | - | - | CohAck/M | DirtyWB/O | DATA/O | DirtyWB/X | "
    "DATA/X | -\n"
    "F | Hit | ReqWr | - | - | CohAck/M | - | DATA/F | - | DATA/X | -\n";

const char* const kGoldenDirTableMoesif =
    "Dir | ReqRd | ReqRd-NE | ReqWr from I | ReqWr from S | ReqWr from O/F | "
    "Replacement\n"
    "I | DATA to Req/E | DATA to Req/S | DATA to Req/M | - | - | -\n"
    "S | DATA to Req/S | DATA to Req/S | Inv all S, DATA to Req/M | "
    "Inv other S, STW^M to Req/M | - | -\n"
    "E | ST^F-TR^S-WB to Owner/F | ST^F-TR^S-WB to Owner/F | "
    "ST^I-TR^M to Owner/M | - | - | ST^I-WB to Req/I\n"
    "M | ST^O-TR^S to Owner/O | ST^O-TR^S to Owner/O | ST^I-TR^M to Owner/M | "
    "- | - | ST^I-WB to Req/I\n"
    "O | TR^S to Owner/O | TR^S to Owner/O | "
    "Inv all S, ST^I-TR^M to Owner/M | "
    "Inv other S and Owner, STW^M to Req/M | Inv all S, STW^M to Req/M | "
    "ST^I-WB to Req/I\n"
    "F | TR^S to Owner/F | TR^S to Owner/F | "
    "Inv all S, ST^I-TR^M to Owner/M | "
    "Inv other S and Owner, STW^M to Req/M | Inv all S, STW^M to Req/M | -\n";

const char* const kGoldenDirTableMesi =
    "Dir | ReqRd | ReqRd-NE | ReqWr from I | ReqWr from S | ReqWr from O/F | "
    "Replacement\n"
    "I | DATA to Req/E | DATA to Req/S | DATA to Req/M | - | - | -\n"
    "S | DATA to Req/S | DATA to Req/S | Inv all S, DATA to Req/M | "
    "Inv other S, STW^M to Req/M | - | -\n"
    "E | ST^S-TR^S-WB to Owner/S | ST^S-TR^S-WB to Owner/S | "
    "ST^I-TR^M to Owner/M | - | - | ST^I-WB to Req/I\n"
    "M | ST^S-TR^S-WB to Owner/S | ST^S-TR^S-WB to Owner/S | "
    "ST^I-TR^M to Owner/M | - | - | ST^I-WB to Req/I\n";

const std::vector<TableCellRef> kAmendments = {
    {S::O, LceEventKind::kInv},
    {S::F, LceEventKind::kInv},
};

LceAction resolve_cell(const LceCell& cell, S state, const LceEvent& event) {
  LceAction a;
  a.hit = cell.hit;
  a.sends = cell.sends;
  a.num_sends = cell.num_sends;
  switch (cell.next) {
    case NextKind::kSame:
      a.next_state = state;
      break;
    case NextKind::kFixed:
      a.next_state = cell.fixed;
      break;
    case NextKind::kAttached:
      if (!event.attached_state) {
        fail(ErrorCode::kImpossibleTransition,
             std::string("command ") + to_string(event.kind) +
                 " is missing its attached state");
      }
      a.next_state = *event.attached_state;
      break;
    case NextKind::kBlank:
      break;
  }
  return a;
}

void check_event(const LceEvent& event) {
  bool carries = event_carries_state(event.kind);
  if (!carries && event.attached_state) {
    fail(ErrorCode::kImpossibleTransition,
         std::string(to_string(event.kind)) + " never carries a state");
  }
}

[[noreturn]] void blank_lce(S state, LceEventKind kind) {
  fail(ErrorCode::kImpossibleTransition,
       std::string("no cache-controller transition for ") + to_string(kind) +
           " in state " + to_string(state));
}

DirectivePlan mem_grant(S grant) {
  DirectivePlan p;
  p.requester_grant = RequesterGrant::kDataFromMemory;
  p.grant_state = grant;
  p.next_dir_state = grant;
  return p;
}

DirectivePlan owner_plan(OwnerCommandKind cmd, std::optional<S> set_owner,
                         std::optional<S> transfer, S next) {
  DirectivePlan p;
  p.owner_command = OwnerCommand{cmd, set_owner, transfer};
  p.requester_grant = RequesterGrant::kNone;
  p.grant_state = transfer.value_or(S::I);
  p.next_dir_state = next;
  return p;
}

DirectivePlan upgrade(InvalidateSet inv) {
  DirectivePlan p;
  p.invalidate_set = inv;
  p.requester_grant = RequesterGrant::kUpgrade;
  p.grant_state = S::M;
  p.next_dir_state = S::M;
  return p;
}

DirectivePlan with_inv(DirectivePlan p, InvalidateSet inv) {
  p.invalidate_set = inv;
  return p;
}

std::optional<DirectivePlan> moesif_cell(S dir, DirRequestKind req) {
  using R = DirRequestKind;
  using C = OwnerCommandKind;
  switch (dir) {
    case S::I:
      if (req == R::kReqRd) return mem_grant(S::E);
      if (req == R::kReqRdNe) return mem_grant(S::S);
      if (req == R::kReqWrFromI) return mem_grant(S::M);
      return std::nullopt;
    case S::S:
      if (req == R::kReqRd || req == R::kReqRdNe) return mem_grant(S::S);
      if (req == R::kReqWrFromI)
        return with_inv(mem_grant(S::M), InvalidateSet::kAllSharers);
      if (req == R::kReqWrFromS) return upgrade(InvalidateSet::kOtherSharers);
      return std::nullopt;
    case S::E:
      if (req == R::kReqRd || req == R::kReqRdNe)
        return owner_plan(C::kStTrWb, S::F, S::S, S::F);
      if (req == R::kReqWrFromI) return owner_plan(C::kStTr, S::I, S::M, S::M);
      if (req == R::kReplacement)
        return owner_plan(C::kStWb, S::I, std::nullopt, S::I);
      return std::nullopt;
    case S::M:
      if (req == R::kReqRd || req == R::kReqRdNe)
        return owner_plan(C::kStTr, S::O, S::S, S::O);
      if (req == R::kReqWrFromI) return owner_plan(C::kStTr, S::I, S::M, S::M);
      if (req == R::kReplacement)
        return owner_plan(C::kStWb, S::I, std::nullopt, S::I);
      return std::nullopt;
    case S::O:
    case S::F:
      if (req == R::kReqRd || req == R::kReqRdNe)
        return owner_plan(C::kTr, std::nullopt, S::S, dir);
      if (req == R::kReqWrFromI)
        return with_inv(owner_plan(C::kStTr, S::I, S::M, S::M),
                        InvalidateSet::kAllSharers);
      if (req == R::kReqWrFromS)
        return upgrade(InvalidateSet::kOtherSharersAndOwner);
      if (req == R::kReqWrFromOf) return upgrade(InvalidateSet::kAllSharers);
      if (req == R::kReplacement && dir == S::O)
        return owner_plan(C::kStWb, S::I, std::nullopt, S::I);
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<DirectivePlan> mesi_cell(S dir, DirRequestKind req) {
  using R = DirRequestKind;
  using C = OwnerCommandKind;
  switch (dir) {
    case S::I:
    case S::S:
      return moesif_cell(dir, req);
    case S::E:
    case S::M:
      if (req == R::kReqRd || req == R::kReqRdNe)
        return owner_plan(C::kStTrWb, S::S, S::S, S::S);
      return moesif_cell(dir, req);
    default:
      return std::nullopt;
  }
}

std::string sup(S s) { return std::string("^") + state_char(s); }

}  // namespace

char state_char(CoherenceState s) {
  return kStateNames[static_cast<int>(s)][0];
}

const char* to_string(CoherenceState s) {
  return kStateNames[static_cast<int>(s)];
}

std::optional<CoherenceState> parse_state(std::string_view text) {
  if (text.size() != 1) return std::nullopt;
  for (auto s : kAllStates) {
    if (text[0] == state_char(s) || text[0] == state_char(s) + ('a' - 'A'))
      return s;
  }
  return std::nullopt;
}

Permissions state_permissions(CoherenceState s) {
  return Permissions{is_valid(s), is_writable(s)};
}

const char* to_string(Protocol p) {
  return p == Protocol::kMoesif ? "moesif" : "mesi";
}

std::optional<Protocol> parse_protocol(std::string_view text) {
  if (text == "moesif" || text == "MOESIF") return Protocol::kMoesif;
  if (text == "mesi" || text == "MESI") return Protocol::kMesi;
  return std::nullopt;
}

bool protocol_has_state(Protocol p, CoherenceState s) {
  if (p == Protocol::kMoesif) return true;
  return s != S::O && s != S::F;
}

const char* to_string(LceEventKind k) {
  static constexpr const char* kNames[] = {"Load", "Store", "Inv",   "DATA",
                                           "STW",  "WB",    "TR",    "ST-WB",
                                           "ST-TR", "ST-TR-WB"};
  return kNames[static_cast<int>(k)];
}

bool event_carries_state(LceEventKind k) {
  switch (k) {
    case LceEventKind::kData:
    case LceEventKind::kStW:
    case LceEventKind::kTr:
    case LceEventKind::kStWb:
    case LceEventKind::kStTr:
    case LceEventKind::kStTrWb:
      return true;
    default:
      return false;
  }
}

const char* to_string(LceEmission e) {
  static constexpr const char* kNames[] = {"ReqRd",  "ReqWr",   "InvAck",
                                           "CohAck", "NullWB",  "DirtyWB",
                                           "DATA"};
  return kNames[static_cast<int>(e)];
}

bool LceAction::emits(LceEmission e) const {
  for (int i = 0; i < num_sends; ++i) {
    if (sends[i] == e) return true;
  }
  return false;
}

LceAction lce_event_action(CoherenceState state, const LceEvent& event) {
  check_event(event);
  const LceCell& cell =
      kLceTable[static_cast<int>(state)][static_cast<int>(event.kind)];
  if (cell.next == NextKind::kBlank) blank_lce(state, event.kind);
  return resolve_cell(cell, state, event);
}

LceAction lce_event_action_exec(CoherenceState state, const LceEvent& event) {
  if (event.kind == LceEventKind::kInv &&
      (state == S::O || state == S::F)) {
    check_event(event);
    LceAction a;
    a.sends[0] = LceEmission::kInvAck;
    a.num_sends = 1;
    a.next_state = S::I;
    return a;
  }
  return lce_event_action(state, event);
}

const std::vector<TableCellRef>& lce_table_amendments() { return kAmendments; }

const char* to_string(DirRequestKind k) {
  static constexpr const char* kNames[] = {"ReqRd",        "ReqRd-NE",
                                           "ReqWr from I", "ReqWr from S",
                                           "ReqWr from O/F", "Replacement"};
  return kNames[static_cast<int>(k)];
}

const char* to_string(OwnerCommandKind k) {
  static constexpr const char* kNames[] = {"ST-TR", "ST-TR-WB", "TR", "ST-WB",
                                           "STW"};
  return kNames[static_cast<int>(k)];
}

bool operator==(const OwnerCommand& a, const OwnerCommand& b) {
  return a.command == b.command && a.set_owner_state == b.set_owner_state &&
         a.transfer_state == b.transfer_state;
}

bool operator==(const DirectivePlan& a, const DirectivePlan& b) {
  return a.invalidate_set == b.invalidate_set &&
         a.owner_command == b.owner_command &&
         a.requester_grant == b.requester_grant &&
         a.grant_state == b.grant_state &&
         a.next_dir_state == b.next_dir_state;
}

DirectivePlan dir_request_plan(CoherenceState dir_state, DirRequestKind req,
                               Protocol protocol) {
  std::optional<DirectivePlan> plan = protocol == Protocol::kMoesif
                                          ? moesif_cell(dir_state, req)
                                          : mesi_cell(dir_state, req);
  if (!plan) {
    fail(ErrorCode::kImpossibleTransition,
         std::string("no directory transition for ") + to_string(req) +
             " with directory state " + to_string(dir_state) + " (" +
             to_string(protocol) + ")");
  }
  return *plan;
}

std::string render_plan(const DirectivePlan& plan) {
  std::string out;
  switch (plan.invalidate_set) {
    case InvalidateSet::kNone:
      break;
    case InvalidateSet::kAllSharers:
      out += "Inv all S, ";
      break;
    case InvalidateSet::kOtherSharers:
      out += "Inv other S, ";
      break;
    case InvalidateSet::kOtherSharersAndOwner:
      out += "Inv other S and Owner, ";
      break;
  }
  if (plan.requester_grant == RequesterGrant::kDataFromMemory) {
    out += "DATA to Req";
  } else if (plan.requester_grant == RequesterGrant::kUpgrade) {
    out += "STW" + sup(plan.grant_state) + " to Req";
  } else if (plan.owner_command) {
    const OwnerCommand& c = *plan.owner_command;
    switch (c.command) {
      case OwnerCommandKind::kStTr:
        out += "ST" + sup(*c.set_owner_state) + "-TR" + sup(*c.transfer_state);
        break;
      case OwnerCommandKind::kStTrWb:
        out += "ST" + sup(*c.set_owner_state) + "-TR" +
               sup(*c.transfer_state) + "-WB";
        break;
      case OwnerCommandKind::kTr:
        out += "TR" + sup(*c.transfer_state);
        break;
      case OwnerCommandKind::kStWb:
        out += "ST" + sup(*c.set_owner_state) + "-WB";
        break;
      case OwnerCommandKind::kStW:
        out += "STW" + sup(*c.set_owner_state);
        break;
    }
    out += c.command == OwnerCommandKind::kStWb ? " to Req" : " to Owner";
  }
  out += "/";
  out += state_char(plan.next_dir_state);
  return out;
}

std::string render_lce_action(const LceAction& action, LceEventKind kind) {
  std::string out;
  if (action.hit) {
    out = "Hit";
  } else {
    for (int i = 0; i < action.num_sends; ++i) {
      if (i) out += ", ";
      out += to_string(action.sends[i]);
    }
  }
  (void)kind;
  return out;
}

std::string render_lce_table() {
  std::ostringstream os;
  os << "State";
  for (int k = 0; k < kNumLceEvents; ++k)
    os << " | " << to_string(static_cast<LceEventKind>(k));
  os << "\n";
  for (auto s : kAllStates) {
    os << state_char(s);
    for (int k = 0; k < kNumLceEvents; ++k) {
      const LceCell& cell = kLceTable[static_cast<int>(s)][k];
      os << " | ";
      if (cell.next == NextKind::kBlank) {
        os << "-";
        continue;
      }
      std::string text;
      if (cell.hit) {
        text = "Hit";
      } else {
        for (int i = 0; i < cell.num_sends; ++i) {
          if (i) text += ", ";
          text += to_string(cell.sends[i]);
        }
      }
      if (cell.next == NextKind::kFixed && !(cell.hit && cell.fixed == s)) {
        text += "/";
        text += state_char(cell.fixed);
      } else if (cell.next == NextKind::kAttached) {
        text += "/X";
      }
      os << text;
    }
    os << "\n";
  }
  return os.str();
}

std::string render_dir_table(Protocol protocol) {
  std::ostringstream os;
  os << "Dir";
  for (int r = 0; r < kNumDirRequests; ++r)
    os << " | " << to_string(static_cast<DirRequestKind>(r));
  os << "\n";
  for (auto s : kAllStates) {
    if (!protocol_has_state(protocol, s)) continue;
    os << state_char(s);
    for (int r = 0; r < kNumDirRequests; ++r) {
      auto req = static_cast<DirRequestKind>(r);
      auto plan = protocol == Protocol::kMoesif ? moesif_cell(s, req)
                                                : mesi_cell(s, req);
      os << " | " << (plan ? render_plan(*plan) : std::string("-"));
    }
    os << "\n";
  }
  return os.str();
}

const char* golden_lce_table() { return kGoldenLceTable; }

const char* golden_dir_table(Protocol protocol) {
  return protocol == Protocol::kMoesif ? kGoldenDirTableMoesif
                                       : kGoldenDirTableMesi;
}

void validate_tables() {
  static std::once_flag once;
  static std::string problem;
  std::call_once(once, [] {
    if (render_lce_table() != kGoldenLceTable)
      problem = "cache-controller table drifted from golden text";
    else if (render_dir_table(Protocol::kMoesif) != kGoldenDirTableMoesif)
      problem = "MOESIF directory table drifted from golden text";
    else if (render_dir_table(Protocol::kMesi) != kGoldenDirTableMesi)
      problem = "MESI directory table drifted from golden text";
  });
  if (!problem.empty()) fail(ErrorCode::kInternal, problem);
}

const char* to_string(AddressClass c) {
  switch (c) {
    case AddressClass::kCacheableCoherent:
      return "cacheable";
    case AddressClass::kUncachedToCacheable:
      return "uncached-to-cacheable";
    case AddressClass::kUncachedToUncacheable:
      return "uncached-to-uncacheable";
  }
  return "?";
}

RegionMap::RegionMap()
    : regions_{{0, 0x80000000ull, false}, {0x80000000ull, 0, true}} {}

RegionMap::RegionMap(std::vector<Region> regions) : regions_(std::move(regions)) {
  std::sort(regions_.begin(), regions_.end(),
            [](const Region& a, const Region& b) { return a.base < b.base; });
}

bool RegionMap::cacheable(uint64_t addr) const {
  for (const Region& r : regions_) {
    if (addr >= r.base && (r.limit == 0 || addr < r.limit)) return r.cacheable;
  }
  return false;
}

AddressClass classify_request(uint64_t addr, bool uncached,
                              const RegionMap& regions) {
  bool cacheable = regions.cacheable(addr);
  if (cacheable && !uncached) return AddressClass::kCacheableCoherent;
  if (cacheable) return AddressClass::kUncachedToCacheable;
  return AddressClass::kUncachedToUncacheable;
}

}  // namespace bedrock
