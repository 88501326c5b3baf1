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

#include "bedrock/checker.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

#include "bedrock/directory.hpp"
#include "bedrock/error.hpp"

namespace bedrock {

using S = CoherenceState;

// ---- Rule extraction ----

LceAction RuleSet::lce_action(S s, const LceEvent& e) const {
  const auto& cell = lce[static_cast<int>(s)][static_cast<int>(e.kind)];
  if (!cell) {
    fail(ErrorCode::kImpossibleTransition,
         std::string("no cache-controller transition for ") +
             to_string(e.kind) + " in state " + to_string(s));
  }
  LceAction a;
  a.hit = cell->hit;
  a.sends = cell->sends;
  a.num_sends = cell->num_sends;
  if (cell->next == NextRule::kAttached) {
    if (!e.attached_state) {
      fail(ErrorCode::kImpossibleTransition,
           std::string(to_string(e.kind)) + " is missing its attached state");
    }
    a.next_state = *e.attached_state;
  } else {
    a.next_state = cell->fixed;
  }
  return a;
}

namespace {

std::optional<LceAction> probe(S s, LceEventKind k, std::optional<S> attached) {
  try {
    return lce_event_action_exec(s, LceEvent{k, attached});
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kImpossibleTransition) throw;
    return std::nullopt;
  }
}

LceRule rule_of(const LceAction& a) {
  LceRule r;
  r.hit = a.hit;
  r.sends = a.sends;
  r.num_sends = a.num_sends;
  r.fixed = a.next_state;
  return r;
}

}  // namespace

RuleSet extract_rules(Protocol protocol) {
  RuleSet rs;
  rs.protocol = protocol;
  for (S s : kAllStates) {
    for (int k = 0; k < kNumLceEvents; ++k) {
      auto kind = static_cast<LceEventKind>(k);
      auto& cell = rs.lce[static_cast<int>(s)][k];
      if (!event_carries_state(kind)) {
        if (auto a = probe(s, kind, std::nullopt)) cell = rule_of(*a);
        continue;
      }
      auto a = probe(s, kind, S::S);
      auto b = probe(s, kind, S::M);
      if (!a || !b) continue;
      LceRule r = rule_of(*a);
      if (a->next_state == S::S && b->next_state == S::M) {
        r.next = NextRule::kAttached;
        r.fixed = S::I;
      }
      cell = r;
    }
    if (!protocol_has_state(protocol, s)) continue;
    for (int k = 0; k < kNumDirRequests; ++k) {
      try {
        rs.dir[static_cast<int>(s)][k] =
            dir_request_plan(s, static_cast<DirRequestKind>(k), protocol);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kImpossibleTransition) throw;
      }
    }
  }
  return rs;
}

const char* to_string(Mutation m) {
  switch (m) {
    case Mutation::kNone:
      return "none";
    case Mutation::kDropInvalidations:
      return "drop-invalidations";
    case Mutation::kGrantEWithSharers:
      return "grant-E-with-sharers";
    case Mutation::kSkipWriteback:
      return "skip-writeback";
    case Mutation::kWrongTransferState:
      return "wrong-transfer-state";
  }
  return "?";
}

const std::vector<Mutation>& mutation_catalog() {
  static const std::vector<Mutation> kAll = {
      Mutation::kDropInvalidations, Mutation::kGrantEWithSharers,
      Mutation::kSkipWriteback, Mutation::kWrongTransferState};
  return kAll;
}

Mutation parse_mutation(std::string_view id) {
  if (id == "none") return Mutation::kNone;
  for (Mutation m : mutation_catalog()) {
    if (id == to_string(m)) return m;
  }
  fail(ErrorCode::kUnknownMutation, "unknown mutation '" + std::string(id) +
                                        "'");
}

RuleSet mutate(const RuleSet& rules, Mutation m) {
  RuleSet out = rules;
  auto dir_cell = [&](S row, DirRequestKind k) -> DirectivePlan& {
    auto& c = out.dir[static_cast<int>(row)][static_cast<int>(k)];
    if (!c) fail(ErrorCode::kInternal, "mutation target cell is blank");
    return *c;
  };
  switch (m) {
    case Mutation::kNone:
      break;
    case Mutation::kDropInvalidations:
      dir_cell(S::S, DirRequestKind::kReqWrFromI).invalidate_set =
          InvalidateSet::kNone;
      break;
    case Mutation::kGrantEWithSharers: {
      DirectivePlan& p = dir_cell(S::S, DirRequestKind::kReqRd);
      p.grant_state = S::E;
      p.next_dir_state = S::E;
      break;
    }
    case Mutation::kSkipWriteback: {
      auto& c = out.lce[static_cast<int>(S::M)]
                       [static_cast<int>(LceEventKind::kStWb)];
      if (!c) fail(ErrorCode::kInternal, "mutation target cell is blank");
      for (int i = 0; i < c->num_sends; ++i) {
        if (c->sends[i] == LceEmission::kDirtyWb)
          c->sends[i] = LceEmission::kNullWb;
      }
      break;
    }
    case Mutation::kWrongTransferState: {
      DirectivePlan& p = dir_cell(S::M, DirRequestKind::kReqRd);
      if (!p.owner_command) fail(ErrorCode::kInternal, "no owner command");
      p.owner_command->transfer_state = S::E;
      break;
    }
  }
  return out;
}

RuleSet mutate(Protocol protocol, Mutation m) {
  return mutate(extract_rules(protocol), m);
}

int rule_difference(const RuleSet& a, const RuleSet& b) {
  int n = 0;
  for (int s = 0; s < kNumStates; ++s) {
    for (int k = 0; k < kNumLceEvents; ++k) n += a.lce[s][k] != b.lce[s][k];
    for (int k = 0; k < kNumDirRequests; ++k) n += a.dir[s][k] != b.dir[s][k];
  }
  return n;
}

// ---- Abstract model ----

namespace {

constexpr int kMaxCaches = 16;

enum class Req : uint8_t { kNone, kRd, kRdNe, kWr, kEvict };
// Directory-to-cache and owner-to-requester traffic. kFill completes a
// silent eviction (the replacing block's fill).
enum class In : uint8_t { kNone, kInv, kData, kStW, kStWb, kStTr, kStTrWb, kTr,
                          kFill };
enum class Out : uint8_t { kNone, kInvAck, kCohAck, kNullWb, kDirtyWb };
enum class Pend : uint8_t { kNone, kRequest, kEvict };

const char* req_name(Req r) {
  static constexpr const char* k[] = {"-", "ReqRd", "ReqRd-NE", "ReqWr",
                                      "Evict"};
  return k[static_cast<int>(r)];
}
const char* in_name(In m) {
  static constexpr const char* k[] = {"-",  "Inv",      "DATA", "STW", "ST-WB",
                                      "ST-TR", "ST-TR-WB", "TR",  "Fill"};
  return k[static_cast<int>(m)];
}
const char* out_name(Out m) {
  static constexpr const char* k[] = {"-", "InvAck", "CohAck", "NullWB",
                                      "DirtyWB"};
  return k[static_cast<int>(m)];
}

// Data is abstracted to freshness against a global write counter: a copy is
// fresh when it holds the value of the latest store.
struct Cache {
  S st = S::I;
  bool fresh = false;
  Pend pend = Pend::kNone;
  S dir = S::I;  // directory's duplicate tag state for this cache
  Req req = Req::kNone;
  In in = In::kNone;
  S in_state = S::I;
  S in_transfer = S::I;
  uint8_t in_target = 0;
  bool in_fresh = false;
  Out out = Out::kNone;
  bool out_fresh = false;
};

struct Dir {
  bool busy = false;
  bool post = false;  // grant still to be issued once acks arrive
  bool wait_wb = false;
  bool wait_ack = false;
  bool mem_fresh = true;
  uint8_t req = 0;
  uint8_t acks = 0;
  S row = S::I;
  DirRequestKind kind = DirRequestKind::kReqRd;
};

struct State {
  int n = 0;
  std::array<Cache, kMaxCaches> c{};
  Dir d;
};

struct Step {
  State next;
  std::string label;
  std::optional<std::string> error;  // impossible transition
};

class Model {
 public:
  Model(const RuleSet& rules, int n) : rules_(rules), n_(n) {}

  State initial() const {
    State s;
    s.n = n_;
    return s;
  }

  int bytes() const { return 5 * n_ + 4; }

  static void encode_cache(const Cache& c, uint8_t* p) {
    p[0] = static_cast<uint8_t>(static_cast<int>(c.st) | (c.fresh << 3) |
                                (static_cast<int>(c.pend) << 4));
    p[1] = static_cast<uint8_t>(static_cast<int>(c.dir) |
                                (static_cast<int>(c.req) << 3) |
                                (c.out_fresh << 6) | (c.in_fresh << 7));
    p[2] = static_cast<uint8_t>(static_cast<int>(c.in) |
                                (static_cast<int>(c.out) << 4));
    p[3] = static_cast<uint8_t>(static_cast<int>(c.in_state) |
                                (static_cast<int>(c.in_transfer) << 3));
    p[4] = c.in_target;
  }

  void encode(const State& s, uint8_t* out) const {
    for (int i = 0; i < n_; ++i) encode_cache(s.c[i], out + 5 * i);
    uint8_t* p = out + 5 * n_;
    const Dir& d = s.d;
    p[0] = static_cast<uint8_t>(d.busy | (d.post << 1) | (d.wait_wb << 2) |
                                (d.wait_ack << 3) | (d.mem_fresh << 4));
    p[1] = d.req;
    p[2] = d.acks;
    p[3] = static_cast<uint8_t>(static_cast<int>(d.row) |
                                (static_cast<int>(d.kind) << 3));
  }

  State decode(const uint8_t* in) const {
    State s;
    s.n = n_;
    for (int i = 0; i < n_; ++i) {
      Cache& c = s.c[i];
      const uint8_t* p = in + 5 * i;
      c.st = static_cast<S>(p[0] & 7);
      c.fresh = (p[0] >> 3) & 1;
      c.pend = static_cast<Pend>((p[0] >> 4) & 3);
      c.dir = static_cast<S>(p[1] & 7);
      c.req = static_cast<Req>((p[1] >> 3) & 7);
      c.out_fresh = (p[1] >> 6) & 1;
      c.in_fresh = (p[1] >> 7) & 1;
      c.in = static_cast<In>(p[2] & 15);
      c.out = static_cast<Out>(p[2] >> 4);
      c.in_state = static_cast<S>(p[3] & 7);
      c.in_transfer = static_cast<S>((p[3] >> 3) & 7);
      c.in_target = p[4];
    }
    const uint8_t* p = in + 5 * n_;
    Dir& d = s.d;
    d.busy = p[0] & 1;
    d.post = (p[0] >> 1) & 1;
    d.wait_wb = (p[0] >> 2) & 1;
    d.wait_ack = (p[0] >> 3) & 1;
    d.mem_fresh = (p[0] >> 4) & 1;
    d.req = p[1];
    d.acks = p[2];
    d.row = static_cast<S>(p[3] & 7);
    d.kind = static_cast<DirRequestKind>(p[3] >> 3);
    return s;
  }

  // Relabels caches so that symmetric states share one representative.
  void canonicalize(State& s) const {
    std::array<uint8_t, kMaxCaches> order{};
    std::array<uint64_t, kMaxCaches> key{};
    for (int i = 0; i < n_; ++i) {
      const Cache& c = s.c[i];
      uint8_t buf[5];
      encode_cache(c, buf);
      uint64_t k = 0;
      for (int b = 0; b < 4; ++b) k = (k << 8) | buf[b];
      bool is_req = s.d.busy && s.d.req == i;
      k = (k << 1) | is_req;
      bool is_target = false;
      for (int j = 0; j < n_; ++j) {
        if (s.c[j].in != In::kNone && s.c[j].in_target == i) is_target = true;
      }
      k = (k << 1) | is_target;
      key[i] = k;
      order[i] = static_cast<uint8_t>(i);
    }
    std::stable_sort(order.begin(), order.begin() + n_,
                     [&](uint8_t a, uint8_t b) { return key[a] < key[b]; });
    std::array<uint8_t, kMaxCaches> pos{};
    for (int k = 0; k < n_; ++k) pos[order[k]] = static_cast<uint8_t>(k);
    State t = s;
    for (int k = 0; k < n_; ++k) {
      t.c[k] = s.c[order[k]];
      if (t.c[k].in != In::kNone) t.c[k].in_target = pos[t.c[k].in_target];
    }
    if (t.d.busy) t.d.req = pos[t.d.req];
    s = t;
  }

  std::optional<std::string> violation(const State& s) const {
    int exclusive = 0, valid = 0, owners = 0;
    bool stale = false;
    for (int i = 0; i < n_; ++i) {
      S st = s.c[i].st;
      if (!is_valid(st)) continue;
      ++valid;
      if (st == S::E || st == S::M) ++exclusive;
      if (is_owner(st)) ++owners;
      if (!s.c[i].fresh) stale = true;
    }
    if (exclusive > 0 && valid > 1) return "SWMR";
    if (owners > 1) return "single-owner";
    if (stale) return "data-value";
    return std::nullopt;
  }

  // All enabled transitions in a fixed order.
  void successors(const State& s, std::vector<Step>& out, bool labels) const {
    out.clear();
    auto emit = [&](State&& next, const std::function<std::string()>& label,
                    std::optional<std::string> error = std::nullopt) {
      normalize(next);
      out.push_back(Step{std::move(next), labels ? label() : std::string(),
                         std::move(error)});
    };
    for (int i = 0; i < n_; ++i) {
      const Cache& c = s.c[i];
      std::string ci = "c" + std::to_string(i);
      bool idle = c.pend == Pend::kNone && c.req == Req::kNone;
      LceAction load = rules_.lce_action(c.st, LceEvent{LceEventKind::kLoad, {}});
      if (idle && load.emits(LceEmission::kReqRd)) {
        for (Req r : {Req::kRd, Req::kRdNe}) {
          State t = s;
          t.c[i].req = r;
          t.c[i].pend = Pend::kRequest;
          t.c[i].st = load.next_state;
          emit(std::move(t), [&] { return ci + " load: " + req_name(r); });
        }
      }
      LceAction store =
          rules_.lce_action(c.st, LceEvent{LceEventKind::kStore, {}});
      if (store.hit) {
        State t = s;
        for (int j = 0; j < n_; ++j) {
          t.c[j].fresh = false;
          t.c[j].in_fresh = false;
          t.c[j].out_fresh = false;
        }
        t.d.mem_fresh = false;
        t.c[i].st = store.next_state;
        t.c[i].fresh = true;
        emit(std::move(t), [&] {
          return ci + " store hit: " + to_string(store.next_state);
        });
      } else if (idle && store.emits(LceEmission::kReqWr)) {
        State t = s;
        t.c[i].req = Req::kWr;
        t.c[i].pend = Pend::kRequest;
        emit(std::move(t), [&] { return ci + " store: ReqWr"; });
      }
      if (idle && is_valid(c.st)) {
        State t = s;
        t.c[i].req = Req::kEvict;
        t.c[i].pend = Pend::kEvict;
        emit(std::move(t), [&] { return ci + " evict"; });
      }
      if (c.in != In::kNone) deliver(s, i, emit);
    }
    if (!s.d.busy) {
      for (int i = 0; i < n_; ++i) {
        if (s.c[i].req != Req::kNone) admit(s, i, emit);
      }
    }
    for (int i = 0; i < n_; ++i) {
      if (s.c[i].out != Out::kNone) respond(s, i, emit);
    }
  }

 private:
  template <typename E>
  void deliver(const State& s, int i, E& emit) const {
    const Cache& c = s.c[i];
    std::string label = "c" + std::to_string(i) + " recv " + in_name(c.in);
    if (c.in == In::kData || c.in == In::kStW || c.in == In::kStWb ||
        c.in == In::kStTr || c.in == In::kStTrWb) {
      label += std::string("^") + to_string(c.in_state);
    }
    if (c.in == In::kStTr || c.in == In::kStTrWb || c.in == In::kTr) {
      label += std::string(" TR^") + to_string(c.in_transfer) + " to c" +
               std::to_string(c.in_target);
    }
    State t = s;
    Cache& tc = t.c[i];
    tc.in = In::kNone;
    if (c.in == In::kFill) {
      tc.st = S::I;
      tc.pend = Pend::kNone;
      if (!send_out(tc, Out::kCohAck, false)) {
        emit(std::move(t), [&] { return label; }, "response channel overflow");
        return;
      }
      emit(std::move(t), [&] { return label; }, std::nullopt);
      return;
    }
    LceEventKind kind{};
    switch (c.in) {
      case In::kInv: kind = LceEventKind::kInv; break;
      case In::kData: kind = LceEventKind::kData; break;
      case In::kStW: kind = LceEventKind::kStW; break;
      case In::kStWb: kind = LceEventKind::kStWb; break;
      case In::kStTr: kind = LceEventKind::kStTr; break;
      case In::kStTrWb: kind = LceEventKind::kStTrWb; break;
      case In::kTr: kind = LceEventKind::kTr; break;
      default: break;
    }
    std::optional<S> attached;
    if (event_carries_state(kind)) attached = c.in_state;
    LceAction act;
    try {
      act = rules_.lce_action(c.st, LceEvent{kind, attached});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kImpossibleTransition) throw;
      std::string what = e.what();
      emit(State(s), [&] { return label; }, what);
      return;
    }
    for (int k = 0; k < act.num_sends; ++k) {
      bool ok = true;
      switch (act.sends[k]) {
        case LceEmission::kInvAck: ok = send_out(tc, Out::kInvAck, false); break;
        case LceEmission::kCohAck:
          ok = send_out(tc, Out::kCohAck, false);
          tc.pend = Pend::kNone;
          break;
        case LceEmission::kNullWb: ok = send_out(tc, Out::kNullWb, false); break;
        case LceEmission::kDirtyWb:
          ok = send_out(tc, Out::kDirtyWb, c.fresh);
          break;
        case LceEmission::kDataToTarget: {
          Cache& dst = t.c[c.in_target];
          if (dst.in != In::kNone) {
            ok = false;
            break;
          }
          dst.in = In::kData;
          dst.in_state = c.in_transfer;
          dst.in_fresh = c.fresh;
          break;
        }
        case LceEmission::kReqRd:
        case LceEmission::kReqWr:
          ok = false;
          break;
      }
      if (!ok) {
        emit(std::move(t), [&] { return label; }, "channel overflow");
        return;
      }
    }
    if (c.in == In::kData) tc.fresh = c.in_fresh;
    if (c.in == In::kStWb && tc.pend == Pend::kEvict) tc.pend = Pend::kNone;
    tc.st = act.next_state;
    emit(std::move(t), [&] { return label; }, std::nullopt);
  }

  static bool send_out(Cache& c, Out m, bool fresh) {
    if (c.out != Out::kNone) return false;
    c.out = m;
    c.out_fresh = fresh;
    return true;
  }

  static bool send_in(State& t, int to, In m, S state, S transfer = S::I,
                      int target = 0, bool fresh = false) {
    Cache& c = t.c[to];
    if (c.in != In::kNone) return false;
    c.in = m;
    c.in_state = state;
    c.in_transfer = transfer;
    c.in_target = static_cast<uint8_t>(target);
    c.in_fresh = fresh;
    return true;
  }

  static In command_msg(OwnerCommandKind k) {
    switch (k) {
      case OwnerCommandKind::kStTr: return In::kStTr;
      case OwnerCommandKind::kStTrWb: return In::kStTrWb;
      case OwnerCommandKind::kTr: return In::kTr;
      case OwnerCommandKind::kStWb: return In::kStWb;
      case OwnerCommandKind::kStW: return In::kStW;
    }
    return In::kNone;
  }

  static bool carries_wb(OwnerCommandKind k) {
    return k == OwnerCommandKind::kStTrWb || k == OwnerCommandKind::kStWb;
  }

  // Returns an error text when the grant cannot be issued.
  std::optional<std::string> run_post(State& t) const {
    Dir& d = t.d;
    d.post = false;
    const auto& plan = rules_.plan(d.row, d.kind);
    int req = d.req;
    if (plan->requester_grant == RequesterGrant::kUpgrade) {
      if (!send_in(t, req, In::kStW, S::M)) return "channel overflow";
      return std::nullopt;
    }
    if (plan->owner_command) {
      int owner = -1;
      for (int c = 0; c < n_; ++c) {
        if (c != req && is_owner(t.c[c].dir)) owner = c;
      }
      if (owner < 0) return std::string("no owner for ") + to_string(d.kind);
      const OwnerCommand& oc = *plan->owner_command;
      S set = oc.set_owner_state.value_or(t.c[owner].dir);
      if (!send_in(t, owner, command_msg(oc.command), set,
                   oc.transfer_state.value_or(S::I), req)) {
        return "channel overflow";
      }
      if (oc.set_owner_state) t.c[owner].dir = *oc.set_owner_state;
      d.wait_wb = carries_wb(oc.command);
      return std::nullopt;
    }
    if (plan->requester_grant == RequesterGrant::kDataFromMemory) {
      if (!send_in(t, req, In::kData, plan->grant_state, S::I, 0,
                   d.mem_fresh)) {
        return "channel overflow";
      }
    }
    return std::nullopt;
  }

  static void maybe_finish(Dir& d) {
    if (d.busy && !d.post && d.acks == 0 && !d.wait_wb && !d.wait_ack) {
      bool mem = d.mem_fresh;
      d = Dir{};
      d.mem_fresh = mem;
    }
  }

  template <typename E>
  void admit(const State& s, int i, E& emit) const {
    const Cache& c = s.c[i];
    std::string label = "dir takes " + std::string(req_name(c.req)) + " from c" +
                        std::to_string(i);
    State t = s;
    Dir& d = t.d;
    t.c[i].req = Req::kNone;
    d.busy = true;
    d.req = static_cast<uint8_t>(i);
    if (c.req == Req::kEvict) {
      const auto& plan = rules_.plan(c.dir, DirRequestKind::kReplacement);
      if (plan && plan->owner_command) {
        const OwnerCommand& oc = *plan->owner_command;
        S set = oc.set_owner_state.value_or(S::I);
        if (!send_in(t, i, command_msg(oc.command), set)) {
          emit(std::move(t), [&] { return label; }, "channel overflow");
          return;
        }
        t.c[i].dir = set;
        d.wait_wb = carries_wb(oc.command);
        d.row = c.dir;
        d.kind = DirRequestKind::kReplacement;
        maybe_finish(d);
        emit(std::move(t), [&] { return label; }, std::nullopt);
        return;
      }
      // No directory command: the tag is overwritten and the fill retires
      // the victim.
      t.c[i].dir = S::I;
      send_in(t, i, In::kFill, S::I);
      d.wait_ack = true;
      d.kind = DirRequestKind::kReplacement;
      emit(std::move(t), [&] { return label; }, std::nullopt);
      return;
    }
    SharersVectors sv(n_);
    for (int k = 0; k < n_; ++k) {
      sv.hits[k] = is_valid(s.c[k].dir);
      sv.states[k] = s.c[k].dir;
    }
    S row = summary_state(sv);
    DirRequestKind kind =
        request_kind(c.req == Req::kWr, c.req == Req::kRdNe, c.dir);
    label += std::string(" (") + to_string(row) + ", " + to_string(kind) + ")";
    const auto& plan = rules_.plan(row, kind);
    if (!plan) {
      emit(State(s), [&] { return label; },
           std::string("no directory transition for ") + to_string(kind) +
               " in state " + to_string(row));
      return;
    }
    d.row = row;
    d.kind = kind;
    d.post = true;
    d.wait_ack = true;
    t.c[i].dir = plan->requester_grant == RequesterGrant::kUpgrade
                     ? S::M
                     : plan->grant_state;
    if (plan->invalidate_set != InvalidateSet::kNone) {
      bool owner_too =
          plan->invalidate_set == InvalidateSet::kOtherSharersAndOwner;
      for (int k = 0; k < n_; ++k) {
        if (k == i) continue;
        S ds = s.c[k].dir;
        if (ds != S::S && !(owner_too && is_owner(ds))) continue;
        if (!send_in(t, k, In::kInv, S::I)) {
          emit(std::move(t), [&] { return label; }, "channel overflow");
          return;
        }
        t.c[k].dir = S::I;
        ++d.acks;
      }
    }
    if (d.acks == 0) {
      if (auto err = run_post(t)) {
        emit(std::move(t), [&] { return label; }, err);
        return;
      }
    }
    emit(std::move(t), [&] { return label; }, std::nullopt);
  }

  template <typename E>
  void respond(const State& s, int i, E& emit) const {
    const Cache& c = s.c[i];
    const Dir& d = s.d;
    bool expected = false;
    switch (c.out) {
      case Out::kInvAck: expected = d.busy && d.acks > 0; break;
      case Out::kCohAck: expected = d.busy && d.wait_ack && d.req == i; break;
      case Out::kNullWb:
      case Out::kDirtyWb: expected = d.busy && d.wait_wb; break;
      case Out::kNone: break;
    }
    if (!expected) return;
    std::string label = "dir recv " + std::string(out_name(c.out)) + " from c" +
                        std::to_string(i);
    State t = s;
    t.c[i].out = Out::kNone;
    Dir& td = t.d;
    std::optional<std::string> err;
    switch (c.out) {
      case Out::kInvAck:
        if (--td.acks == 0 && td.post) err = run_post(t);
        break;
      case Out::kCohAck:
        td.wait_ack = false;
        break;
      case Out::kDirtyWb:
        td.mem_fresh = c.out_fresh;
        td.wait_wb = false;
        break;
      case Out::kNullWb:
        td.wait_wb = false;
        break;
      case Out::kNone:
        break;
    }
    maybe_finish(td);
    emit(std::move(t), [&] { return label; }, err);
  }

  void normalize(State& s) const {
    for (int i = 0; i < n_; ++i) {
      Cache& c = s.c[i];
      if (!is_valid(c.st)) c.fresh = false;
      if (c.in == In::kNone) {
        c.in_state = S::I;
        c.in_transfer = S::I;
        c.in_target = 0;
        c.in_fresh = false;
      } else if (c.in != In::kData) {
        c.in_fresh = false;
      }
      if (c.out != Out::kDirtyWb) c.out_fresh = false;
    }
  }

  const RuleSet& rules_;
  int n_;
};

std::string describe(const State& s) {
  std::ostringstream os;
  for (int i = 0; i < s.n; ++i) {
    const Cache& c = s.c[i];
    if (i) os << ' ';
    os << 'c' << i << '=' << to_string(c.st);
    if (is_valid(c.st)) os << (c.fresh ? "" : "(stale)");
  }
  os << " | dir:";
  for (int i = 0; i < s.n; ++i) os << ' ' << to_string(s.c[i].dir);
  os << " | memory " << (s.d.mem_fresh ? "fresh" : "stale");
  return os.str();
}

class StateTable {
 public:
  explicit StateTable(int width) : width_(width) { rehash(1u << 16); }

  // Returns the index of the state, inserting it when new.
  std::pair<uint32_t, bool> insert(const uint8_t* key) {
    if ((count_ + 1) * 4 > slots_.size() * 3) rehash(slots_.size() * 2);
    size_t mask = slots_.size() - 1;
    size_t h = hash(key) & mask;
    while (true) {
      uint32_t v = slots_[h];
      if (v == kEmpty) {
        uint32_t idx = static_cast<uint32_t>(count_++);
        arena_.insert(arena_.end(), key, key + width_);
        slots_[h] = idx;
        return {idx, true};
      }
      if (std::equal(key, key + width_, arena_.data() + size_t(v) * width_))
        return {v, false};
      h = (h + 1) & mask;
    }
  }

  const uint8_t* at(uint32_t idx) const {
    return arena_.data() + size_t(idx) * width_;
  }
  size_t size() const { return count_; }

 private:
  static constexpr uint32_t kEmpty = 0xffffffffu;

  size_t hash(const uint8_t* key) const {
    return std::hash<std::string_view>{}(std::string_view(
        reinterpret_cast<const char*>(key), static_cast<size_t>(width_)));
  }

  void rehash(size_t n) {
    slots_.assign(n, kEmpty);
    size_t mask = n - 1;
    for (size_t i = 0; i < count_; ++i) {
      size_t h = hash(at(static_cast<uint32_t>(i))) & mask;
      while (slots_[h] != kEmpty) h = (h + 1) & mask;
      slots_[h] = static_cast<uint32_t>(i);
    }
  }

  int width_;
  size_t count_ = 0;
  std::vector<uint8_t> arena_;
  std::vector<uint32_t> slots_;
};

struct Search {
  CheckResult result;
  // Path to the violation as successor indices from the initial state.
  std::vector<uint32_t> path;
};

Search bfs(const Model& model, int n, const CheckOptions& opts,
           int depth_limit) {
  (void)n;
  Search out;
  CheckResult& r = out.result;
  int width = model.bytes();
  StateTable table(width);
  std::vector<uint32_t> parent;
  std::vector<uint16_t> via;
  std::vector<uint8_t> buf(width);

  State init = model.initial();
  if (opts.symmetry) model.canonicalize(init);
  model.encode(init, buf.data());
  table.insert(buf.data());
  parent.push_back(0);
  via.push_back(0);

  auto path_to = [&](uint32_t idx) {
    std::vector<uint32_t> p;
    while (idx != 0) {
      p.push_back(via[idx]);
      idx = parent[idx];
    }
    std::reverse(p.begin(), p.end());
    return p;
  };

  std::vector<Step> steps;
  size_t level_end = 1;
  int depth = 0;
  for (size_t idx = 0; idx < table.size(); ++idx) {
    if (idx == level_end) {
      ++depth;
      level_end = table.size();
    }
    if (depth_limit >= 0 && depth >= depth_limit) break;
    State s = model.decode(table.at(static_cast<uint32_t>(idx)));
    model.successors(s, steps, false);
    for (size_t j = 0; j < steps.size(); ++j) {
      ++r.transitions;
      Step& st = steps[j];
      if (st.error) {
        r.invariant = "no-impossible-transition";
        out.path = path_to(static_cast<uint32_t>(idx));
        out.path.push_back(static_cast<uint32_t>(j));
        r.states = table.size();
        r.depth = depth + 1;
        return out;
      }
      if (opts.symmetry) model.canonicalize(st.next);
      model.encode(st.next, buf.data());
      if (opts.max_states && table.size() >= opts.max_states) {
        // Still dedupe against known states; only new ones are refused.
        r.bounded = true;
        continue;
      }
      auto [child, fresh] = table.insert(buf.data());
      if (!fresh) continue;
      parent.push_back(static_cast<uint32_t>(idx));
      via.push_back(static_cast<uint16_t>(j));
      if (auto v = model.violation(st.next)) {
        r.invariant = *v;
        out.path = path_to(child);
        r.states = table.size();
        r.depth = depth + 1;
        return out;
      }
    }
  }
  r.states = table.size();
  r.depth = depth;
  r.verified = !r.bounded && depth_limit < 0;
  return out;
}

std::vector<std::string> labels_for(const Model& model,
                                    const std::vector<uint32_t>& path,
                                    std::string* final_state) {
  std::vector<std::string> trace;
  std::vector<Step> steps;
  State s = model.initial();
  for (uint32_t j : path) {
    model.successors(s, steps, true);
    trace.push_back(steps.at(j).label);
    s = steps.at(j).next;
  }
  if (final_state) *final_state = describe(s);
  return trace;
}

}  // namespace

CheckResult explore(const RuleSet& rules, int caches, const CheckOptions& opts) {
  if (caches < 2 || caches > kMaxCaches) {
    fail(ErrorCode::kInvalidArgument,
         "caches must be in [2, " + std::to_string(kMaxCaches) + "]");
  }
  Model model(rules, caches);
  Search s = bfs(model, caches, opts, -1);
  if (!s.result.invariant) return s.result;
  CheckResult r = s.result;
  if (opts.symmetry) {
    // Redo the shortest search on raw cache ids for a readable trace.
    CheckOptions raw = opts;
    raw.symmetry = false;
    raw.max_states = 0;
    Search plain = bfs(model, caches, raw, r.depth);
    if (!plain.result.invariant) {
      fail(ErrorCode::kInternal, "counterexample lost without symmetry");
    }
    r.invariant = plain.result.invariant;
    s.path = plain.path;
  }
  r.verified = false;
  r.depth = static_cast<int>(s.path.size());
  r.trace = labels_for(model, s.path, &r.final_state);
  return r;
}

CheckResult explore(Protocol protocol, int caches, Mutation m,
                    const CheckOptions& opts) {
  return explore(mutate(protocol, m), caches, opts);
}

std::optional<std::string> replay(const RuleSet& rules, int caches,
                                  const std::vector<std::string>& trace) {
  if (caches < 2 || caches > kMaxCaches) {
    fail(ErrorCode::kInvalidArgument, "bad cache count");
  }
  Model model(rules, caches);
  State s = model.initial();
  std::vector<Step> steps;
  for (size_t k = 0; k < trace.size(); ++k) {
    model.successors(s, steps, true);
    auto it = std::find_if(steps.begin(), steps.end(), [&](const Step& st) {
      return st.label == trace[k];
    });
    if (it == steps.end()) {
      fail(ErrorCode::kInvalidArgument,
           "step " + std::to_string(k + 1) + " not enabled: " + trace[k]);
    }
    if (it->error) {
      if (k + 1 != trace.size()) {
        fail(ErrorCode::kInvalidArgument, "trace continues past an error");
      }
      return std::string("no-impossible-transition");
    }
    s = it->next;
    if (auto v = model.violation(s)) {
      if (k + 1 != trace.size()) {
        fail(ErrorCode::kInvalidArgument, "trace continues past a violation");
      }
      return v;
    }
  }
  return std::nullopt;
}

std::string format_result(const CheckResult& r) {
  std::ostringstream os;
  if (r.invariant) {
    os << "Violation: " << *r.invariant << " after " << r.trace.size()
       << " transitions\n";
    for (size_t i = 0; i < r.trace.size(); ++i) {
      os << "  " << (i + 1) << ". " << r.trace[i] << "\n";
    }
    os << "  state: " << r.final_state << "\n";
  } else if (r.bounded) {
    os << "Bounded: no violation in " << r.states << " states, "
       << r.transitions << " transitions (state limit reached, depth "
       << r.depth << ")\n";
  } else {
    os << "Verified: " << r.states << " states, " << r.transitions
       << " transitions, depth " << r.depth << "\n";
  }
  return os.str();
}

}  // namespace bedrock
