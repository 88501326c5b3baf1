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

#include <string>

#include "bedrock/cce.hpp"
#include "bedrock/error.hpp"
#include "bedrock/network.hpp"

namespace bedrock {

namespace {

MsgType owner_msg(OwnerCommandKind k) {
  switch (k) {
    case OwnerCommandKind::kStTr: return MsgType::kCmdStTr;
    case OwnerCommandKind::kStTrWb: return MsgType::kCmdStTrWb;
    case OwnerCommandKind::kTr: return MsgType::kCmdTr;
    case OwnerCommandKind::kStWb: return MsgType::kCmdStWb;
    case OwnerCommandKind::kStW: return MsgType::kCmdStW;
  }
  return MsgType::kCmdTr;
}

bool carries_wb(OwnerCommandKind k) {
  return k == OwnerCommandKind::kStTrWb || k == OwnerCommandKind::kStWb;
}

CoherenceState presumed_state(const Mshr& m) {
  if (m.flag(Flag::kRqf)) return CoherenceState::M;
  if (m.flag(Flag::kNerf)) return CoherenceState::S;
  return CoherenceState::E;
}

bool is_writeback(const Message* m) {
  return m && (m->type == MsgType::kRespNullWb ||
               m->type == MsgType::kRespDirtyWb);
}

}  // namespace

FsmCce::FsmCce(const CceConfig& cfg) : CoherenceEngine(cfg) {}

bool FsmCce::idle() const { return st_ == St::kReady && hold_ == 0; }

bool FsmCce::sink_coh_ack(Network& net) {
  const Message* r = net.peek(cfg_.endpoint, NetKind::kResponse);
  if (!r || r->type != MsgType::kRespCohAck) return false;
  Message m = net.pop(cfg_.endpoint, NetKind::kResponse);
  pending_.adjust(way_group(m.addr), -1);
  return true;
}

void FsmCce::tick(Network& net, uint64_t now) {
  port_pending_write_ = port_spec_read_ = port_dir_ = false;
  mem_resp_step(net, now);
  Step s;
  if (hold_ > 0) {
    --hold_;
    s = Step::kBusy;
  } else {
    s = step(net, now);
  }
  if (TransactionRecord* r = current()) {
    if (s == Step::kBusy) {
      ++r->busy_cycles;
      ++stats_.busy_cycles;
      r->end_cycle = now;
    } else if (s == Step::kStall) {
      ++r->stall_cycles;
      ++stats_.stall_cycles;
    }
    if (st_ == St::kReady && hold_ == 0) end_record(now);
  }
  pending_.commit();
}

void FsmCce::finish(uint64_t now) {
  (void)now;
  st_ = St::kReady;
  has_plan_ = false;
  inv_targets_.clear();
  inv_sent_ = inv_acked_ = 0;
  flush_.clear();
  flush_sent_ = flush_done_ = 0;
  repl_done_ = inv_done_ = false;
}

FsmCce::Step FsmCce::ready(Network& net, uint64_t now) {
  if (sink_coh_ack(net)) return Step::kIdle;
  if (const Message* r = net.peek(cfg_.endpoint, NetKind::kResponse)) {
    fail(ErrorCode::kProtocol, "idle CCE received " + r->describe());
  }
  if (!net.peek(cfg_.endpoint, NetKind::kRequest)) return Step::kIdle;
  Message req = net.pop(cfg_.endpoint, NetKind::kRequest);
  mshr_ = load_request(req);
  bool uncached = mshr_.flag(Flag::kUcf);
  class_ = classify_request(req.addr, uncached, cfg_.regions);
  begin_record(mshr_, now);
  st_ = class_ == AddressClass::kUncachedToUncacheable ? St::kUcSend
                                                       : St::kCheckPending;
  return Step::kBusy;
}

void FsmCce::next_phase() {
  if (mshr_.flag(Flag::kRf) && !repl_done_) {
    st_ = St::kReplSend;
  } else if (!inv_targets_.empty() && !inv_done_) {
    st_ = St::kInvSend;
  } else if (plan_.requester_grant == RequesterGrant::kUpgrade) {
    st_ = St::kUpgradeSquash;
  } else if (plan_.owner_command) {
    st_ = St::kTransferSend;
  } else {
    st_ = St::kResolveSpec;
  }
}

void FsmCce::after_write_next() { next_phase(); }

FsmCce::Step FsmCce::step(Network& net, uint64_t now) {
  const Geometry& g = cfg_.geometry;
  const int wg = way_group(mshr_.paddr);
  const int beats = cfg_.beats_per_block();
  switch (st_) {
    case St::kReady:
      return ready(net, now);

    case St::kCheckPending:
      if (pending_.read(wg)) {
        sink_coh_ack(net);
        return Step::kStall;
      }
      mshr_.set_flag(Flag::kPf, false);
      st_ = St::kWritePending;
      return Step::kBusy;

    case St::kWritePending:
      pending_.adjust(wg, 1);
      mark_admitted(now);
      st_ = class_ == AddressClass::kCacheableCoherent ? St::kSpecRead
                                                       : St::kDirRead;
      return Step::kBusy;

    case St::kSpecRead: {
      Message m = make_mem(MsgType::kMemRd, mshr_.paddr);
      m.lce = mshr_.req_lce;
      m.way = mshr_.lru_way;
      m.state = presumed_state(mshr_);
      m.spec = true;
      m.wp = true;
      if (!send(net, std::move(m), now)) return Step::kStall;
      mshr_.next_state = presumed_state(mshr_);
      spec_.set(wg);
      pending_.adjust(wg, 1);
      st_ = St::kDirRead;
      return Step::kBusy;
    }

    case St::kDirRead:
      read_ = dir_.read_way_group(mshr_.paddr, mshr_.req_lce, mshr_.lru_way);
      hold_ = read_.latency - 1;
      st_ = St::kGad;
      return Step::kBusy;

    case St::kGad: {
      gad_ = gad(read_.sharers, read_.lru,
                 RequestSummary{mshr_.req_lce, mshr_.flag(Flag::kRqf)});
      mshr_.apply_gad(gad_);
      int set = g.set_of(mshr_.paddr);
      mshr_.lru_addr = g.addr_of(read_.lru.lru_tag, set);
      mshr_.lru_state = read_.lru.lru_state;
      TransactionRecord* r = current();
      r->lce_state = gad_.req_state;
      r->dir_state = gad_.owner ? gad_.owner->state
                     : gad_.cached_s ? CoherenceState::S
                                     : CoherenceState::I;
      r->sharers =
          gad_.other_sharers + (gad_.req_state == CoherenceState::S ? 1 : 0);
      if (class_ == AddressClass::kUncachedToCacheable) {
        mshr_.set_flag(Flag::kRf, false);
        for (int c = 0; c < read_.sharers.size(); ++c) {
          if (!read_.sharers.hits[c]) continue;
          flush_.push_back(
              FlushTarget{c, read_.sharers.ways[c], read_.sharers.states[c]});
        }
        st_ = flush_.empty() ? St::kUcSend : St::kUcFlushSend;
        return Step::kBusy;
      }
      DirRequestKind kind = request_kind(
          mshr_.flag(Flag::kRqf), mshr_.flag(Flag::kNerf), gad_.req_state);
      plan_ = dir_request_plan(summary_state(read_.sharers), kind,
                               cfg_.protocol);
      has_plan_ = true;
      mshr_.next_state = plan_.requester_grant == RequesterGrant::kUpgrade
                             ? CoherenceState::M
                             : plan_.grant_state;
      if (plan_.invalidate_set != InvalidateSet::kNone) {
        for (int c = 0; c < read_.sharers.size(); ++c) {
          if (c == mshr_.req_lce || !read_.sharers.hits[c]) continue;
          CoherenceState s = read_.sharers.states[c];
          bool owner_too =
              plan_.invalidate_set == InvalidateSet::kOtherSharersAndOwner;
          if (s == CoherenceState::S || (owner_too && is_owner(s)))
            inv_targets_.push_back(c);
        }
      }
      r->invalidations = static_cast<int>(inv_targets_.size());
      st_ = St::kWriteNext;
      return Step::kBusy;
    }

    case St::kWriteNext:
      dir_.write_entry(mshr_.paddr, mshr_.req_lce, mshr_.req_way,
                       g.tag_of(mshr_.paddr), mshr_.next_state);
      after_write_next();
      return Step::kBusy;

    case St::kReplSend: {
      Message m = make(MsgType::kCmdStWb, mshr_.req_lce, mshr_.lru_addr);
      m.way = mshr_.lru_way;
      m.state = CoherenceState::I;
      if (!send(net, std::move(m), now)) return Step::kStall;
      ++stats_.replacements;
      st_ = St::kReplWait;
      return Step::kBusy;
    }

    case St::kReplWait: {
      const Message* r = net.peek(cfg_.endpoint, NetKind::kResponse);
      if (!is_writeback(r)) {
        if (r && r->type != MsgType::kRespCohAck)
          fail(ErrorCode::kProtocol, "expected writeback, got " + r->describe());
        sink_coh_ack(net);
        return Step::kStall;
      }
      if (r->type == MsgType::kRespDirtyWb) {
        Message w = make_mem(MsgType::kMemWr, r->addr);
        w.data = r->data;
        w.wp = true;
        w.lce = mshr_.req_lce;
        if (!net.can_send(w)) return Step::kStall;
        net.pop(cfg_.endpoint, NetKind::kResponse);
        net.send(std::move(w), now);
        pending_.adjust(wg, 1);
        hold_ = beats - 1;
        current()->replacement = ReplacementKind::kDirty;
      } else {
        net.pop(cfg_.endpoint, NetKind::kResponse);
        current()->replacement = ReplacementKind::kClean;
      }
      repl_done_ = true;
      next_phase();
      return Step::kBusy;
    }

    case St::kInvSend: {
      int c = inv_targets_[inv_sent_];
      int way = read_.sharers.ways[c];
      Message m = make(MsgType::kCmdInv, c, mshr_.paddr);
      m.way = way;
      if (!send(net, std::move(m), now)) return Step::kStall;
      dir_.write_state(mshr_.paddr, c, way, CoherenceState::I);
      ++stats_.invalidations;
      if (++inv_sent_ == inv_targets_.size()) st_ = St::kInvAck;
      return Step::kBusy;
    }

    case St::kInvAck: {
      const Message* r = net.peek(cfg_.endpoint, NetKind::kResponse);
      if (!r || r->type != MsgType::kRespInvAck) {
        if (r && r->type != MsgType::kRespCohAck)
          fail(ErrorCode::kProtocol, "expected InvAck, got " + r->describe());
        sink_coh_ack(net);
        return Step::kStall;
      }
      net.pop(cfg_.endpoint, NetKind::kResponse);
      if (++inv_acked_ == inv_targets_.size()) {
        inv_done_ = true;
        next_phase();
      }
      return Step::kBusy;
    }

    case St::kUpgradeSquash:
      spec_.squash(wg);
      st_ = St::kUpgradeSend;
      return Step::kBusy;

    case St::kUpgradeSend: {
      Message m = make(MsgType::kCmdStW, mshr_.req_lce, mshr_.paddr);
      m.way = mshr_.req_way;
      m.state = CoherenceState::M;
      if (!send(net, std::move(m), now)) return Step::kStall;
      ++stats_.upgrades;
      finish(now);
      return Step::kBusy;
    }

    case St::kTransferSend: {
      const OwnerCommand& oc = *plan_.owner_command;
      Message m = make(owner_msg(oc.command), mshr_.owner_lce, mshr_.paddr);
      m.way = mshr_.owner_way;
      m.state = oc.set_owner_state.value_or(mshr_.owner_state);
      m.state2 = oc.transfer_state.value_or(CoherenceState::I);
      m.target = mshr_.req_lce;
      m.target_way = mshr_.req_way;
      if (!send(net, std::move(m), now)) return Step::kStall;
      spec_.squash(wg);
      ++stats_.transfers;
      st_ = St::kOwnerWrite;
      return Step::kBusy;
    }

    case St::kOwnerWrite: {
      const OwnerCommand& oc = *plan_.owner_command;
      if (carries_wb(oc.command)) {
        const Message* r = net.peek(cfg_.endpoint, NetKind::kResponse);
        if (!is_writeback(r)) {
          if (r && r->type != MsgType::kRespCohAck)
            fail(ErrorCode::kProtocol,
                 "expected writeback, got " + r->describe());
          sink_coh_ack(net);
          return Step::kStall;
        }
        if (r->type == MsgType::kRespDirtyWb) {
          Message w = make_mem(MsgType::kMemWr, r->addr);
          w.data = r->data;
          w.wp = true;
          w.lce = mshr_.owner_lce;
          if (!net.can_send(w)) return Step::kStall;
          net.pop(cfg_.endpoint, NetKind::kResponse);
          net.send(std::move(w), now);
          pending_.adjust(wg, 1);
          hold_ = beats;
          current()->owner_dirty = true;
        } else {
          net.pop(cfg_.endpoint, NetKind::kResponse);
        }
      }
      if (oc.set_owner_state) {
        dir_.write_state(mshr_.paddr, mshr_.owner_lce, mshr_.owner_way,
                         *oc.set_owner_state);
      }
      finish(now);
      return Step::kBusy;
    }

    case St::kResolveSpec:
      if (mshr_.next_state == presumed_state(mshr_)) {
        spec_.unset(wg);
      } else {
        spec_.fwd_mod(wg, mshr_.next_state);
      }
      finish(now);
      return Step::kBusy;

    case St::kUcFlushSend: {
      const FlushTarget& t = flush_[flush_sent_];
      bool wb = t.state == CoherenceState::E || t.state == CoherenceState::M ||
                t.state == CoherenceState::O;
      Message m = make(wb ? MsgType::kCmdStWb : MsgType::kCmdInv, t.lce,
                       mshr_.paddr);
      m.way = t.way;
      m.state = CoherenceState::I;
      if (!send(net, std::move(m), now)) return Step::kStall;
      dir_.write_state(mshr_.paddr, t.lce, t.way, CoherenceState::I);
      if (++flush_sent_ == flush_.size()) st_ = St::kUcFlushWait;
      return Step::kBusy;
    }

    case St::kUcFlushWait: {
      const Message* r = net.peek(cfg_.endpoint, NetKind::kResponse);
      if (!r || r->type == MsgType::kRespCohAck) {
        sink_coh_ack(net);
        return Step::kStall;
      }
      if (r->type == MsgType::kRespDirtyWb) {
        Message w = make_mem(MsgType::kMemWr, r->addr);
        w.data = r->data;
        w.wp = true;
        w.lce = r->lce;
        if (!net.can_send(w)) return Step::kStall;
        net.pop(cfg_.endpoint, NetKind::kResponse);
        net.send(std::move(w), now);
        pending_.adjust(wg, 1);
        hold_ = beats - 1;
      } else if (r->type == MsgType::kRespInvAck ||
                 r->type == MsgType::kRespNullWb) {
        net.pop(cfg_.endpoint, NetKind::kResponse);
      } else {
        fail(ErrorCode::kProtocol, "unexpected flush response " + r->describe());
      }
      if (++flush_done_ == flush_.size()) st_ = St::kUcSend;
      return Step::kBusy;
    }

    case St::kUcSend: {
      bool store = mshr_.req_type == MsgType::kReqUcWr;
      Message m =
          make_mem(store ? MsgType::kMemUcWr : MsgType::kMemUcRd, mshr_.paddr);
      m.lce = mshr_.req_lce;
      m.size = mshr_.size;
      m.uc_data = mshr_.uc_data;
      m.wp = class_ == AddressClass::kUncachedToCacheable;
      int b = m.beats(cfg_.beat_bytes);
      if (!send(net, std::move(m), now)) return Step::kStall;
      if (class_ == AddressClass::kUncachedToCacheable) {
        pending_.adjust(wg, 1);
        st_ = St::kUcDone;
      } else {
        finish(now);
      }
      hold_ = b > 1 ? b - 1 : 0;
      return Step::kBusy;
    }

    case St::kUcDone:
      pending_.adjust(wg, -1);
      finish(now);
      return Step::kBusy;
  }
  return Step::kIdle;
}

}  // namespace bedrock
