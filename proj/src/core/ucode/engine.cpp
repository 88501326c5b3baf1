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

#include "bedrock/ucode/engine.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "bedrock/error.hpp"
#include "bedrock/network.hpp"

namespace bedrock::ucode {

namespace {

bool is_req_wait(const Instr& in) {
  return in.op == Op::kWfq && (in.qmask & (1u << static_cast<int>(Queue::kReq)));
}

int predicted_next(const Instr& in, int pc) {
  if (!is_branch(in.op)) return pc + 1;
  return in.pt ? in.target : pc + 1;
}

CoherenceState to_state(uint64_t v) {
  return v < kNumStates ? static_cast<CoherenceState>(v) : CoherenceState::I;
}

MsgType lce_cmd_type(CmdCode c) {
  switch (c) {
    case CmdCode::kInv: return MsgType::kCmdInv;
    case CmdCode::kStW: return MsgType::kCmdStW;
    case CmdCode::kWb: return MsgType::kCmdWb;
    case CmdCode::kTr: return MsgType::kCmdTr;
    case CmdCode::kStWb: return MsgType::kCmdStWb;
    case CmdCode::kStTr: return MsgType::kCmdStTr;
    case CmdCode::kStTrWb: return MsgType::kCmdStTrWb;
    case CmdCode::kMemRd: return MsgType::kMemRd;
    case CmdCode::kMemWr: return MsgType::kMemWr;
    case CmdCode::kMemUcRd: return MsgType::kMemUcRd;
    case CmdCode::kMemUcWr: return MsgType::kMemUcWr;
    case CmdCode::kCount: break;
  }
  return MsgType::kCmdInv;
}

bool is_transfer(CmdCode c) {
  return c == CmdCode::kTr || c == CmdCode::kStTr || c == CmdCode::kStTrWb;
}

}  // namespace

UcodeCce::UcodeCce(const CceConfig& cfg, Program program)
    : CoherenceEngine(cfg), prog_(std::move(program)) {
  if (prog_.size() > kImemSize)
    fail(ErrorCode::kProgramTooLarge,
         "program has " + std::to_string(prog_.size()) + " instructions");
  if (prog_.size() == 0) fail(ErrorCode::kInvalidArgument, "empty program");
  reset();
}

void UcodeCce::reset() {
  arch_ = ArchState{};
  pc_ = 0;
  hold_ = 0;
  bubble_ = false;
  busy_window_ = false;
  have_sharers_ = false;
  inv_ = InvState{};
  set_auto_forward(true);
}

bool UcodeCce::idle() const {
  return !busy_window_ && hold_ == 0 && !bubble_ && !inv_.issued &&
         pc_ < prog_.size() && is_req_wait(prog_.instrs[pc_]);
}

void UcodeCce::trap(const std::string& why) const {
  std::string text = pc_ < prog_.size() ? disassemble(prog_.instrs[pc_])
                                        : std::string("<no instruction>");
  fail(ErrorCode::kIllegalInstruction,
       "CCE " + std::to_string(cfg_.cce_id) + " pc " + std::to_string(pc_) +
           " (" + text + "): " + why);
}

bool UcodeCce::flag(int f) const {
  return arch_.mshr.flag(static_cast<Flag>(f));
}

const Message* UcodeCce::resp_head(Network& net) const {
  const Message* r = net.peek(cfg_.endpoint, NetKind::kResponse);
  if (r && r->type == MsgType::kRespCohAck) return nullptr;
  return r;
}

bool UcodeCce::queue_ready(Network& net, Queue q) const {
  switch (q) {
    case Queue::kReq: return net.peek(cfg_.endpoint, NetKind::kRequest);
    case Queue::kResp: return resp_head(net);
    case Queue::kMemResp: return net.peek(cfg_.endpoint, NetKind::kMemResp);
    default: return false;
  }
}

void UcodeCce::sink_coh_ack(Network& net) {
  if (port_pending_write_) return;
  const Message* r = net.peek(cfg_.endpoint, NetKind::kResponse);
  if (!r || r->type != MsgType::kRespCohAck) return;
  Message m = net.pop(cfg_.endpoint, NetKind::kResponse);
  pending_.adjust(way_group(m.addr), -1);
  port_pending_write_ = true;
}

uint64_t UcodeCce::addr_of(const Instr& in) const {
  switch (in.addr) {
    case AddrSel::kReq: return arch_.mshr.paddr;
    case AddrSel::kLru: return arch_.mshr.lru_addr;
    case AddrSel::kGpr: return arch_.gpr[in.src];
    case AddrSel::kMsg: return arch_.msg_addr;
  }
  return 0;
}

int UcodeCce::lce_of(const Instr& in) const {
  int l = 0;
  switch (in.lce) {
    case LceSel::kReq: l = arch_.mshr.req_lce; break;
    case LceSel::kOwner: l = arch_.mshr.owner_lce; break;
    case LceSel::kGpr: l = static_cast<int>(arch_.gpr[in.src]); break;
    case LceSel::kMsg: l = arch_.msg_lce; break;
  }
  if (l < 0 || l >= cfg_.num_lces()) trap("LCE " + std::to_string(l) + " out of range");
  return l;
}

int UcodeCce::way_of(const Instr& in) const {
  int w = 0;
  switch (in.way) {
    case WaySel::kReq: w = arch_.mshr.req_way; break;
    case WaySel::kLru: w = arch_.mshr.lru_way; break;
    case WaySel::kOwner: w = arch_.mshr.owner_way; break;
    case WaySel::kGpr: w = static_cast<int>(arch_.gpr[in.src]); break;
  }
  if (w < 0 || w >= cfg_.geometry.assoc) trap("way " + std::to_string(w) + " out of range");
  return w;
}

CoherenceState UcodeCce::state_of(const Instr& in) const {
  switch (in.state) {
    case StateSel::kImm: return static_cast<CoherenceState>(in.state_imm);
    case StateSel::kNext: return arch_.mshr.next_state;
    case StateSel::kCoh: return arch_.coh;
    case StateSel::kOwner: return arch_.mshr.owner_state;
  }
  return CoherenceState::I;
}

uint64_t UcodeCce::read_sreg(SReg r) const {
  const Mshr& m = arch_.mshr;
  switch (r) {
    case SReg::kPaddr: return m.paddr;
    case SReg::kReqLce: return static_cast<uint64_t>(m.req_lce);
    case SReg::kReqWay: return static_cast<uint64_t>(m.req_way);
    case SReg::kLruWay: return static_cast<uint64_t>(m.lru_way);
    case SReg::kLruAddr: return m.lru_addr;
    case SReg::kOwnerLce: return static_cast<uint64_t>(m.owner_lce);
    case SReg::kOwnerWay: return static_cast<uint64_t>(m.owner_way);
    case SReg::kOwnerState: return static_cast<uint64_t>(m.owner_state);
    case SReg::kNextState: return static_cast<uint64_t>(m.next_state);
    case SReg::kReqState: return static_cast<uint64_t>(m.req_state);
    case SReg::kLruState: return static_cast<uint64_t>(m.lru_state);
    case SReg::kCoh: return static_cast<uint64_t>(arch_.coh);
    case SReg::kAutoFwd: return arch_.auto_fwd;
    case SReg::kFlags: return m.flags;
    case SReg::kReqType: return static_cast<uint64_t>(m.req_type);
    case SReg::kMsgType: return static_cast<uint64_t>(arch_.msg_type);
    case SReg::kMsgAddr: return arch_.msg_addr;
    case SReg::kMsgLce: return static_cast<uint64_t>(arch_.msg_lce);
    case SReg::kSharers: {
      uint64_t v = 0;
      if (!have_sharers_) return 0;
      for (int c = 0; c < sharers_.sharers.size() && c < 64; ++c) {
        if (sharers_.sharers.hits[c]) v |= 1ull << c;
      }
      return v;
    }
    case SReg::kCount: break;
  }
  return 0;
}

void UcodeCce::write_sreg(SReg r, uint64_t v) {
  Mshr& m = arch_.mshr;
  switch (r) {
    case SReg::kPaddr: m.paddr = v; break;
    case SReg::kReqLce: m.req_lce = static_cast<int>(v); break;
    case SReg::kReqWay: m.req_way = static_cast<int>(v); break;
    case SReg::kLruWay: m.lru_way = static_cast<int>(v); break;
    case SReg::kLruAddr: m.lru_addr = v; break;
    case SReg::kOwnerLce: m.owner_lce = static_cast<int>(v); break;
    case SReg::kOwnerWay: m.owner_way = static_cast<int>(v); break;
    case SReg::kOwnerState: m.owner_state = to_state(v); break;
    case SReg::kNextState: m.next_state = to_state(v); break;
    case SReg::kReqState: m.req_state = to_state(v); break;
    case SReg::kLruState: m.lru_state = to_state(v); break;
    case SReg::kCoh: arch_.coh = to_state(v); break;
    case SReg::kAutoFwd: arch_.auto_fwd = v != 0; break;
    case SReg::kFlags: m.flags = static_cast<uint16_t>(v & 0x3fff); break;
    case SReg::kReqType:
    case SReg::kMsgType:
    case SReg::kMsgAddr:
    case SReg::kMsgLce:
    case SReg::kSharers:
      trap(std::string("special register ") + to_string(r) + " is read-only");
    case SReg::kCount: break;
  }
}

void UcodeCce::tick(Network& net, uint64_t now) {
  port_pending_write_ = port_spec_read_ = port_dir_ = false;
  set_auto_forward(arch_.auto_fwd);
  mem_resp_step(net, now);
  sink_coh_ack(net);

  enum class Acct { kNone, kBusy, kStall } acct = Acct::kNone;
  if (hold_ > 0) {
    --hold_;
    acct = Acct::kBusy;
  } else if (bubble_) {
    bubble_ = false;
    acct = Acct::kBusy;
    if (busy_window_) ++txn_bubbles_;
  } else {
    if (pc_ < 0 || pc_ >= prog_.size()) trap("fetch outside the program");
    const Instr in = prog_.instrs[pc_];
    if (busy_window_ && is_req_wait(in)) {
      busy_window_ = false;
      end_record(now);
    }
    int next = pc_ + 1;
    Outcome o = execute(in, net, now, next);
    if (o == Outcome::kStall) {
      acct = Acct::kStall;
    } else {
      acct = Acct::kBusy;
      if (o == Outcome::kDone) {
        ++retired_;
        if (retire_hook_) retire_hook_(pc_, in);
        if (next != predicted_next(in, pc_)) {
          bubble_ = true;
          ++mispredicts_;
        }
        pc_ = next;
      }
    }
  }
  if (busy_window_) {
    if (TransactionRecord* r = current()) {
      if (acct == Acct::kBusy) {
        ++r->busy_cycles;
        ++stats_.busy_cycles;
        r->end_cycle = now;
      } else if (acct == Acct::kStall) {
        ++r->stall_cycles;
        ++stats_.stall_cycles;
      }
    }
  }
  pending_.commit();
}

UcodeCce::Outcome UcodeCce::execute(const Instr& in, Network& net,
                                    uint64_t now, int& next_pc) {
  uint64_t* g = arch_.gpr.data();
  Mshr& m = arch_.mshr;
  auto mask_bits = [&](bool want) {
    bool all = true, any = false;
    for (int f = 0; f < kNumFlags; ++f) {
      if (!(in.mask & (1u << f))) continue;
      bool match = flag(f) == want;
      all = all && match;
      any = any || match;
    }
    return std::pair<bool, bool>{all, any};
  };
  switch (in.op) {
    case Op::kAdd: g[in.rd] = g[in.rs1] + g[in.rs2]; break;
    case Op::kSub: g[in.rd] = g[in.rs1] - g[in.rs2]; break;
    case Op::kAnd: g[in.rd] = g[in.rs1] & g[in.rs2]; break;
    case Op::kOr: g[in.rd] = g[in.rs1] | g[in.rs2]; break;
    case Op::kXor: g[in.rd] = g[in.rs1] ^ g[in.rs2]; break;
    case Op::kLsh: g[in.rd] = g[in.rs1] << (g[in.rs2] & 63); break;
    case Op::kRsh: g[in.rd] = g[in.rs1] >> (g[in.rs2] & 63); break;
    case Op::kAddi: g[in.rd] = g[in.rs1] + in.imm; break;
    case Op::kSubi: g[in.rd] = g[in.rs1] - in.imm; break;
    case Op::kAndi: g[in.rd] = g[in.rs1] & in.imm; break;
    case Op::kOri: g[in.rd] = g[in.rs1] | in.imm; break;
    case Op::kLshi: g[in.rd] = g[in.rs1] << (in.imm & 63); break;
    case Op::kRshi: g[in.rd] = g[in.rs1] >> (in.imm & 63); break;
    case Op::kMovi: g[in.rd] = in.imm; break;
    case Op::kBeq: if (g[in.rs1] == g[in.rs2]) next_pc = in.target; break;
    case Op::kBne: if (g[in.rs1] != g[in.rs2]) next_pc = in.target; break;
    case Op::kBlt:
      if (static_cast<int64_t>(g[in.rs1]) < static_cast<int64_t>(g[in.rs2]))
        next_pc = in.target;
      break;
    case Op::kBge:
      if (static_cast<int64_t>(g[in.rs1]) >= static_cast<int64_t>(g[in.rs2]))
        next_pc = in.target;
      break;
    case Op::kBeqi: if (g[in.rs1] == in.imm) next_pc = in.target; break;
    case Op::kBnei: if (g[in.rs1] != in.imm) next_pc = in.target; break;
    case Op::kBi: next_pc = in.target; break;
    case Op::kSf: m.set_flag(static_cast<Flag>(in.f1), true); break;
    case Op::kSfz: m.set_flag(static_cast<Flag>(in.f1), false); break;
    case Op::kAndf: g[in.rd] = flag(in.f1) && flag(in.f2); break;
    case Op::kOrf: g[in.rd] = flag(in.f1) || flag(in.f2); break;
    case Op::kNandf: g[in.rd] = !(flag(in.f1) && flag(in.f2)); break;
    case Op::kNotf: g[in.rd] = !flag(in.f1); break;
    case Op::kBf: if (mask_bits(true).first) next_pc = in.target; break;
    case Op::kBfnot: if (mask_bits(false).first) next_pc = in.target; break;
    case Op::kBfz: if (mask_bits(true).second) next_pc = in.target; break;
    case Op::kBfnz: if (mask_bits(false).second) next_pc = in.target; break;
    case Op::kMovsg: g[in.rd] = read_sreg(in.sreg); break;
    case Op::kMovgs: write_sreg(in.sreg, g[in.rs1]); break;
    case Op::kMovis: write_sreg(in.sreg, in.imm); break;
    case Op::kRdp:
    case Op::kRdw:
    case Op::kRde:
    case Op::kWdp:
    case Op::kClp:
    case Op::kClr:
    case Op::kWde:
    case Op::kWds:
    case Op::kGad:
      return exec_dir(in, net, now);
    case Op::kWfq:
    case Op::kPushq:
    case Op::kPopq:
    case Op::kPoph:
    case Op::kSpecq:
      return exec_queue(in, net, now);
    case Op::kInv:
      return exec_inv(net, now);
    case Op::kCount:
      trap("illegal opcode");
  }
  return Outcome::kDone;
}

UcodeCce::Outcome UcodeCce::exec_dir(const Instr& in, Network& net,
                                     uint64_t now) {
  (void)net;
  (void)now;
  Mshr& m = arch_.mshr;
  const Geometry& geo = cfg_.geometry;
  const uint64_t addr = addr_of(in);
  const int wg = way_group(addr);
  switch (in.op) {
    case Op::kRdp:
      m.set_flag(Flag::kPf, pending_.read(wg));
      return Outcome::kDone;
    case Op::kWdp:
    case Op::kClp:
      if (port_pending_write_) return Outcome::kStall;
      port_pending_write_ = true;
      if (in.op == Op::kClp) pending_.clear(wg);
      else pending_.adjust(wg, in.p ? 1 : -1);
      if (in.op == Op::kWdp && in.p) mark_admitted(now);
      return Outcome::kDone;
    case Op::kRdw: {
      if (port_dir_) return Outcome::kStall;
      port_dir_ = true;
      sharers_ = dir_.read_way_group(addr, lce_of(in), way_of(in));
      have_sharers_ = true;
      hold_ = sharers_.latency - 1;
      return Outcome::kDone;
    }
    case Op::kRde: {
      if (port_dir_) return Outcome::kStall;
      port_dir_ = true;
      int lce = lce_of(in);
      EntryRead e = dir_.read_entry(addr, lce, way_of(in));
      arch_.gpr[in.rd] = geo.addr_of(e.entry.tag, geo.set_of(addr));
      if (have_sharers_ && lce < sharers_.sharers.size())
        sharers_.sharers.states[lce] = e.entry.state;
      hold_ = e.latency - 1;
      return Outcome::kDone;
    }
    case Op::kClr:
      if (port_dir_) return Outcome::kStall;
      port_dir_ = true;
      dir_.clear_row(addr, lce_of(in));
      return Outcome::kDone;
    case Op::kWde:
    case Op::kWds:
      if (port_dir_) return Outcome::kStall;
      port_dir_ = true;
      if (in.op == Op::kWde)
        dir_.write_entry(addr, lce_of(in), way_of(in), geo.tag_of(addr),
                         state_of(in));
      else
        dir_.write_state(addr, lce_of(in), way_of(in), state_of(in));
      return Outcome::kDone;
    case Op::kGad: {
      if (!have_sharers_) trap("gad without a way-group read");
      GadResult gr = gad(sharers_.sharers, sharers_.lru,
                         RequestSummary{m.req_lce, m.flag(Flag::kRqf)});
      m.apply_gad(gr);
      if (!gr.owner) {
        m.owner_lce = 0;
        m.owner_way = 0;
        m.owner_state = CoherenceState::I;
      }
      m.lru_addr = geo.addr_of(sharers_.lru.lru_tag, geo.set_of(m.paddr));
      m.lru_state = sharers_.lru.lru_state;
      if (TransactionRecord* r = current()) {
        r->lce_state = gr.req_state;
        r->dir_state = gr.owner      ? gr.owner->state
                       : gr.cached_s ? CoherenceState::S
                                     : CoherenceState::I;
        r->sharers =
            gr.other_sharers + (gr.req_state == CoherenceState::S ? 1 : 0);
      }
      return Outcome::kDone;
    }
    default:
      break;
  }
  trap("not a directory instruction");
}

UcodeCce::Outcome UcodeCce::exec_queue(const Instr& in, Network& net,
                                       uint64_t now) {
  Mshr& m = arch_.mshr;
  const int beats_per_block = cfg_.beats_per_block();
  switch (in.op) {
    case Op::kWfq:
      for (int q = 0; q < 5; ++q) {
        if ((in.qmask & (1u << q)) && queue_ready(net, static_cast<Queue>(q)))
          return Outcome::kDone;
      }
      return Outcome::kStall;

    case Op::kPoph: {
      const Message* h = nullptr;
      if (in.queue == Queue::kReq) h = net.peek(cfg_.endpoint, NetKind::kRequest);
      else if (in.queue == Queue::kResp) h = resp_head(net);
      else h = net.peek(cfg_.endpoint, NetKind::kMemResp);
      if (!h) return Outcome::kStall;
      arch_.msg_type = h->type;
      arch_.msg_addr = h->addr;
      arch_.msg_lce = h->lce;
      arch_.gpr[in.rd] = static_cast<uint64_t>(h->type);
      return Outcome::kDone;
    }

    case Op::kPopq: {
      if (in.queue == Queue::kReq) {
        if (!net.peek(cfg_.endpoint, NetKind::kRequest)) return Outcome::kStall;
        Message req = net.pop(cfg_.endpoint, NetKind::kRequest);
        m = load_request(req);
        arch_.msg_type = req.type;
        arch_.msg_addr = req.addr;
        arch_.msg_lce = req.lce;
        have_sharers_ = false;
        begin_record(m, now);
        busy_window_ = true;
        txn_bubbles_ = 0;
        return Outcome::kDone;
      }
      if (in.queue == Queue::kMemResp) {
        const Message* h = net.peek(cfg_.endpoint, NetKind::kMemResp);
        if (!h) return Outcome::kStall;
        if (h->wp && port_pending_write_) return Outcome::kStall;
        Message r = net.pop(cfg_.endpoint, NetKind::kMemResp);
        int wg = way_group(r.addr);
        if (r.spec && spec_.live(wg)) spec_.consume(wg);
        if (r.wp) {
          pending_.adjust(wg, -1);
          port_pending_write_ = true;
        }
        arch_.msg_type = r.type;
        arch_.msg_addr = r.addr;
        arch_.msg_lce = r.lce;
        return Outcome::kDone;
      }
      const Message* h = resp_head(net);
      if (!h) return Outcome::kStall;
      bool wb = h->type == MsgType::kRespDirtyWb ||
                h->type == MsgType::kRespNullWb;
      bool repl = wb && cfg_.geometry.block_addr(h->addr) !=
                            cfg_.geometry.block_addr(m.paddr);
      if (h->type == MsgType::kRespDirtyWb) {
        Message w = make_mem(MsgType::kMemWr, h->addr);
        w.data = h->data;
        w.wp = true;
        w.lce = h->lce;
        if (port_pending_write_ || !net.can_send(w)) return Outcome::kStall;
        Message r = net.pop(cfg_.endpoint, NetKind::kResponse);
        wb_data_ = r.data;
        net.send(std::move(w), now);
        pending_.adjust(way_group(r.addr), 1);
        port_pending_write_ = true;
        hold_ = beats_per_block - 1;
        if (TransactionRecord* t = current()) {
          if (repl) t->replacement = ReplacementKind::kDirty;
          else t->owner_dirty = true;
        }
      } else {
        if (in.p && port_pending_write_) return Outcome::kStall;
        Message r = net.pop(cfg_.endpoint, NetKind::kResponse);
        if (in.p) {
          pending_.adjust(way_group(r.addr), -1);
          port_pending_write_ = true;
        }
        if (repl) {
          if (TransactionRecord* t = current())
            t->replacement = ReplacementKind::kClean;
        }
      }
      arch_.msg_type = h->type;
      arch_.msg_addr = h->addr;
      arch_.msg_lce = h->lce;
      return Outcome::kDone;
    }

    case Op::kPushq: {
      const uint64_t addr = addr_of(in);
      const int wg = way_group(addr);
      Message msg;
      if (in.queue == Queue::kMemCmd) {
        msg = make_mem(lce_cmd_type(in.cmd), addr);
        msg.lce = lce_of(in);
        msg.wp = in.p;
        switch (in.cmd) {
          case CmdCode::kMemRd:
            msg.way = way_of(in);
            msg.state = state_of(in);
            msg.spec = in.spec;
            break;
          case CmdCode::kMemWr:
            msg.data = wb_data_;
            break;
          case CmdCode::kMemUcRd:
          case CmdCode::kMemUcWr:
            msg.size = m.size;
            msg.uc_data = m.uc_data;
            break;
          default:
            trap("not a memory command");
        }
      } else {
        msg = make(lce_cmd_type(in.cmd), lce_of(in), addr);
        msg.way = way_of(in);
        msg.state = state_of(in);
        if (is_transfer(in.cmd)) {
          msg.state2 = m.next_state;
          msg.target = m.req_lce;
          msg.target_way = m.req_way;
        }
      }
      if (in.p && port_pending_write_) return Outcome::kStall;
      if (!net.can_send(msg)) return Outcome::kStall;
      int beats = std::max(1, msg.beats(cfg_.beat_bytes));
      CmdCode cmd = in.cmd;
      uint64_t block = cfg_.geometry.block_addr(addr);
      net.send(std::move(msg), now);
      if (in.p) {
        pending_.adjust(wg, 1);
        port_pending_write_ = true;
      }
      if (in.spec) spec_.set(wg);
      if (is_transfer(cmd)) ++stats_.transfers;
      if (cmd == CmdCode::kStW) ++stats_.upgrades;
      if (cmd == CmdCode::kInv) ++stats_.invalidations;
      if (cmd == CmdCode::kStWb &&
          block != cfg_.geometry.block_addr(m.paddr))
        ++stats_.replacements;
      hold_ = beats - 1;
      return Outcome::kDone;
    }

    case Op::kSpecq: {
      int wg = way_group(addr_of(in));
      switch (in.spec_cmd) {
        case SpecCmd::kSet: spec_.set(wg); break;
        case SpecCmd::kUnset: spec_.unset(wg); break;
        case SpecCmd::kSquash: spec_.squash(wg); break;
        case SpecCmd::kFwdMod: spec_.fwd_mod(wg, state_of(in)); break;
      }
      return Outcome::kDone;
    }

    default:
      break;
  }
  trap("not a queue instruction");
}

UcodeCce::Outcome UcodeCce::exec_inv(Network& net, uint64_t now) {
  Mshr& m = arch_.mshr;
  if (!inv_.issued) {
    if (!have_sharers_) trap("inv without a way-group read");
    inv_ = InvState{};
    const SharersVectors& sv = sharers_.sharers;
    for (int c = 0; c < sv.size(); ++c) {
      if (c == m.req_lce || !sv.hits[c] || sv.states[c] != CoherenceState::S)
        continue;
      inv_.targets.emplace_back(c, sv.ways[c]);
    }
    if (TransactionRecord* r = current())
      r->invalidations += static_cast<int>(inv_.targets.size());
    if (inv_.targets.empty()) return Outcome::kDone;
    inv_.issued = true;
    return Outcome::kContinue;
  }
  if (inv_.sent < inv_.targets.size()) {
    auto [lce, way] = inv_.targets[inv_.sent];
    Message msg = make(MsgType::kCmdInv, lce, m.paddr);
    msg.way = way;
    if (!net.can_send(msg)) return Outcome::kStall;
    net.send(std::move(msg), now);
    // The message unit owns this directory write.
    port_dir_ = true;
    dir_.write_state(m.paddr, lce, way, CoherenceState::I);
    sharers_.sharers.states[lce] = CoherenceState::I;
    ++stats_.invalidations;
    ++inv_.sent;
    return Outcome::kContinue;
  }
  const Message* h = resp_head(net);
  if (!h) return Outcome::kStall;
  if (h->type != MsgType::kRespInvAck)
    trap("expected an invalidation ack, got " + h->describe());
  net.pop(cfg_.endpoint, NetKind::kResponse);
  if (++inv_.acked < inv_.targets.size()) return Outcome::kContinue;
  inv_ = InvState{};
  return Outcome::kDone;
}

Program load_program(const std::string& path, Protocol protocol) {
  if (path.empty())
    return builtin_program(protocol == Protocol::kMesi ? "mesi" : "moesif");
  if (path == "moesif" || path == "mesi") return builtin_program(path);
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kIo, "cannot open microcode file " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  if (looks_binary(bytes)) return read_binary(bytes);
  return assemble_or_throw(std::string(bytes.begin(), bytes.end()));
}

std::unique_ptr<CoherenceEngine> make_ucode_engine(const CceConfig& cfg,
                                                   const std::string& path) {
  return std::make_unique<UcodeCce>(cfg, load_program(path, cfg.protocol));
}

}  // namespace bedrock::ucode
