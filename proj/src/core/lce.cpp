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

#include "bedrock/lce.hpp"

#include <string>

#include "bedrock/error.hpp"
#include "bedrock/network.hpp"

namespace bedrock {

namespace {

uint64_t mask_for(int size) {
  return size >= 8 ? ~0ull : ((1ull << (8 * size)) - 1);
}

bool valid_size(int size) {
  return size == 1 || size == 2 || size == 4 || size == 8;
}

}  // namespace

const char* to_string(CpuOp op) {
  switch (op) {
    case CpuOp::kLoad: return "LD";
    case CpuOp::kStore: return "ST";
    case CpuOp::kUncachedLoad: return "LDU";
    case CpuOp::kUncachedStore: return "STU";
    case CpuOp::kAmoAdd: return "AMOADD";
    case CpuOp::kAmoSwap: return "AMOSWAP";
    case CpuOp::kLr: return "LR";
    case CpuOp::kSc: return "SC";
  }
  return "?";
}

bool is_store_class(CpuOp op) {
  return op == CpuOp::kStore || op == CpuOp::kAmoAdd ||
         op == CpuOp::kAmoSwap || op == CpuOp::kLr || op == CpuOp::kSc;
}

Lce::Lce(const LceConfig& cfg, int endpoint, CceRoute route, RegionMap regions)
    : cfg_(cfg),
      endpoint_(endpoint),
      route_(std::move(route)),
      regions_(std::move(regions)) {
  cfg_.geometry.validate();
  lines_.resize(static_cast<size_t>(cfg_.geometry.sets) * cfg_.geometry.assoc);
  for (auto& l : lines_) l.data.assign(cfg_.geometry.block_bytes, 0);
}

CacheLine& Lce::line_mut(int set, int way) {
  return lines_.at(static_cast<size_t>(set) * cfg_.geometry.assoc + way);
}

const CacheLine& Lce::line(int set, int way) const {
  return lines_.at(static_cast<size_t>(set) * cfg_.geometry.assoc + way);
}

void Lce::touch(int set, int way) { line_mut(set, way).last_use = ++clock_; }

int Lce::lru_way(int set) const {
  int best = 0;
  uint64_t best_use = ~0ull;
  for (int w = 0; w < cfg_.geometry.assoc; ++w) {
    const CacheLine& l = line(set, w);
    if (l.state == CoherenceState::I) return w;
    if (l.last_use < best_use) {
      best_use = l.last_use;
      best = w;
    }
  }
  return best;
}

std::optional<int> Lce::find(uint64_t addr) const {
  const Geometry& g = cfg_.geometry;
  int set = g.set_of(addr);
  uint64_t tag = g.tag_of(addr);
  for (int w = 0; w < g.assoc; ++w) {
    const CacheLine& l = line(set, w);
    if (l.state != CoherenceState::I && l.tag == tag) return w;
  }
  return std::nullopt;
}

CoherenceState Lce::state_of(uint64_t addr) const {
  auto w = find(addr);
  if (!w) return CoherenceState::I;
  return line(cfg_.geometry.set_of(addr), *w).state;
}

void Lce::set_line(int set, int way, uint64_t tag, CoherenceState state,
                   const std::vector<uint8_t>& data) {
  CacheLine& l = line_mut(set, way);
  l.tag = tag;
  l.state = state;
  if (!data.empty()) l.data = data;
  touch(set, way);
  if (observer_)
    observer_->on_state_change(cfg_.lce_id, cfg_.geometry.addr_of(tag, set));
}

uint64_t Lce::read_line(const CacheLine& l, uint64_t addr, int size) const {
  size_t off = addr & (cfg_.geometry.block_bytes - 1);
  uint64_t v = 0;
  for (int i = 0; i < size; ++i)
    v |= static_cast<uint64_t>(l.data[off + i]) << (8 * i);
  return v;
}

void Lce::write_line(CacheLine& l, uint64_t addr, int size, uint64_t value) {
  size_t off = addr & (cfg_.geometry.block_bytes - 1);
  for (int i = 0; i < size; ++i)
    l.data[off + i] = static_cast<uint8_t>(value >> (8 * i));
}

uint64_t Lce::perform(CacheLine& l, const CpuRequest& req) {
  uint64_t mask = mask_for(req.size);
  uint64_t old = read_line(l, req.addr, req.size);
  auto commit = [&](uint64_t v) {
    write_line(l, req.addr, req.size, v & mask);
    if (l.state == CoherenceState::E) l.state = CoherenceState::M;
    if (observer_)
      observer_->on_store_commit(cfg_.lce_id, req.addr, req.size, v & mask);
  };
  auto observe_load = [&] {
    if (observer_) observer_->on_load_value(cfg_.lce_id, req.addr, req.size, old);
  };
  switch (req.op) {
    case CpuOp::kLoad:
      observe_load();
      return old;
    case CpuOp::kStore:
      commit(req.data);
      return 0;
    case CpuOp::kAmoAdd:
      observe_load();
      commit(old + req.data);
      return old;
    case CpuOp::kAmoSwap:
      observe_load();
      commit(req.data);
      return old;
    case CpuOp::kLr:
      observe_load();
      reservation_ = cfg_.geometry.block_addr(req.addr);
      return old;
    case CpuOp::kSc:
      reservation_.reset();
      commit(req.data);
      return 0;
    default:
      fail(ErrorCode::kInternal, "uncached op reached the cache array");
  }
}

AccessResult Lce::access(const CpuRequest& req_in, uint64_t now) {
  if (miss_) {
    fail(ErrorCode::kBusy,
         "LCE " + std::to_string(cfg_.lce_id) + " has an outstanding miss");
  }
  CpuRequest req = req_in;
  if (!valid_size(req.size) || req.addr % req.size != 0) {
    fail(ErrorCode::kInvalidArgument, "misaligned or bad-size access");
  }
  if (cfg_.kind == LceKind::kInstruction && req.op != CpuOp::kLoad) {
    fail(ErrorCode::kInvalidArgument,
         "instruction cache accepts loads only");
  }
  bool cacheable = regions_.cacheable(req.addr);
  if (!cacheable) {
    if (req.op == CpuOp::kLoad) req.op = CpuOp::kUncachedLoad;
    else if (req.op == CpuOp::kStore) req.op = CpuOp::kUncachedStore;
    else if (req.op != CpuOp::kUncachedLoad && req.op != CpuOp::kUncachedStore)
      fail(ErrorCode::kInvalidArgument, "atomic to uncacheable memory");
  }
  if (req.op == CpuOp::kUncachedLoad || req.op == CpuOp::kUncachedStore) {
    ++misses_;
    issue_miss(req, true, now);
    return AccessResult{AccessStatus::kMissIssued, 0};
  }
  const Geometry& g = cfg_.geometry;
  int set = g.set_of(req.addr);
  auto way = find(req.addr);
  if (req.op == CpuOp::kSc) {
    bool ok = reservation_ && *reservation_ == g.block_addr(req.addr) && way &&
              is_writable(line(set, *way).state);
    if (!ok) {
      reservation_.reset();
      ++hits_;
      complete(req.id, 1, now);
      return AccessResult{AccessStatus::kHit, 1};
    }
  }
  if (way) {
    CacheLine& l = line_mut(set, *way);
    bool need_write = is_store_class(req.op);
    if (!need_write || is_writable(l.state)) {
      touch(set, *way);
      ++hits_;
      uint64_t v = perform(l, req);
      complete(req.id, v, now);
      return AccessResult{AccessStatus::kHit, v};
    }
  }
  ++misses_;
  issue_miss(req, false, now);
  return AccessResult{AccessStatus::kMissIssued, 0};
}

void Lce::issue_miss(const CpuRequest& req, bool uncached, uint64_t now) {
  (void)now;
  const Geometry& g = cfg_.geometry;
  Message m;
  m.src = endpoint_;
  m.dst = route_(req.addr);
  m.lce = cfg_.lce_id;
  if (uncached) {
    m.type = req.op == CpuOp::kUncachedLoad ? MsgType::kReqUcRd
                                             : MsgType::kReqUcWr;
    m.addr = req.addr;
    m.size = static_cast<uint8_t>(req.size);
    m.uc_data = req.data & mask_for(req.size);
  } else {
    m.addr = g.block_addr(req.addr);
    auto hit = find(req.addr);
    m.lru_way = hit ? *hit : lru_way(g.set_of(req.addr));
    if (!is_store_class(req.op)) {
      m.type = cfg_.kind == LceKind::kInstruction ? MsgType::kReqRdNe
                                                  : MsgType::kReqRd;
    } else {
      m.type = MsgType::kReqWr;
      switch (req.op) {
        case CpuOp::kAmoAdd: m.atomic = AtomicOp::kAdd; break;
        case CpuOp::kAmoSwap: m.atomic = AtomicOp::kSwap; break;
        case CpuOp::kLr: m.atomic = AtomicOp::kLr; break;
        default: break;
      }
    }
  }
  miss_ = OutstandingMiss{req, m.lru_way, uncached};
  emit(std::move(m));
}

void Lce::emit(Message msg) { outbox_.push_back(std::move(msg)); }

void Lce::complete(uint64_t id, uint64_t value, uint64_t now) {
  completions_.push_back(CpuCompletion{id, value, now});
}

std::vector<CpuCompletion> Lce::take_completions() {
  std::vector<CpuCompletion> out;
  out.swap(completions_);
  return out;
}

void Lce::drop_reservation_if(uint64_t block) {
  if (reservation_ && *reservation_ == block) reservation_.reset();
}

void Lce::tick(Network& net, uint64_t now) {
  while (!outbox_.empty()) {
    if (net.send(outbox_.front(), now) == SendResult::kBackpressure) return;
    outbox_.pop_front();
  }
  auto ready = net.ready(endpoint_);
  if (!ready) return;
  Message msg = net.pop(endpoint_, *ready);
  handle(msg, now);
  while (!outbox_.empty()) {
    if (net.send(outbox_.front(), now) == SendResult::kBackpressure) return;
    outbox_.pop_front();
  }
}

void Lce::handle_fill(const Message& msg, uint64_t now) {
  const Geometry& g = cfg_.geometry;
  if (!miss_ || miss_->uncached ||
      g.block_addr(miss_->req.addr) != msg.addr) {
    fail(ErrorCode::kUnexpectedFill,
         "LCE " + std::to_string(cfg_.lce_id) + " got unexpected " +
             msg.describe());
  }
  CoherenceState cur = state_of(msg.addr);
  LceAction act = lce_event_action_exec(
      cur, LceEvent{LceEventKind::kData, msg.state});
  int set = g.set_of(msg.addr);
  CacheLine& l = line_mut(set, msg.way);
  if (l.state != CoherenceState::I) {
    if (l.state != CoherenceState::S && l.state != CoherenceState::F) {
      fail(ErrorCode::kProtocol,
           "fill would overwrite an un-written-back " +
               std::string(to_string(l.state)) + " line at LCE " +
               std::to_string(cfg_.lce_id));
    }
    drop_reservation_if(g.addr_of(l.tag, set));
  }
  l.tag = g.tag_of(msg.addr);
  l.state = act.next_state;
  l.data = msg.data;
  touch(set, msg.way);
  if (observer_) observer_->on_state_change(cfg_.lce_id, msg.addr);
  const CpuRequest req = miss_->req;
  miss_.reset();
  if (is_store_class(req.op) && !is_writable(l.state)) {
    fail(ErrorCode::kProtocol, "write miss filled without write permission");
  }
  uint64_t v = perform(l, req);
  Message ack;
  ack.type = MsgType::kRespCohAck;
  ack.src = endpoint_;
  ack.dst = route_(msg.addr);
  ack.addr = msg.addr;
  ack.lce = cfg_.lce_id;
  ack.way = msg.way;
  ack.state = l.state;
  emit(std::move(ack));
  complete(req.id, v, now);
}

void Lce::handle(const Message& msg, uint64_t now) {
  const Geometry& g = cfg_.geometry;
  switch (msg.type) {
    case MsgType::kCmdData:
    case MsgType::kFillData:
      handle_fill(msg, now);
      return;
    case MsgType::kCmdUcData:
    case MsgType::kCmdUcDone: {
      if (!miss_ || !miss_->uncached) {
        fail(ErrorCode::kUnexpectedFill,
             "unexpected uncached response " + msg.describe());
      }
      uint64_t id = miss_->req.id;
      miss_.reset();
      complete(id, msg.type == MsgType::kCmdUcData ? msg.uc_data : 0, now);
      return;
    }
    default:
      break;
  }

  LceEventKind kind;
  switch (msg.type) {
    case MsgType::kCmdInv: kind = LceEventKind::kInv; break;
    case MsgType::kCmdStW: kind = LceEventKind::kStW; break;
    case MsgType::kCmdWb: kind = LceEventKind::kWb; break;
    case MsgType::kCmdTr: kind = LceEventKind::kTr; break;
    case MsgType::kCmdStWb: kind = LceEventKind::kStWb; break;
    case MsgType::kCmdStTr: kind = LceEventKind::kStTr; break;
    case MsgType::kCmdStTrWb: kind = LceEventKind::kStTrWb; break;
    default:
      fail(ErrorCode::kProtocol, "LCE received " + msg.describe());
  }
  int set = g.set_of(msg.addr);
  auto way = find(msg.addr);
  CoherenceState cur = CoherenceState::I;
  if (way) cur = line(set, *way).state;
  std::optional<CoherenceState> attached;
  if (event_carries_state(kind))
    attached = kind == LceEventKind::kTr ? msg.state2 : msg.state;
  LceAction act = lce_event_action_exec(cur, LceEvent{kind, attached});
  CacheLine& l = line_mut(set, *way);

  for (int i = 0; i < act.num_sends; ++i) {
    Message out;
    out.src = endpoint_;
    out.addr = msg.addr;
    switch (act.sends[i]) {
      case LceEmission::kDataToTarget:
        out.type = MsgType::kFillData;
        out.dst = msg.target;
        out.lce = msg.target;
        out.way = msg.target_way;
        out.state = msg.state2;
        out.data = l.data;
        break;
      case LceEmission::kInvAck:
      case LceEmission::kCohAck:
      case LceEmission::kNullWb:
      case LceEmission::kDirtyWb:
        out.type = act.sends[i] == LceEmission::kInvAck ? MsgType::kRespInvAck
                   : act.sends[i] == LceEmission::kCohAck
                       ? MsgType::kRespCohAck
                   : act.sends[i] == LceEmission::kNullWb
                       ? MsgType::kRespNullWb
                       : MsgType::kRespDirtyWb;
        out.dst = route_(msg.addr);
        out.lce = cfg_.lce_id;
        out.way = *way;
        out.state = act.next_state;
        if (act.sends[i] == LceEmission::kDirtyWb) out.data = l.data;
        break;
      default:
        fail(ErrorCode::kProtocol, "request emission on a command");
    }
    emit(std::move(out));
  }
  if (!is_writable(act.next_state)) drop_reservation_if(msg.addr);
  l.state = act.next_state;
  if (observer_) observer_->on_state_change(cfg_.lce_id, msg.addr);
  if (kind == LceEventKind::kStW) {
    if (!miss_ || miss_->uncached ||
        g.block_addr(miss_->req.addr) != msg.addr) {
      fail(ErrorCode::kUnexpectedFill, "upgrade without a matching miss");
    }
    const CpuRequest req = miss_->req;
    miss_.reset();
    touch(set, *way);
    uint64_t v = perform(l, req);
    complete(req.id, v, now);
  }
}

}  // namespace bedrock
