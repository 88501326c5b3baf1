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

#include "bedrock/cce.hpp"

#include <algorithm>
#include <string>

#include "bedrock/error.hpp"
#include "bedrock/network.hpp"

namespace bedrock {

namespace {

constexpr const char* kFlagNames[kNumFlags] = {
    "rqf", "ucf", "nerf", "arf", "anrf", "rcf", "pf",
    "csf", "cef", "cmf",  "cof", "cff",  "rf",  "uf"};

SegmentConfig segment_config(const CceConfig& cfg) {
  SegmentConfig s;
  s.num_caches = cfg.num_cores;
  s.geometry = cfg.geometry;
  s.tag_sets_per_row = cfg.tag_sets_per_row;
  s.num_cces = cfg.num_cces;
  s.cce_id = cfg.cce_id;
  s.validate();
  return s;
}

}  // namespace

const char* flag_name(Flag f) { return kFlagNames[static_cast<int>(f)]; }

std::optional<Flag> parse_flag(const std::string& name) {
  for (int i = 0; i < kNumFlags; ++i) {
    if (name == kFlagNames[i]) return static_cast<Flag>(i);
  }
  return std::nullopt;
}

const char* to_string(EngineKind k) {
  return k == EngineKind::kFsm ? "fsm" : "ucode";
}

void Mshr::apply_gad(const GadResult& g) {
  set_flag(Flag::kCsf, g.cached_s);
  set_flag(Flag::kCef, g.cached_e);
  set_flag(Flag::kCmf, g.cached_m);
  set_flag(Flag::kCof, g.cached_o);
  set_flag(Flag::kCff, g.cached_f);
  set_flag(Flag::kRf, g.replacement);
  set_flag(Flag::kUf, g.upgrade);
  req_state = g.req_state;
  req_way = g.req_way_hit ? *g.req_way_hit : lru_way;
  if (g.owner) {
    owner_lce = g.owner->lce;
    owner_way = g.owner->way;
    owner_state = g.owner->state;
  }
}

// ---- CceDirectory ----

CceDirectory::CceDirectory(const CceConfig& cfg) : cores_(cfg.num_cores) {
  if (cfg.num_cores < 1)
    fail(ErrorCode::kInvalidArgument, "at least one core is required");
  SegmentConfig s = segment_config(cfg);
  segments_.emplace_back(s);
  segments_.emplace_back(s);
}

WayGroupRead CceDirectory::read_way_group(uint64_t addr, int req_lce,
                                          int lru_way) const {
  std::optional<int> dreq, ireq;
  if (req_lce < cores_) dreq = req_lce;
  else ireq = req_lce - cores_;
  WayGroupRead d = segments_[0].read_way_group(addr, dreq, lru_way);
  WayGroupRead i = segments_[1].read_way_group(addr, ireq, lru_way);
  WayGroupRead out;
  out.sharers = d.sharers;
  out.sharers.append(i.sharers);
  out.lru = dreq ? d.lru : i.lru;
  out.latency = std::max(d.latency, i.latency);
  return out;
}

EntryRead CceDirectory::read_entry(uint64_t addr, int lce, int way) const {
  if (lce < cores_) return segments_[0].read_entry(addr, lce, way);
  return segments_[1].read_entry(addr, lce - cores_, way);
}

int CceDirectory::write_entry(uint64_t addr, int lce, int way, uint64_t tag,
                              CoherenceState state) {
  if (lce < cores_) return segments_[0].write_entry(addr, lce, way, tag, state);
  return segments_[1].write_entry(addr, lce - cores_, way, tag, state);
}

int CceDirectory::write_state(uint64_t addr, int lce, int way,
                              CoherenceState state) {
  if (lce < cores_) return segments_[0].write_state(addr, lce, way, state);
  return segments_[1].write_state(addr, lce - cores_, way, state);
}

int CceDirectory::clear_row(uint64_t addr, int lce) {
  if (lce < cores_) return segments_[0].clear_row(addr, lce);
  return segments_[1].clear_row(addr, lce - cores_);
}

int CceDirectory::way_group_read_latency() const {
  return segments_[0].way_group_read_latency();
}

const TagSetEntry& CceDirectory::entry(int lce, int set, int way) const {
  if (lce < cores_) return segments_[0].entry(lce, set, way);
  return segments_[1].entry(lce - cores_, set, way);
}

// ---- CoherenceEngine ----

CoherenceEngine::CoherenceEngine(const CceConfig& cfg)
    : cfg_(cfg),
      dir_(cfg),
      pending_(segment_config(cfg).sets_per_cce()),
      spec_(segment_config(cfg).sets_per_cce()) {
  if (cfg_.beat_bytes < 1 || cfg_.geometry.block_bytes % cfg_.beat_bytes != 0)
    fail(ErrorCode::kInvalidArgument, "beat width must divide the block");
}

bool CoherenceEngine::idle() const { return true; }

int CoherenceEngine::way_group(uint64_t addr) const {
  WayGroupMap map{cfg_.num_cces};
  return map.local_index(cfg_.geometry.set_of(addr));
}

bool CoherenceEngine::send(Network& net, Message msg, uint64_t now) {
  if (!net.can_send(msg)) return false;
  net.send(std::move(msg), now);
  return true;
}

Mshr CoherenceEngine::load_request(const Message& req) const {
  Mshr m;
  m.paddr = req.addr;
  m.req_type = req.type;
  m.req_lce = req.lce;
  m.lru_way = req.lru_way;
  m.req_way = req.lru_way;
  m.size = req.size;
  m.uc_data = req.uc_data;
  m.atomic = req.atomic;
  bool uncached =
      req.type == MsgType::kReqUcRd || req.type == MsgType::kReqUcWr;
  m.set_flag(Flag::kRqf,
             req.type == MsgType::kReqWr || req.type == MsgType::kReqUcWr);
  m.set_flag(Flag::kUcf, uncached);
  m.set_flag(Flag::kNerf, req.type == MsgType::kReqRdNe);
  m.set_flag(Flag::kArf, req.atomic != AtomicOp::kNone);
  m.set_flag(Flag::kRcf, cfg_.regions.cacheable(req.addr));
  return m;
}

Message CoherenceEngine::make(MsgType type, int dst_lce, uint64_t addr) const {
  Message m;
  m.type = type;
  m.src = cfg_.endpoint;
  m.dst = dst_lce;
  m.lce = dst_lce;
  m.addr = addr;
  return m;
}

Message CoherenceEngine::make_mem(MsgType type, uint64_t addr) const {
  Message m;
  m.type = type;
  m.src = cfg_.endpoint;
  m.dst = cfg_.mem_endpoint;
  m.addr = addr;
  return m;
}

void CoherenceEngine::begin_record(const Mshr& m, uint64_t now) {
  TransactionRecord r;
  r.request = m.req_type;
  r.address_class = classify_request(
      m.paddr, m.req_type == MsgType::kReqUcRd || m.req_type == MsgType::kReqUcWr,
      cfg_.regions);
  r.addr = m.paddr;
  r.req_lce = m.req_lce;
  r.start_cycle = now;
  r.end_cycle = now;
  records_.push_back(r);
  open_ = true;
}

void CoherenceEngine::mark_admitted(uint64_t now) {
  if (open_ && !records_.back().admit_cycle) records_.back().admit_cycle = now;
}

void CoherenceEngine::end_record(uint64_t now) {
  if (!open_) return;
  records_.back().end_cycle = now;
  open_ = false;
  ++stats_.transactions;
}

void CoherenceEngine::mem_resp_step(Network& net, uint64_t now) {
  if (!auto_fwd_ || now < mem_resp_busy_until_) return;
  const Message* in = net.peek(cfg_.endpoint, NetKind::kMemResp);
  if (!in) return;
  int wg = way_group(in->addr);
  std::optional<Message> out;
  switch (in->type) {
    case MsgType::kMemData: {
      CoherenceState st = in->state;
      bool forward = true;
      if (in->spec) {
        if (!spec_.live(wg)) {
          fail(ErrorCode::kSpecStateMissing,
               "speculative memory data without a live record: " +
                   in->describe());
        }
        SpecRecord r = spec_.read(wg);
        if (r.spec) return;
        if (r.squash) forward = false;
        else if (r.fwd_mod) st = r.state;
      }
      if (forward) {
        Message m = make(MsgType::kCmdData, in->lce, in->addr);
        m.way = in->way;
        m.state = st;
        m.data = in->data;
        out = std::move(m);
      }
      break;
    }
    case MsgType::kMemUcData:
    case MsgType::kMemUcAck: {
      Message m = make(in->type == MsgType::kMemUcData ? MsgType::kCmdUcData
                                                       : MsgType::kCmdUcDone,
                       in->lce, in->addr);
      m.size = in->size;
      m.uc_data = in->uc_data;
      out = std::move(m);
      break;
    }
    case MsgType::kMemAck:
      break;
    default:
      fail(ErrorCode::kProtocol, "CCE received " + in->describe());
  }
  if (in->wp && port_pending_write_) return;
  if (out && !net.can_send(*out)) return;
  Message resp = net.pop(cfg_.endpoint, NetKind::kMemResp);
  if (resp.spec) spec_.consume(wg);
  if (resp.wp) {
    pending_.adjust(wg, -1);
    port_pending_write_ = true;
  }
  if (out) {
    if (uc_hook_ && (out->type == MsgType::kCmdUcData ||
                     out->type == MsgType::kCmdUcDone)) {
      uc_hook_(resp);
    }
    int beats = std::max(1, out->beats(cfg_.beat_bytes));
    net.send(std::move(*out), now);
    mem_resp_busy_until_ = now + beats;
    ++stats_.mem_forwards;
  } else if (resp.type == MsgType::kMemData) {
    ++stats_.mem_squashes;
  }
}

}  // namespace bedrock
