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

#include "bedrock/system.hpp"

#include <sstream>

#include "bedrock/error.hpp"
#include "bedrock/ucode/engine.hpp"

namespace bedrock {

namespace {

std::string hex(uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

void SystemConfig::validate() const {
  if (cores < 1 || cores > 32)
    fail(ErrorCode::kInvalidArgument, "cores must be in [1, 32]");
  geometry.validate();
  if (beat_bytes < 1 || geometry.block_bytes % beat_bytes != 0)
    fail(ErrorCode::kInvalidArgument, "beat_bytes must divide block_bytes");
  if (mem_latency < 1 || net_latency < 1)
    fail(ErrorCode::kInvalidArgument, "latencies must be at least 1");
  if (num_cces < 1 || geometry.sets % num_cces != 0)
    fail(ErrorCode::kInvalidArgument, "num_cces must divide the set count");
  if (mem_credits < 1)
    fail(ErrorCode::kInvalidArgument, "mem_credits must be positive");
  if (tag_sets_per_row < 1)
    fail(ErrorCode::kInvalidArgument, "tag_sets_per_row must be positive");
}

// ---- CoherenceMonitor ----

uint64_t CoherenceMonitor::shadow(uint64_t addr, int size) const {
  uint64_t v = 0;
  for (int i = 0; i < size; ++i) {
    auto it = bytes_.find(addr + i);
    if (it != bytes_.end()) v |= static_cast<uint64_t>(it->second) << (8 * i);
  }
  return v;
}

void CoherenceMonitor::set_shadow(uint64_t addr, int size, uint64_t value) {
  for (int i = 0; i < size; ++i) {
    uint8_t b = static_cast<uint8_t>(value >> (8 * i));
    if (b) bytes_[addr + i] = b;
    else bytes_.erase(addr + i);
  }
}

void CoherenceMonitor::report(std::string invariant, uint64_t addr,
                              std::string what) {
  violations_.push_back(Violation{sys_->now(), std::move(invariant),
                                  sys_->config().geometry.set_of(addr),
                                  std::move(what)});
}

void CoherenceMonitor::on_state_change(int lce, uint64_t block) {
  (void)lce;
  touched_.insert(block);
}

void CoherenceMonitor::end_cycle() {
  for (uint64_t block : touched_) {
    int valid = 0, exclusive = 0, owners = 0;
    std::string holders;
    for (int id = 0; id < sys_->num_lces(); ++id) {
      CoherenceState s = sys_->lce(id).state_of(block);
      if (s == CoherenceState::I) continue;
      ++valid;
      if (s == CoherenceState::E || s == CoherenceState::M) ++exclusive;
      if (is_owner(s)) ++owners;
      holders += " " + std::to_string(id) + ":" + to_string(s);
    }
    if (exclusive > 0 && valid > 1)
      report("SWMR", block, "block " + hex(block) + " held by" + holders);
    if (owners > 1)
      report("SingleOwner", block, "block " + hex(block) + " owned by" + holders);
  }
  touched_.clear();
}

void CoherenceMonitor::seed_from(const Memory& mem) {
  bytes_.clear();
  for (const auto& [base, data] : mem.snapshot()) {
    for (size_t i = 0; i < data.size(); ++i) {
      if (data[i]) bytes_[base + i] = data[i];
    }
  }
}

void CoherenceMonitor::on_store_commit(int lce, uint64_t addr, int size,
                                       uint64_t value) {
  ++stores_;
  for (int other = 0; other < sys_->num_lces(); ++other) {
    if (other == lce) continue;
    CoherenceState s = sys_->lce(other).state_of(addr);
    if (s != CoherenceState::I) {
      report("SWMR", addr, "store by LCE " + std::to_string(lce) + " to " + hex(addr) +
             " while LCE " + std::to_string(other) + " holds " +
             to_string(s));
    }
  }
  set_shadow(addr, size, value);
}

void CoherenceMonitor::on_load_value(int lce, uint64_t addr, int size,
                                     uint64_t value) {
  ++loads_;
  uint64_t want = shadow(addr, size);
  if (want != value) {
    report("DataValue", addr, "load by LCE " + std::to_string(lce) + " at " + hex(addr) +
           " returned " + hex(value) + ", expected " + hex(want));
  }
}

void CoherenceMonitor::on_uncached(const Message& resp) {
  if (resp.type == MsgType::kMemUcAck) {
    ++stores_;
    set_shadow(resp.addr, resp.size, resp.uc_data);
  } else {
    on_load_value(resp.lce, resp.addr, resp.size, resp.uc_data);
  }
}

// ---- System ----

System::System(const SystemConfig& cfg) : cfg_(cfg), monitor_(this) {
  cfg_.validate();
  validate_tables();
  const int lces = num_lces();
  const int mem_ep = lces + cfg_.num_cces;
  NetConfig nc;
  nc.latency = cfg_.net_latency;
  nc.beat_bytes = cfg_.beat_bytes;
  nc.mem_credits = cfg_.mem_credits;
  nc.random_permute = cfg_.random_permute;
  nc.seed = cfg_.seed;
  net_ = std::make_unique<Network>(mem_ep + 1, nc);
  MemoryConfig mc;
  mc.latency = cfg_.mem_latency;
  mc.block_bytes = cfg_.geometry.block_bytes;
  mem_ = std::make_unique<Memory>(mem_ep, mc);
  for (int k = 0; k < cfg_.num_cces; ++k) {
    CceConfig cc;
    cc.cce_id = k;
    cc.num_cces = cfg_.num_cces;
    cc.num_cores = cfg_.cores;
    cc.geometry = cfg_.geometry;
    cc.tag_sets_per_row = cfg_.tag_sets_per_row;
    cc.protocol = cfg_.protocol;
    cc.regions = cfg_.regions;
    cc.beat_bytes = cfg_.beat_bytes;
    cc.endpoint = lces + k;
    cc.mem_endpoint = mem_ep;
    cces_.push_back(make_engine(cc, cfg_.engine, cfg_.ucode_path));
    cces_.back()->set_uncached_hook(
        [this](const Message& m) { monitor_.on_uncached(m); });
  }
  WayGroupMap map{cfg_.num_cces};
  Geometry g = cfg_.geometry;
  auto route = [lces, map, g](uint64_t addr) {
    return lces + map.cce_of(g.set_of(addr));
  };
  for (int id = 0; id < lces; ++id) {
    LceConfig lc;
    lc.geometry = cfg_.geometry;
    lc.lce_id = id;
    lc.kind = id < cfg_.cores ? LceKind::kData : LceKind::kInstruction;
    lces_.push_back(std::make_unique<Lce>(lc, id, route, cfg_.regions));
    lces_.back()->set_observer(&monitor_);
  }
}

System::~System() = default;

CoherenceEngine& System::cce_for(uint64_t addr) {
  WayGroupMap map{cfg_.num_cces};
  return *cces_.at(map.cce_of(cfg_.geometry.set_of(addr)));
}

void System::tick() {
  net_->deliver(now_);
  mem_->tick(*net_, now_);
  for (auto& c : cces_) c->tick(*net_, now_);
  for (auto& l : lces_) l->tick(*net_, now_);
  monitor_.end_cycle();
  ++now_;
}

bool System::quiescent() const {
  if (!net_->idle() || !mem_->idle()) return false;
  for (const auto& l : lces_) {
    if (!l->quiescent()) return false;
  }
  for (const auto& c : cces_) {
    if (!c->idle() || !c->pending().all_zero()) return false;
  }
  return true;
}

void System::drain() {
  uint64_t last_sent = net_->total_sent();
  uint64_t quiet = 0;
  while (!quiescent()) {
    tick();
    if (net_->total_sent() != last_sent) {
      last_sent = net_->total_sent();
      quiet = 0;
    } else if (++quiet > cfg_.watchdog || now_ > cfg_.max_cycles) {
      fail(ErrorCode::kDeadlock,
           "no progress for " + std::to_string(quiet) + " cycles at cycle " +
               std::to_string(now_));
    }
  }
}

void System::prepare_block(
    uint64_t addr, const std::vector<std::pair<int, CoherenceState>>& holders,
    const std::vector<uint8_t>& data, int way) {
  const Geometry& g = cfg_.geometry;
  uint64_t block = g.block_addr(addr);
  int set = g.set_of(block);
  uint64_t tag = g.tag_of(block);
  CoherenceEngine& cce = cce_for(block);
  for (const auto& [id, state] : holders) {
    lce(id).set_line(set, way, tag, state, data);
    cce.directory().write_entry(block, id, way, tag, state);
  }
  if (!data.empty()) mem_->write_block(block, data);
  monitor_.seed_from(*mem_);
}

std::vector<std::string> System::audit() const {
  std::vector<std::string> out;
  const Geometry& g = cfg_.geometry;
  WayGroupMap map{cfg_.num_cces};
  for (int id = 0; id < num_lces(); ++id) {
    for (int set = 0; set < g.sets; ++set) {
      const CoherenceEngine& cce = *cces_[map.cce_of(set)];
      for (int way = 0; way < g.assoc; ++way) {
        const CacheLine& l = lce(id).line(set, way);
        const TagSetEntry& e = cce.directory().entry(id, set, way);
        bool ok;
        if (l.state == CoherenceState::I) {
          ok = e.state == CoherenceState::I;
        } else {
          ok = e.tag == l.tag &&
               (e.state == l.state || (e.state == CoherenceState::E &&
                                       l.state == CoherenceState::M));
        }
        if (!ok) {
          out.push_back("LCE " + std::to_string(id) + " set " +
                        std::to_string(set) + " way " + std::to_string(way) +
                        ": cache " + to_string(l.state) + " tag " +
                        hex(l.tag) + ", directory " + to_string(e.state) +
                        " tag " + hex(e.tag));
        }
      }
    }
  }
  return out;
}

uint64_t System::coherent_read(uint64_t addr, int size) const {
  const Geometry& g = cfg_.geometry;
  int set = g.set_of(addr);
  for (int id = 0; id < num_lces(); ++id) {
    auto way = lce(id).find(addr);
    if (!way) continue;
    const CacheLine& l = lce(id).line(set, *way);
    if (!is_dirty(l.state)) continue;
    uint64_t off = addr & (g.block_bytes - 1);
    uint64_t v = 0;
    for (int i = 0; i < size; ++i)
      v |= static_cast<uint64_t>(l.data[off + i]) << (8 * i);
    return v;
  }
  return mem_->read(addr, size);
}

std::unique_ptr<CoherenceEngine> make_engine(const CceConfig& cfg,
                                             EngineKind kind,
                                             const std::string& ucode_path) {
  if (kind == EngineKind::kFsm) return std::make_unique<FsmCce>(cfg);
  return make_ucode_engine(cfg, ucode_path);
}

}  // namespace bedrock
