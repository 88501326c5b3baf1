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

#ifndef BEDROCK_CCE_HPP_
#define BEDROCK_CCE_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bedrock/directory.hpp"
#include "bedrock/message.hpp"
#include "bedrock/protocol.hpp"

namespace bedrock {

class Network;

// MSHR control flags, in table order.
enum class Flag : uint8_t {
  kRqf = 0,  // write not read
  kUcf,      // uncached
  kNerf,     // non-exclusive
  kArf,      // atomic
  kAnrf,     // atomic no return
  kRcf,      // cacheable address
  kPf,       // pending
  kCsf,      // cached shared
  kCef,      // cached exclusive
  kCmf,      // cached modified
  kCof,      // cached owned
  kCff,      // cached forward
  kRf,       // replacement
  kUf,       // upgrade
};
inline constexpr int kNumFlags = 14;
const char* flag_name(Flag f);
std::optional<Flag> parse_flag(const std::string& name);

struct Mshr {
  uint64_t paddr = 0;
  MsgType req_type = MsgType::kReqRd;
  int req_lce = 0;
  int req_way = 0;
  int lru_way = 0;
  uint64_t lru_addr = 0;
  CoherenceState lru_state = CoherenceState::I;
  int owner_lce = 0;
  int owner_way = 0;
  CoherenceState owner_state = CoherenceState::I;
  CoherenceState next_state = CoherenceState::I;
  CoherenceState req_state = CoherenceState::I;
  uint16_t flags = 0;
  uint8_t size = 0;
  uint64_t uc_data = 0;
  AtomicOp atomic = AtomicOp::kNone;

  bool flag(Flag f) const { return (flags >> static_cast<int>(f)) & 1; }
  void set_flag(Flag f, bool v) {
    uint16_t bit = static_cast<uint16_t>(1u << static_cast<int>(f));
    flags = v ? (flags | bit) : (flags & ~bit);
  }
  void apply_gad(const GadResult& g);
};

struct CceConfig {
  int cce_id = 0;
  int num_cces = 1;
  int num_cores = 2;
  Geometry geometry;
  int tag_sets_per_row = 2;
  Protocol protocol = Protocol::kMoesif;
  RegionMap regions;
  int beat_bytes = 8;
  int endpoint = 0;
  int mem_endpoint = 0;

  int num_lces() const { return 2 * num_cores; }
  int beats_per_block() const { return geometry.block_bytes / beat_bytes; }
};

// Directory of one CCE: a data-cache segment and an instruction-cache
// segment, read in parallel. LCE ids [0, C) are D$, [C, 2C) are I$.
class CceDirectory {
 public:
  explicit CceDirectory(const CceConfig& cfg);

  WayGroupRead read_way_group(uint64_t addr, int req_lce, int lru_way) const;
  EntryRead read_entry(uint64_t addr, int lce, int way) const;
  int write_entry(uint64_t addr, int lce, int way, uint64_t tag,
                  CoherenceState state);
  int write_state(uint64_t addr, int lce, int way, CoherenceState state);
  int clear_row(uint64_t addr, int lce);
  int way_group_read_latency() const;
  const TagSetEntry& entry(int lce, int set, int way) const;
  const DirectorySegment& segment(int i) const { return segments_[i]; }

 private:
  int cores_;
  std::vector<DirectorySegment> segments_;
};

enum class ReplacementKind : uint8_t { kNone, kClean, kDirty };

struct TransactionRecord {
  MsgType request = MsgType::kReqRd;
  AddressClass address_class = AddressClass::kCacheableCoherent;
  uint64_t addr = 0;
  int req_lce = 0;
  CoherenceState lce_state = CoherenceState::I;
  CoherenceState dir_state = CoherenceState::I;
  int sharers = 0;  // caches in S, requester included
  int invalidations = 0;
  ReplacementKind replacement = ReplacementKind::kNone;
  bool owner_dirty = false;
  uint64_t start_cycle = 0;
  // Cycle the way group's pending count was raised for this request.
  std::optional<uint64_t> admit_cycle;
  uint64_t end_cycle = 0;
  uint64_t busy_cycles = 0;
  uint64_t stall_cycles = 0;
};

struct EngineStats {
  uint64_t transactions = 0;
  uint64_t busy_cycles = 0;
  uint64_t stall_cycles = 0;
  uint64_t invalidations = 0;
  uint64_t transfers = 0;
  uint64_t upgrades = 0;
  uint64_t replacements = 0;
  uint64_t mem_forwards = 0;
  uint64_t mem_squashes = 0;
};

enum class EngineKind : uint8_t { kFsm, kUcode };
const char* to_string(EngineKind k);

// State shared by both engines: directory, pending and speculative bits,
// the memory-response machine and occupancy bookkeeping.
class CoherenceEngine {
 public:
  explicit CoherenceEngine(const CceConfig& cfg);
  virtual ~CoherenceEngine() = default;

  virtual EngineKind kind() const = 0;
  virtual void tick(Network& net, uint64_t now) = 0;
  // No transaction in progress and no outstanding memory response work.
  virtual bool idle() const;

  const CceConfig& config() const { return cfg_; }
  CceDirectory& directory() { return dir_; }
  const CceDirectory& directory() const { return dir_; }
  PendingBits& pending() { return pending_; }
  const PendingBits& pending() const { return pending_; }
  SpecBits& spec() { return spec_; }
  int way_group(uint64_t addr) const;

  const std::vector<TransactionRecord>& transactions() const {
    return records_;
  }
  const EngineStats& stats() const { return stats_; }
  void clear_records() { records_.clear(); }
  // Called with each uncached memory response as it is forwarded.
  void set_uncached_hook(std::function<void(const Message&)> hook) {
    uc_hook_ = std::move(hook);
  }

 protected:
  // Memory-response machine: forwards or sinks the head response.
  void mem_resp_step(Network& net, uint64_t now);
  bool auto_forward() const { return auto_fwd_; }
  void set_auto_forward(bool v) { auto_fwd_ = v; }

  bool send(Network& net, Message msg, uint64_t now);
  // MSHR contents for a freshly dequeued request.
  Mshr load_request(const Message& req) const;
  Message make(MsgType type, int dst_lce, uint64_t addr) const;
  Message make_mem(MsgType type, uint64_t addr) const;
  void begin_record(const Mshr& m, uint64_t now);
  void end_record(uint64_t now);
  void mark_admitted(uint64_t now);
  TransactionRecord* current() { return open_ ? &records_.back() : nullptr; }

  CceConfig cfg_;
  CceDirectory dir_;
  PendingBits pending_;
  SpecBits spec_;
  EngineStats stats_;
  std::vector<TransactionRecord> records_;
  bool open_ = false;

  // Resources arbitrated between the message unit and instructions.
  bool port_pending_write_ = false;
  bool port_spec_read_ = false;
  bool port_dir_ = false;

 private:
  bool auto_fwd_ = true;
  uint64_t mem_resp_busy_until_ = 0;
  std::function<void(const Message&)> uc_hook_;
};

class FsmCce : public CoherenceEngine {
 public:
  explicit FsmCce(const CceConfig& cfg);

  EngineKind kind() const override { return EngineKind::kFsm; }
  void tick(Network& net, uint64_t now) override;
  bool idle() const override;

 private:
  enum class St : uint8_t {
    kReady,
    kCheckPending,
    kWritePending,
    kSpecRead,
    kDirRead,
    kGad,
    kWriteNext,
    kReplSend,
    kReplWait,
    kInvSend,
    kInvAck,
    kUpgradeSquash,
    kUpgradeSend,
    kTransferSend,
    kOwnerWrite,
    kResolveSpec,
    kUcFlushSend,
    kUcFlushWait,
    kUcSend,
    kUcDone,
  };
  enum class Step { kIdle, kBusy, kStall };

  Step step(Network& net, uint64_t now);
  Step ready(Network& net, uint64_t now);
  // Consumes a coherence acknowledgement at the response head, if any.
  bool sink_coh_ack(Network& net);
  void after_write_next();
  void next_phase();
  void finish(uint64_t now);

  St st_ = St::kReady;
  int hold_ = 0;
  Mshr mshr_;
  AddressClass class_ = AddressClass::kCacheableCoherent;
  WayGroupRead read_;
  GadResult gad_;
  DirectivePlan plan_;
  bool has_plan_ = false;
  std::vector<int> inv_targets_;
  size_t inv_sent_ = 0;
  size_t inv_acked_ = 0;
  struct FlushTarget {
    int lce;
    int way;
    CoherenceState state;
  };
  std::vector<FlushTarget> flush_;
  size_t flush_sent_ = 0;
  size_t flush_done_ = 0;
  bool repl_done_ = false;
  bool inv_done_ = false;
};

}  // namespace bedrock

#endif  // BEDROCK_CCE_HPP_
