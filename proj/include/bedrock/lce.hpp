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

#ifndef BEDROCK_LCE_HPP_
#define BEDROCK_LCE_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "bedrock/directory.hpp"
#include "bedrock/message.hpp"
#include "bedrock/protocol.hpp"

namespace bedrock {

class Network;

enum class LceKind : uint8_t { kData, kInstruction };

enum class CpuOp : uint8_t {
  kLoad,
  kStore,
  kUncachedLoad,
  kUncachedStore,
  kAmoAdd,
  kAmoSwap,
  kLr,
  kSc,
};
const char* to_string(CpuOp op);
bool is_store_class(CpuOp op);

struct CpuRequest {
  CpuOp op = CpuOp::kLoad;
  uint64_t addr = 0;
  int size = 8;
  uint64_t data = 0;
  uint64_t id = 0;
};

struct CpuCompletion {
  uint64_t id = 0;
  uint64_t value = 0;
  uint64_t cycle = 0;
};

struct LceConfig {
  Geometry geometry;
  int lce_id = 0;
  LceKind kind = LceKind::kData;
};

struct CacheLine {
  uint64_t tag = 0;
  CoherenceState state = CoherenceState::I;
  std::vector<uint8_t> data;
  uint64_t last_use = 0;
};

struct OutstandingMiss {
  CpuRequest req;
  int lru_way = 0;
  bool uncached = false;
};

// Hooks used by the harness monitors.
class LceObserver {
 public:
  virtual ~LceObserver() = default;
  virtual void on_store_commit(int lce, uint64_t addr, int size,
                               uint64_t value) = 0;
  virtual void on_load_value(int lce, uint64_t addr, int size,
                             uint64_t value) = 0;
  // A line of `block` was filled or changed state.
  virtual void on_state_change(int lce, uint64_t block) {
    (void)lce;
    (void)block;
  }
};

enum class AccessStatus { kHit, kMissIssued };

struct AccessResult {
  AccessStatus status;
  uint64_t value = 0;
};

class Lce {
 public:
  using CceRoute = std::function<int(uint64_t addr)>;

  Lce(const LceConfig& cfg, int endpoint, CceRoute route, RegionMap regions);

  const LceConfig& config() const { return cfg_; }
  int endpoint() const { return endpoint_; }
  void set_observer(LceObserver* obs) { observer_ = obs; }

  // Throws Busy while a miss is outstanding.
  AccessResult access(const CpuRequest& req, uint64_t now);
  void tick(Network& net, uint64_t now);

  bool busy() const { return miss_.has_value(); }
  bool quiescent() const { return !miss_ && outbox_.empty(); }
  std::vector<CpuCompletion> take_completions();

  int lru_way(int set) const;
  const CacheLine& line(int set, int way) const;
  std::optional<int> find(uint64_t addr) const;
  CoherenceState state_of(uint64_t addr) const;
  // Back door for prepared-state experiments.
  void set_line(int set, int way, uint64_t tag, CoherenceState state,
                const std::vector<uint8_t>& data);

  uint64_t hits() const { return hits_; }
  uint64_t misses() const { return misses_; }

 private:
  CacheLine& line_mut(int set, int way);
  void touch(int set, int way);
  uint64_t read_line(const CacheLine& l, uint64_t addr, int size) const;
  void write_line(CacheLine& l, uint64_t addr, int size, uint64_t value);
  // Applies the processor operation to a writable line; returns the value.
  uint64_t perform(CacheLine& l, const CpuRequest& req);
  void issue_miss(const CpuRequest& req, bool uncached, uint64_t now);
  void handle(const Message& msg, uint64_t now);
  void handle_fill(const Message& msg, uint64_t now);
  void emit(Message msg);
  void complete(uint64_t id, uint64_t value, uint64_t now);
  void drop_reservation_if(uint64_t block);

  LceConfig cfg_;
  int endpoint_;
  CceRoute route_;
  RegionMap regions_;
  LceObserver* observer_ = nullptr;
  std::vector<CacheLine> lines_;
  uint64_t clock_ = 0;
  std::optional<OutstandingMiss> miss_;
  std::deque<Message> outbox_;
  std::vector<CpuCompletion> completions_;
  std::optional<uint64_t> reservation_;
  uint64_t hits_ = 0;
  uint64_t misses_ = 0;
};

}  // namespace bedrock

#endif  // BEDROCK_LCE_HPP_
