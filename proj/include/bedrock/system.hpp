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

#ifndef BEDROCK_SYSTEM_HPP_
#define BEDROCK_SYSTEM_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "bedrock/cce.hpp"
#include "bedrock/lce.hpp"
#include "bedrock/memory.hpp"
#include "bedrock/network.hpp"

namespace bedrock {

struct SystemConfig {
  int cores = 2;
  Geometry geometry;
  int beat_bytes = 8;
  EngineKind engine = EngineKind::kFsm;
  std::string ucode_path;  // empty selects the built-in program
  Protocol protocol = Protocol::kMoesif;
  int mem_latency = 20;
  int net_latency = 1;
  uint64_t seed = 1;
  bool random_permute = false;
  int num_cces = 1;
  int mem_credits = 8;
  int tag_sets_per_row = 2;
  RegionMap regions;
  uint64_t max_cycles = 50'000'000;
  // Cycles without any progress before a run is declared deadlocked.
  uint64_t watchdog = 100'000;

  void validate() const;
};

struct Violation {
  uint64_t cycle = 0;
  std::string invariant;  // SWMR, SingleOwner, DataValue, WayGroupSerial
  int way_group = -1;
  std::string what;
};

// Shadow-memory monitor: every load must observe the last committed store
// to each byte, and no other cache may hold a block when a store commits.
class CoherenceMonitor : public LceObserver {
 public:
  explicit CoherenceMonitor(class System* sys) : sys_(sys) {}

  void on_store_commit(int lce, uint64_t addr, int size,
                       uint64_t value) override;
  void on_load_value(int lce, uint64_t addr, int size,
                     uint64_t value) override;
  void on_state_change(int lce, uint64_t block) override;
  void on_uncached(const Message& resp);
  // SWMR and single-owner checks over the blocks changed this cycle.
  void end_cycle();
  void seed_from(const Memory& mem);

  const std::vector<Violation>& violations() const { return violations_; }
  uint64_t checked_loads() const { return loads_; }
  uint64_t checked_stores() const { return stores_; }

 private:
  uint64_t shadow(uint64_t addr, int size) const;
  void set_shadow(uint64_t addr, int size, uint64_t value);
  void report(std::string invariant, uint64_t addr, std::string what);

  class System* sys_;
  std::map<uint64_t, uint8_t> bytes_;
  std::set<uint64_t> touched_;
  std::vector<Violation> violations_;
  uint64_t loads_ = 0;
  uint64_t stores_ = 0;
};

class System {
 public:
  explicit System(const SystemConfig& cfg);
  ~System();

  const SystemConfig& config() const { return cfg_; }
  int num_lces() const { return 2 * cfg_.cores; }
  Lce& lce(int id) { return *lces_.at(id); }
  const Lce& lce(int id) const { return *lces_.at(id); }
  int num_cces() const { return static_cast<int>(cces_.size()); }
  CoherenceEngine& cce(int k) { return *cces_.at(k); }
  const CoherenceEngine& cce(int k) const { return *cces_.at(k); }
  CoherenceEngine& cce_for(uint64_t addr);
  Memory& memory() { return *mem_; }
  const Memory& memory() const { return *mem_; }
  Network& network() { return *net_; }
  CoherenceMonitor& monitor() { return monitor_; }
  const CoherenceMonitor& monitor() const { return monitor_; }

  uint64_t now() const { return now_; }
  void tick();
  bool quiescent() const;
  // Runs until quiescent; throws Deadlock when the watchdog expires.
  void drain();

  // Places a block in a prepared state: cache lines, directory entries and
  // memory are written through back doors.
  void prepare_block(uint64_t addr, const std::vector<std::pair<int, CoherenceState>>& holders,
                     const std::vector<uint8_t>& data, int way = 0);

  // Directory entries that disagree with the caches they shadow.
  std::vector<std::string> audit() const;
  // Value of a byte range as the coherent system sees it.
  uint64_t coherent_read(uint64_t addr, int size) const;

 private:
  SystemConfig cfg_;
  std::unique_ptr<Network> net_;
  std::unique_ptr<Memory> mem_;
  std::vector<std::unique_ptr<CoherenceEngine>> cces_;
  std::vector<std::unique_ptr<Lce>> lces_;
  CoherenceMonitor monitor_;
  uint64_t now_ = 0;
};

std::unique_ptr<CoherenceEngine> make_engine(const CceConfig& cfg,
                                             EngineKind kind,
                                             const std::string& ucode_path);

}  // namespace bedrock

#endif  // BEDROCK_SYSTEM_HPP_
