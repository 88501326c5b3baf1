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

#ifndef BEDROCK_DIRECTORY_HPP_
#define BEDROCK_DIRECTORY_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "bedrock/protocol.hpp"

namespace bedrock {

// Cache geometry shared by caches and directory segments.
struct Geometry {
  int sets = 64;
  int assoc = 8;
  int block_bytes = 64;

  int offset_bits() const;
  int set_bits() const;
  uint64_t block_addr(uint64_t addr) const;
  int set_of(uint64_t addr) const;
  uint64_t tag_of(uint64_t addr) const;
  uint64_t addr_of(uint64_t tag, int set) const;
  void validate() const;
};

// Way groups (cache sets) are striped across CCEs by the low set-index bits.
struct WayGroupMap {
  int num_cces = 1;

  int cce_of(int set) const { return set % num_cces; }
  int local_index(int set) const { return set / num_cces; }
  int global_set(int cce, int local) const { return local * num_cces + cce; }
};

struct SegmentConfig {
  int num_caches = 8;
  Geometry geometry;
  int tag_bits = 28;
  int state_bits = 3;
  int tag_sets_per_row = 2;
  int num_cces = 1;
  int cce_id = 0;

  int rows_per_set() const;
  int sets_per_cce() const;
  int sram_rows() const;
  void validate() const;
};

struct TagSetEntry {
  uint64_t tag = 0;
  CoherenceState state = CoherenceState::I;

  bool operator==(const TagSetEntry&) const = default;
};

struct SharersVectors {
  std::vector<bool> hits;
  std::vector<CoherenceState> states;
  std::vector<int> ways;

  explicit SharersVectors(int n = 0)
      : hits(n, false), states(n, CoherenceState::I), ways(n, 0) {}
  int size() const { return static_cast<int>(hits.size()); }
  void append(const SharersVectors& other);
};

struct LruEntry {
  uint64_t lru_tag = 0;
  CoherenceState lru_state = CoherenceState::I;
  int lru_way = 0;
};

struct WayGroupRead {
  SharersVectors sharers;
  LruEntry lru;
  int latency = 0;
};

struct EntryRead {
  TagSetEntry entry;
  int latency = 2;
};

class DirectorySegment {
 public:
  explicit DirectorySegment(const SegmentConfig& cfg);

  const SegmentConfig& config() const { return cfg_; }
  bool owns(uint64_t addr) const;
  int way_group_read_latency() const { return 1 + cfg_.rows_per_set(); }

  // The LRU entry is extracted only when req_cache is tracked by this segment.
  WayGroupRead read_way_group(uint64_t addr, std::optional<int> req_cache,
                              int lru_way) const;
  EntryRead read_entry(uint64_t addr, int cache, int way) const;
  int write_entry(uint64_t addr, int cache, int way, uint64_t tag,
                  CoherenceState state);
  int write_state(uint64_t addr, int cache, int way, CoherenceState state);
  // Clears every tag set in the physical row holding (addr, cache).
  int clear_row(uint64_t addr, int cache);

  // Physical coordinates, exposed for layout tests.
  int row_of(int cache, int local_set) const;
  int column_of(int cache) const;
  const TagSetEntry& at(int row, int column, int way) const;

  // Duplicate-tag view of one cache set, for snapshots and monitors.
  const TagSetEntry& entry(int cache, int global_set, int way) const;

 private:
  void check(uint64_t addr, int cache, int way) const;
  TagSetEntry& cell(int cache, int local_set, int way);
  const TagSetEntry& cell(int cache, int local_set, int way) const;

  SegmentConfig cfg_;
  std::vector<TagSetEntry> storage_;
};

// Per-way-group pending counters. Writes are staged and land at commit();
// reads forward same-cycle staged writes.
class PendingBits {
 public:
  static constexpr int kMax = 15;

  explicit PendingBits(int way_groups);

  bool read(int wg) const;
  int count(int wg) const;
  int committed(int wg) const;
  void adjust(int wg, int delta);
  void clear(int wg);
  void commit();
  int size() const { return static_cast<int>(counters_.size()); }
  bool all_zero() const;

 private:
  void check(int wg) const;

  std::vector<uint8_t> counters_;
  std::vector<int> staged_delta_;
  std::vector<bool> staged_clear_;
  std::vector<int> dirty_;
};

struct SpecRecord {
  bool spec = false;
  bool squash = false;
  bool fwd_mod = false;
  CoherenceState state = CoherenceState::I;
};

class SpecBits {
 public:
  explicit SpecBits(int way_groups);

  void set(int wg);
  void squash(int wg);
  void fwd_mod(int wg, CoherenceState state);
  void unset(int wg);
  SpecRecord read(int wg) const;
  // True between set() and consumption of the speculative response.
  bool live(int wg) const;
  void consume(int wg);

 private:
  void check(int wg) const;

  std::vector<SpecRecord> records_;
  std::vector<bool> live_;
};

struct RequestSummary {
  int req_lce = 0;
  bool write = false;
};

struct OwnerInfo {
  int lce = 0;
  int way = 0;
  CoherenceState state = CoherenceState::I;
};

struct GadResult {
  bool cached_s = false;
  bool cached_e = false;
  bool cached_m = false;
  bool cached_o = false;
  bool cached_f = false;
  bool replacement = false;
  bool upgrade = false;
  std::optional<OwnerInfo> owner;
  std::optional<int> req_way_hit;
  CoherenceState req_state = CoherenceState::I;
  int other_sharers = 0;  // caches other than the requester holding S
};

GadResult gad(const SharersVectors& sv, const LruEntry& lru,
              const RequestSummary& req);

// Directory summary state of a block: the owner's state if one exists, else
// S if any cache (requester included) shares it, else I.
CoherenceState summary_state(const SharersVectors& sv);

DirRequestKind request_kind(bool write, bool non_exclusive,
                            CoherenceState req_state);

}  // namespace bedrock

#endif  // BEDROCK_DIRECTORY_HPP_
