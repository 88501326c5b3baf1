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

#include "bedrock/directory.hpp"

#include <bit>
#include <utility>
#include <string>

#include "bedrock/error.hpp"

namespace bedrock {

namespace {

bool pow2(int v) { return v > 0 && std::has_single_bit(static_cast<unsigned>(v)); }

int log2i(int v) { return std::countr_zero(static_cast<unsigned>(v)); }

}  // namespace

int Geometry::offset_bits() const { return log2i(block_bytes); }
int Geometry::set_bits() const { return log2i(sets); }

uint64_t Geometry::block_addr(uint64_t addr) const {
  return addr & ~static_cast<uint64_t>(block_bytes - 1);
}

int Geometry::set_of(uint64_t addr) const {
  return static_cast<int>((addr >> offset_bits()) & (sets - 1));
}

uint64_t Geometry::tag_of(uint64_t addr) const {
  return addr >> (offset_bits() + set_bits());
}

uint64_t Geometry::addr_of(uint64_t tag, int set) const {
  return (tag << (offset_bits() + set_bits())) |
         (static_cast<uint64_t>(set) << offset_bits());
}

void Geometry::validate() const {
  if (!pow2(sets) || !pow2(assoc) || !pow2(block_bytes) || block_bytes < 8) {
    fail(ErrorCode::kInvalidArgument,
         "sets, assoc and block_bytes must be powers of two (block >= 8)");
  }
}

int SegmentConfig::rows_per_set() const {
  return (num_caches + tag_sets_per_row - 1) / tag_sets_per_row;
}

int SegmentConfig::sets_per_cce() const {
  return (geometry.sets + num_cces - 1) / num_cces;
}

int SegmentConfig::sram_rows() const { return rows_per_set() * sets_per_cce(); }

void SegmentConfig::validate() const {
  geometry.validate();
  if (num_caches < 1) fail(ErrorCode::kInvalidArgument, "no caches");
  if (!pow2(tag_sets_per_row))
    fail(ErrorCode::kInvalidArgument, "tag_sets_per_row must be a power of two");
  if (num_cces < 1 || cce_id < 0 || cce_id >= num_cces)
    fail(ErrorCode::kInvalidArgument, "bad CCE id");
}

void SharersVectors::append(const SharersVectors& other) {
  hits.insert(hits.end(), other.hits.begin(), other.hits.end());
  states.insert(states.end(), other.states.begin(), other.states.end());
  ways.insert(ways.end(), other.ways.begin(), other.ways.end());
}

DirectorySegment::DirectorySegment(const SegmentConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  storage_.resize(static_cast<size_t>(cfg_.sram_rows()) *
                  cfg_.tag_sets_per_row * cfg_.geometry.assoc);
}

bool DirectorySegment::owns(uint64_t addr) const {
  WayGroupMap map{cfg_.num_cces};
  return map.cce_of(cfg_.geometry.set_of(addr)) == cfg_.cce_id;
}

int DirectorySegment::row_of(int cache, int local_set) const {
  return (cache / cfg_.tag_sets_per_row) * cfg_.sets_per_cce() + local_set;
}

int DirectorySegment::column_of(int cache) const {
  return cache % cfg_.tag_sets_per_row;
}

const TagSetEntry& DirectorySegment::at(int row, int column, int way) const {
  size_t idx = (static_cast<size_t>(row) * cfg_.tag_sets_per_row + column) *
                   cfg_.geometry.assoc + way;
  return storage_.at(idx);
}

TagSetEntry& DirectorySegment::cell(int cache, int local_set, int way) {
  return const_cast<TagSetEntry&>(
      std::as_const(*this).cell(cache, local_set, way));
}

const TagSetEntry& DirectorySegment::cell(int cache, int local_set,
                                          int way) const {
  return at(row_of(cache, local_set), column_of(cache), way);
}

const TagSetEntry& DirectorySegment::entry(int cache, int global_set,
                                           int way) const {
  WayGroupMap map{cfg_.num_cces};
  return cell(cache, map.local_index(global_set), way);
}

void DirectorySegment::check(uint64_t addr, int cache, int way) const {
  if (!owns(addr)) {
    fail(ErrorCode::kOutOfRange,
         "address not owned by directory segment of CCE " +
             std::to_string(cfg_.cce_id));
  }
  if (cache < 0 || cache >= cfg_.num_caches)
    fail(ErrorCode::kOutOfRange, "cache id " + std::to_string(cache));
  if (way < 0 || way >= cfg_.geometry.assoc)
    fail(ErrorCode::kOutOfRange, "way " + std::to_string(way));
}

WayGroupRead DirectorySegment::read_way_group(uint64_t addr,
                                              std::optional<int> req_cache,
                                              int lru_way) const {
  check(addr, req_cache.value_or(0), lru_way);
  const Geometry& g = cfg_.geometry;
  WayGroupMap map{cfg_.num_cces};
  int local = map.local_index(g.set_of(addr));
  uint64_t tag = g.tag_of(addr);
  WayGroupRead out;
  out.sharers = SharersVectors(cfg_.num_caches);
  // Tag checker: one physical row per cycle, every tag set in the row.
  for (int block = 0; block < cfg_.rows_per_set(); ++block) {
    for (int col = 0; col < cfg_.tag_sets_per_row; ++col) {
      int c = block * cfg_.tag_sets_per_row + col;
      if (c >= cfg_.num_caches) break;
      for (int w = 0; w < g.assoc; ++w) {
        const TagSetEntry& e = cell(c, local, w);
        if (e.state != CoherenceState::I && e.tag == tag) {
          out.sharers.hits[c] = true;
          out.sharers.states[c] = e.state;
          out.sharers.ways[c] = w;
        }
      }
      if (req_cache && c == *req_cache) {
        const TagSetEntry& e = cell(c, local, lru_way);
        out.lru = LruEntry{e.tag, e.state, lru_way};
      }
    }
  }
  out.latency = way_group_read_latency();
  return out;
}

EntryRead DirectorySegment::read_entry(uint64_t addr, int cache,
                                       int way) const {
  check(addr, cache, way);
  WayGroupMap map{cfg_.num_cces};
  return EntryRead{cell(cache, map.local_index(cfg_.geometry.set_of(addr)), way),
                   2};
}

int DirectorySegment::write_entry(uint64_t addr, int cache, int way,
                                  uint64_t tag, CoherenceState state) {
  check(addr, cache, way);
  WayGroupMap map{cfg_.num_cces};
  cell(cache, map.local_index(cfg_.geometry.set_of(addr)), way) =
      TagSetEntry{tag, state};
  return 1;
}

int DirectorySegment::write_state(uint64_t addr, int cache, int way,
                                  CoherenceState state) {
  check(addr, cache, way);
  WayGroupMap map{cfg_.num_cces};
  cell(cache, map.local_index(cfg_.geometry.set_of(addr)), way).state = state;
  return 1;
}

int DirectorySegment::clear_row(uint64_t addr, int cache) {
  check(addr, cache, 0);
  WayGroupMap map{cfg_.num_cces};
  int row = row_of(cache, map.local_index(cfg_.geometry.set_of(addr)));
  size_t base = static_cast<size_t>(row) * cfg_.tag_sets_per_row *
                cfg_.geometry.assoc;
  for (size_t i = 0;
       i < static_cast<size_t>(cfg_.tag_sets_per_row * cfg_.geometry.assoc);
       ++i) {
    storage_[base + i] = TagSetEntry{};
  }
  return 1;
}

PendingBits::PendingBits(int way_groups)
    : counters_(way_groups, 0),
      staged_delta_(way_groups, 0),
      staged_clear_(way_groups, false) {}

void PendingBits::check(int wg) const {
  if (wg < 0 || wg >= size())
    fail(ErrorCode::kOutOfRange, "way group " + std::to_string(wg));
}

int PendingBits::count(int wg) const {
  check(wg);
  int base = staged_clear_[wg] ? 0 : counters_[wg];
  return base + staged_delta_[wg];
}

int PendingBits::committed(int wg) const {
  check(wg);
  return counters_[wg];
}

bool PendingBits::read(int wg) const { return count(wg) != 0; }

void PendingBits::adjust(int wg, int delta) {
  int next = count(wg) + delta;
  if (next < 0) {
    fail(ErrorCode::kUnderflow,
         "pending counter underflow on way group " + std::to_string(wg));
  }
  if (next > kMax) {
    fail(ErrorCode::kOverflow,
         "pending counter overflow on way group " + std::to_string(wg));
  }
  if (staged_delta_[wg] == 0 && !staged_clear_[wg]) dirty_.push_back(wg);
  staged_delta_[wg] += delta;
}

void PendingBits::clear(int wg) {
  check(wg);
  if (staged_delta_[wg] == 0 && !staged_clear_[wg]) dirty_.push_back(wg);
  staged_clear_[wg] = true;
  staged_delta_[wg] = 0;
}

void PendingBits::commit() {
  for (int wg : dirty_) {
    counters_[wg] = static_cast<uint8_t>(count(wg));
    staged_delta_[wg] = 0;
    staged_clear_[wg] = false;
  }
  dirty_.clear();
}

bool PendingBits::all_zero() const {
  for (int wg = 0; wg < size(); ++wg) {
    if (count(wg) != 0) return false;
  }
  return true;
}

SpecBits::SpecBits(int way_groups)
    : records_(way_groups), live_(way_groups, false) {}

void SpecBits::check(int wg) const {
  if (wg < 0 || wg >= static_cast<int>(records_.size()))
    fail(ErrorCode::kOutOfRange, "way group " + std::to_string(wg));
}

void SpecBits::set(int wg) {
  check(wg);
  if (live_[wg]) {
    fail(ErrorCode::kDoubleSpeculation,
         "speculative access already live on way group " + std::to_string(wg));
  }
  records_[wg] = SpecRecord{true, false, false, CoherenceState::I};
  live_[wg] = true;
}

void SpecBits::squash(int wg) {
  check(wg);
  records_[wg] = SpecRecord{false, true, false, CoherenceState::I};
}

void SpecBits::fwd_mod(int wg, CoherenceState state) {
  check(wg);
  records_[wg] = SpecRecord{false, false, true, state};
}

void SpecBits::unset(int wg) {
  check(wg);
  records_[wg] = SpecRecord{};
}

SpecRecord SpecBits::read(int wg) const {
  check(wg);
  return records_[wg];
}

bool SpecBits::live(int wg) const {
  check(wg);
  return live_[wg];
}

void SpecBits::consume(int wg) {
  check(wg);
  if (!live_[wg]) {
    fail(ErrorCode::kSpecStateMissing,
         "speculative response without speculation on way group " +
             std::to_string(wg));
  }
  live_[wg] = false;
  records_[wg] = SpecRecord{};
}

GadResult gad(const SharersVectors& sv, const LruEntry& lru,
              const RequestSummary& req) {
  GadResult r;
  for (int c = 0; c < sv.size(); ++c) {
    if (!sv.hits[c]) continue;
    CoherenceState s = sv.states[c];
    if (c == req.req_lce) {
      r.req_way_hit = sv.ways[c];
      r.req_state = s;
    } else {
      switch (s) {
        case CoherenceState::S:
          r.cached_s = true;
          ++r.other_sharers;
          break;
        case CoherenceState::E:
          r.cached_e = true;
          break;
        case CoherenceState::M:
          r.cached_m = true;
          break;
        case CoherenceState::O:
          r.cached_o = true;
          break;
        case CoherenceState::F:
          r.cached_f = true;
          break;
        case CoherenceState::I:
          break;
      }
    }
    if (is_owner(s)) {
      if (r.owner) {
        fail(ErrorCode::kMultipleOwners,
             "caches " + std::to_string(r.owner->lce) + " and " +
                 std::to_string(c) + " both own the block");
      }
      r.owner = OwnerInfo{c, sv.ways[c], s};
    }
  }
  bool req_hit = r.req_way_hit.has_value();
  r.upgrade = req.write && req_hit &&
              (r.req_state == CoherenceState::S ||
               r.req_state == CoherenceState::O ||
               r.req_state == CoherenceState::F);
  r.replacement = !req_hit && (lru.lru_state == CoherenceState::E ||
                               lru.lru_state == CoherenceState::M ||
                               lru.lru_state == CoherenceState::O);
  return r;
}

CoherenceState summary_state(const SharersVectors& sv) {
  bool shared = false;
  for (int c = 0; c < sv.size(); ++c) {
    if (!sv.hits[c]) continue;
    if (is_owner(sv.states[c])) return sv.states[c];
    if (sv.states[c] == CoherenceState::S) shared = true;
  }
  return shared ? CoherenceState::S : CoherenceState::I;
}

DirRequestKind request_kind(bool write, bool non_exclusive,
                            CoherenceState req_state) {
  if (!write) {
    return non_exclusive ? DirRequestKind::kReqRdNe : DirRequestKind::kReqRd;
  }
  switch (req_state) {
    case CoherenceState::S:
      return DirRequestKind::kReqWrFromS;
    case CoherenceState::O:
    case CoherenceState::F:
      return DirRequestKind::kReqWrFromOf;
    default:
      return DirRequestKind::kReqWrFromI;
  }
}

}  // namespace bedrock
