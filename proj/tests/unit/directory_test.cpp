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

#include "doctest.h"

#include "bedrock/directory.hpp"
#include "bedrock/error.hpp"

using namespace bedrock;
using S = CoherenceState;

TEST_CASE("way-group read latency is one plus C/2") {
  for (int c : {2, 4, 8, 16, 32}) {
    SegmentConfig cfg;
    cfg.num_caches = c;
    DirectorySegment seg(cfg);
    CHECK(seg.way_group_read_latency() == 1 + c / 2);
    CHECK(seg.read_way_group(0x80000000ull, 0, 0).latency == 1 + c / 2);
  }
}

TEST_CASE("way-group read reports hits, states and the LRU entry") {
  SegmentConfig cfg;
  cfg.num_caches = 4;
  DirectorySegment seg(cfg);
  const uint64_t a = 0x80000000ull + 5 * 64;
  const Geometry& g = cfg.geometry;
  seg.write_entry(a, 1, 3, g.tag_of(a), S::O);
  seg.write_entry(a, 2, 0, g.tag_of(a), S::S);
  const uint64_t other = a + static_cast<uint64_t>(g.sets) * 64;
  seg.write_entry(other, 0, 6, g.tag_of(other), S::M);
  WayGroupRead r = seg.read_way_group(a, 0, 6);
  CHECK_FALSE(r.sharers.hits[0]);
  CHECK(r.sharers.hits[1]);
  CHECK(r.sharers.states[1] == S::O);
  CHECK(r.sharers.ways[1] == 3);
  CHECK(r.sharers.hits[2]);
  CHECK_FALSE(r.sharers.hits[3]);
  CHECK(r.lru.lru_state == S::M);
  CHECK(r.lru.lru_tag == g.tag_of(other));
  CHECK(r.lru.lru_way == 6);
  CHECK(seg.read_entry(a, 1, 3).latency == 2);
}

TEST_CASE("pending bits forward staged writes within the cycle") {
  PendingBits pb(8);
  CHECK(pb.all_zero());
  pb.adjust(3, +1);
  CHECK(pb.read(3));
  CHECK(pb.count(3) == 1);
  CHECK(pb.committed(3) == 0);
  pb.commit();
  CHECK(pb.committed(3) == 1);
  pb.adjust(3, +1);
  pb.adjust(3, -1);
  CHECK(pb.count(3) == 1);
  pb.adjust(3, -1);
  CHECK_FALSE(pb.read(3));
  pb.commit();
  CHECK(pb.all_zero());
}

TEST_CASE("pending counters saturate with errors") {
  PendingBits pb(2);
  CHECK_THROWS_AS((pb.adjust(0, -1), pb.commit()), Error);
  PendingBits full(2);
  for (int i = 0; i < PendingBits::kMax; ++i) {
    full.adjust(1, +1);
    full.commit();
  }
  CHECK_THROWS_AS((full.adjust(1, +1), full.commit()), Error);
  CHECK_THROWS_AS(full.read(5), Error);
}

TEST_CASE("speculative bits") {
  SpecBits sb(4);
  sb.set(1);
  CHECK(sb.live(1));
  CHECK(sb.read(1).spec);
  sb.fwd_mod(1, S::S);
  CHECK(sb.read(1).fwd_mod);
  CHECK(sb.read(1).state == S::S);
  sb.consume(1);
  CHECK_FALSE(sb.live(1));
}

TEST_CASE("geometry arithmetic") {
  Geometry g;
  CHECK(g.offset_bits() == 6);
  CHECK(g.set_bits() == 6);
  uint64_t a = 0x80001234ull;
  CHECK(g.addr_of(g.tag_of(a), g.set_of(a)) == g.block_addr(a));
  Geometry bad;
  bad.sets = 3;
  CHECK_THROWS_AS(bad.validate(), Error);
}
