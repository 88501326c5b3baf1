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

#ifndef BEDROCK_MEMORY_HPP_
#define BEDROCK_MEMORY_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "bedrock/message.hpp"

namespace bedrock {

class Network;

struct MemoryConfig {
  int latency = 20;
  int block_bytes = 64;
};

// Sparse backing store plus the memory-side responder. Never-written bytes
// read as zero.
class Memory {
 public:
  Memory(int endpoint, const MemoryConfig& cfg);

  int endpoint() const { return endpoint_; }
  const MemoryConfig& config() const { return cfg_; }

  // Functional command semantics; the response is addressed back to cmd.src.
  Message handle_mem_cmd(const Message& cmd);

  void tick(Network& net, uint64_t now);
  bool idle() const { return pending_.empty(); }

  std::vector<uint8_t> read_block(uint64_t addr) const;
  void write_block(uint64_t addr, const std::vector<uint8_t>& data);
  uint64_t read(uint64_t addr, int size) const;
  void write(uint64_t addr, int size, uint64_t value);

  // Records: u64 address, u32 length, bytes; all little-endian.
  void load_image(const std::vector<uint8_t>& image);
  void load_image_file(const std::string& path);

  // Non-zero blocks only, ordered by address.
  std::map<uint64_t, std::vector<uint8_t>> snapshot() const;

 private:
  struct Scheduled {
    uint64_t ready_at;
    Message resp;
  };

  uint64_t block_of(uint64_t addr) const;
  uint8_t byte_at(uint64_t addr) const;
  void set_byte(uint64_t addr, uint8_t v);

  int endpoint_;
  MemoryConfig cfg_;
  std::map<uint64_t, std::vector<uint8_t>> blocks_;
  std::deque<Scheduled> pending_;
};

}  // namespace bedrock

#endif  // BEDROCK_MEMORY_HPP_
