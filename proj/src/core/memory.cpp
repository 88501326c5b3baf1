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

#include "bedrock/memory.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "bedrock/error.hpp"
#include "bedrock/network.hpp"

namespace bedrock {

Memory::Memory(int endpoint, const MemoryConfig& cfg)
    : endpoint_(endpoint), cfg_(cfg) {
  if (cfg_.latency < 1) fail(ErrorCode::kInvalidArgument, "memory latency < 1");
}

uint64_t Memory::block_of(uint64_t addr) const {
  return addr & ~static_cast<uint64_t>(cfg_.block_bytes - 1);
}

uint8_t Memory::byte_at(uint64_t addr) const {
  auto it = blocks_.find(block_of(addr));
  if (it == blocks_.end()) return 0;
  return it->second[addr - it->first];
}

void Memory::set_byte(uint64_t addr, uint8_t v) {
  uint64_t b = block_of(addr);
  auto it = blocks_.find(b);
  if (it == blocks_.end()) {
    if (v == 0) return;
    it = blocks_.emplace(b, std::vector<uint8_t>(cfg_.block_bytes, 0)).first;
  }
  it->second[addr - b] = v;
}

std::vector<uint8_t> Memory::read_block(uint64_t addr) const {
  auto it = blocks_.find(block_of(addr));
  if (it == blocks_.end()) return std::vector<uint8_t>(cfg_.block_bytes, 0);
  return it->second;
}

void Memory::write_block(uint64_t addr, const std::vector<uint8_t>& data) {
  if (static_cast<int>(data.size()) != cfg_.block_bytes)
    fail(ErrorCode::kInvalidArgument, "block write with wrong size");
  uint64_t b = block_of(addr);
  if (std::all_of(data.begin(), data.end(), [](uint8_t v) { return v == 0; })) {
    blocks_.erase(b);
  } else {
    blocks_[b] = data;
  }
}

uint64_t Memory::read(uint64_t addr, int size) const {
  uint64_t v = 0;
  for (int i = 0; i < size; ++i)
    v |= static_cast<uint64_t>(byte_at(addr + i)) << (8 * i);
  return v;
}

void Memory::write(uint64_t addr, int size, uint64_t value) {
  for (int i = 0; i < size; ++i)
    set_byte(addr + i, static_cast<uint8_t>(value >> (8 * i)));
}

Message Memory::handle_mem_cmd(const Message& cmd) {
  Message r;
  r.src = endpoint_;
  r.dst = cmd.src;
  r.addr = cmd.addr;
  r.lce = cmd.lce;
  r.way = cmd.way;
  r.state = cmd.state;
  r.spec = cmd.spec;
  r.wp = cmd.wp;
  r.size = cmd.size;
  r.atomic = cmd.atomic;
  switch (cmd.type) {
    case MsgType::kMemRd:
      r.type = MsgType::kMemData;
      r.data = read_block(cmd.addr);
      break;
    case MsgType::kMemWr:
      r.type = MsgType::kMemAck;
      write_block(cmd.addr, cmd.data);
      break;
    case MsgType::kMemUcRd:
      r.type = MsgType::kMemUcData;
      r.uc_data = read(cmd.addr, cmd.size);
      break;
    case MsgType::kMemUcWr:
      r.type = MsgType::kMemUcAck;
      r.uc_data = cmd.uc_data;
      write(cmd.addr, cmd.size, cmd.uc_data);
      break;
    default:
      fail(ErrorCode::kProtocol,
           std::string("memory received ") + to_string(cmd.type));
  }
  return r;
}

void Memory::tick(Network& net, uint64_t now) {
  while (net.peek(endpoint_, NetKind::kMemCmd)) {
    Message cmd = net.pop(endpoint_, NetKind::kMemCmd);
    pending_.push_back(Scheduled{now + cfg_.latency, handle_mem_cmd(cmd)});
  }
  while (!pending_.empty() && pending_.front().ready_at <= now) {
    if (net.send(pending_.front().resp, now) == SendResult::kBackpressure)
      break;
    pending_.pop_front();
  }
}

void Memory::load_image(const std::vector<uint8_t>& image) {
  size_t pos = 0;
  auto take = [&](int bytes) {
    if (pos + bytes > image.size())
      fail(ErrorCode::kParse, "truncated memory image record");
    uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
      v |= static_cast<uint64_t>(image[pos + i]) << (8 * i);
    pos += bytes;
    return v;
  };
  while (pos < image.size()) {
    uint64_t addr = take(8);
    uint64_t len = take(4);
    if (pos + len > image.size())
      fail(ErrorCode::kParse, "memory image record overruns file");
    for (uint64_t i = 0; i < len; ++i) set_byte(addr + i, image[pos + i]);
    pos += len;
  }
}

void Memory::load_image_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open memory image " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  load_image(bytes);
}

std::map<uint64_t, std::vector<uint8_t>> Memory::snapshot() const {
  std::map<uint64_t, std::vector<uint8_t>> out;
  for (const auto& [addr, data] : blocks_) {
    if (std::any_of(data.begin(), data.end(), [](uint8_t v) { return v; }))
      out.emplace(addr, data);
  }
  return out;
}

}  // namespace bedrock
