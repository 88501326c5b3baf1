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

#ifndef BEDROCK_MESSAGE_HPP_
#define BEDROCK_MESSAGE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "bedrock/protocol.hpp"

namespace bedrock {

enum class NetKind : uint8_t {
  kRequest = 0,
  kCommand,
  kFill,
  kResponse,
  kMemCmd,
  kMemResp,
};
inline constexpr int kNumNets = 6;
const char* to_string(NetKind n);

// Arbitration rank; lower is served first.
int net_rank(NetKind n);

enum class MsgType : uint8_t {
  // Request network: LCE to CCE.
  kReqRd,
  kReqRdNe,
  kReqWr,
  kReqUcRd,
  kReqUcWr,
  // Command network: CCE to LCE.
  kCmdInv,
  kCmdData,
  kCmdStW,
  kCmdWb,
  kCmdTr,
  kCmdStWb,
  kCmdStTr,
  kCmdStTrWb,
  kCmdUcData,
  kCmdUcDone,
  // Fill network: LCE to LCE.
  kFillData,
  // Response network: LCE to CCE.
  kRespInvAck,
  kRespCohAck,
  kRespNullWb,
  kRespDirtyWb,
  // Memory command / response networks.
  kMemRd,
  kMemWr,
  kMemUcRd,
  kMemUcWr,
  kMemData,
  kMemAck,
  kMemUcData,
  kMemUcAck,
};
const char* to_string(MsgType t);
NetKind net_of(MsgType t);

enum class AtomicOp : uint8_t { kNone, kAdd, kSwap, kLr, kSc };

struct Message {
  MsgType type = MsgType::kReqRd;
  int src = 0;
  int dst = 0;
  uint64_t addr = 0;
  int lce = 0;      // requesting (or addressed) cache
  int way = 0;      // way in the destination cache
  int lru_way = 0;  // requests only
  CoherenceState state = CoherenceState::I;   // attached / grant state
  CoherenceState state2 = CoherenceState::I;  // transfer state
  int target = 0;
  int target_way = 0;
  bool spec = false;
  bool wp = false;  // memory command adjusts pending bits
  AtomicOp atomic = AtomicOp::kNone;
  uint8_t size = 0;  // uncached access size in bytes
  uint64_t uc_data = 0;
  std::vector<uint8_t> data;

  NetKind net() const { return net_of(type); }
  // Data beats carried by the message for a given beat width.
  int beats(int beat_bytes) const;
  std::string describe() const;
};

}  // namespace bedrock

#endif  // BEDROCK_MESSAGE_HPP_
