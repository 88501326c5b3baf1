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

#include "bedrock/message.hpp"

#include <sstream>

namespace bedrock {

const char* to_string(NetKind n) {
  static constexpr const char* kNames[] = {"request", "command", "fill",
                                           "response", "mem_cmd", "mem_resp"};
  return kNames[static_cast<int>(n)];
}

int net_rank(NetKind n) {
  switch (n) {
    case NetKind::kResponse: return 0;
    case NetKind::kFill: return 1;
    case NetKind::kCommand: return 2;
    case NetKind::kRequest: return 3;
    case NetKind::kMemResp: return 4;
    case NetKind::kMemCmd: return 5;
  }
  return 6;
}

const char* to_string(MsgType t) {
  static constexpr const char* kNames[] = {
      "ReqRd",   "ReqRdNE", "ReqWr",    "ReqUcRd",  "ReqUcWr", "Inv",
      "DATA",    "STW",     "WB",       "TR",       "ST-WB",   "ST-TR",
      "ST-TR-WB", "UcData", "UcDone",   "FillDATA", "InvAck",  "CohAck",
      "NullWB",  "DirtyWB", "MemRd",    "MemWr",    "MemUcRd", "MemUcWr",
      "MemData", "MemAck",  "MemUcData", "MemUcAck"};
  return kNames[static_cast<int>(t)];
}

NetKind net_of(MsgType t) {
  if (t <= MsgType::kReqUcWr) return NetKind::kRequest;
  if (t <= MsgType::kCmdUcDone) return NetKind::kCommand;
  if (t == MsgType::kFillData) return NetKind::kFill;
  if (t <= MsgType::kRespDirtyWb) return NetKind::kResponse;
  if (t <= MsgType::kMemUcWr) return NetKind::kMemCmd;
  return NetKind::kMemResp;
}

int Message::beats(int beat_bytes) const {
  if (!data.empty())
    return static_cast<int>((data.size() + beat_bytes - 1) / beat_bytes);
  switch (type) {
    case MsgType::kReqUcWr:
    case MsgType::kMemUcWr:
    case MsgType::kMemUcData:
    case MsgType::kCmdUcData:
      return 1;
    default:
      return 0;
  }
}

std::string Message::describe() const {
  std::ostringstream os;
  os << to_string(type) << " src=" << src << " dst=" << dst << " addr=0x"
     << std::hex << addr << std::dec << " lce=" << lce << " way=" << way
     << " state=" << to_string(state);
  if (spec) os << " spec";
  return os.str();
}

}  // namespace bedrock
