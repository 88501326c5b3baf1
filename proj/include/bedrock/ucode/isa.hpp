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

#ifndef BEDROCK_UCODE_ISA_HPP_
#define BEDROCK_UCODE_ISA_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bedrock::ucode {

// Opcode numbers are part of the binary format; see docs/microcode.md.
enum class Op : uint8_t {
  kAdd = 0,
  kSub,
  kAnd,
  kOr,
  kXor,
  kLsh,
  kRsh,
  kAddi,
  kSubi,
  kAndi,
  kOri,
  kLshi,
  kRshi,
  kMovi,
  kBeq,
  kBne,
  kBlt,
  kBge,
  kBeqi,
  kBnei,
  kBi,
  kSf,
  kSfz,
  kAndf,
  kOrf,
  kNandf,
  kNotf,
  kBf,
  kBfnot,
  kBfz,
  kBfnz,
  kMovsg,
  kMovgs,
  kMovis,
  kRdp,
  kRdw,
  kRde,
  kWdp,
  kClp,
  kClr,
  kWde,
  kWds,
  kGad,
  kWfq,
  kPushq,
  kPopq,
  kPoph,
  kSpecq,
  kInv,
  kCount,
};

enum class Format : uint8_t {
  kR,       // rd, rs1, rs2
  kI,       // rd, rs1, imm16
  kMovi,    // rd, imm16
  kBr,      // rs1, rs2, target
  kBri,     // rs1, imm11, target
  kBi,      // target
  kFlag,    // flag
  kFlag2,   // flag, flag, rd
  kFlag1,   // flag, rd
  kFlagBr,  // target, mask
  kMovsg,   // rd, sreg
  kMovgs,   // sreg, rs1
  kMovis,   // sreg, imm16
  kDir,     // directory / queue operand block
  kNone,
};

const char* mnemonic(Op op);
std::optional<Op> parse_mnemonic(std::string_view text);
Format format_of(Op op);
bool is_branch(Op op);

inline constexpr int kNumGprs = 8;
inline constexpr int kImemSize = 256;

enum class AddrSel : uint8_t { kReq = 0, kLru, kGpr, kMsg };
enum class LceSel : uint8_t { kReq = 0, kOwner, kGpr, kMsg };
enum class WaySel : uint8_t { kReq = 0, kLru, kOwner, kGpr };
enum class StateSel : uint8_t { kImm = 0, kNext, kCoh, kOwner };

enum class Queue : uint8_t {
  kReq = 0,
  kResp,
  kMemResp,
  kCmd,     // sends only
  kMemCmd,  // sends only
};
const char* to_string(Queue q);
std::optional<Queue> parse_queue(std::string_view text);

// Command codes carried by pushq.
enum class CmdCode : uint8_t {
  kInv = 0,
  kStW,
  kWb,
  kTr,
  kStWb,
  kStTr,
  kStTrWb,
  kMemRd,
  kMemWr,
  kMemUcRd,
  kMemUcWr,
  kCount,
};
const char* to_string(CmdCode c);
std::optional<CmdCode> parse_cmd(std::string_view text);
bool is_mem_cmd(CmdCode c);

enum class SpecCmd : uint8_t { kSet = 0, kUnset, kSquash, kFwdMod };
const char* to_string(SpecCmd c);
std::optional<SpecCmd> parse_spec_cmd(std::string_view text);

// Special registers reachable by movsg / movgs / movis.
enum class SReg : uint8_t {
  kPaddr = 0,
  kReqLce,
  kReqWay,
  kLruWay,
  kLruAddr,
  kOwnerLce,
  kOwnerWay,
  kOwnerState,
  kNextState,
  kReqState,
  kLruState,
  kCoh,
  kAutoFwd,
  kFlags,
  kReqType,
  kMsgType,
  kMsgAddr,
  kMsgLce,
  kSharers,
  kCount,
};
const char* to_string(SReg r);
std::optional<SReg> parse_sreg(std::string_view text);

struct Instr {
  Op op = Op::kGad;
  uint8_t rd = 0;
  uint8_t rs1 = 0;
  uint8_t rs2 = 0;
  uint16_t imm = 0;
  uint8_t target = 0;
  bool pt = false;
  uint16_t mask = 0;
  uint8_t f1 = 0;
  uint8_t f2 = 0;
  SReg sreg = SReg::kPaddr;
  AddrSel addr = AddrSel::kReq;
  LceSel lce = LceSel::kReq;
  WaySel way = WaySel::kReq;
  uint8_t src = 0;
  StateSel state = StateSel::kImm;
  uint8_t state_imm = 0;
  bool p = false;   // wdp direction; wp on pushq / popq
  bool spec = false;
  CmdCode cmd = CmdCode::kInv;
  Queue queue = Queue::kReq;
  SpecCmd spec_cmd = SpecCmd::kSet;
  uint8_t qmask = 0;

  bool operator==(const Instr&) const = default;
};

// Canonicalizes fields the encoding does not carry for the opcode.
Instr canonical(const Instr& in);
uint32_t encode(const Instr& in);
// Throws IllegalInstruction for unknown opcodes or out-of-range fields.
Instr decode(uint32_t word);
std::string disassemble(const Instr& in);
// Same, printing `target` in place of the numeric branch target.
std::string disassemble(const Instr& in, const std::string& target);

}  // namespace bedrock::ucode

#endif  // BEDROCK_UCODE_ISA_HPP_
