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

#include "bedrock/ucode/isa.hpp"

#include <array>
#include <sstream>

#include "bedrock/cce.hpp"
#include "bedrock/error.hpp"
#include "bedrock/protocol.hpp"

namespace bedrock::ucode {

namespace {

struct OpInfo {
  const char* name;
  Format format;
};

constexpr std::array<OpInfo, static_cast<size_t>(Op::kCount)> kOps = {{
    {"add", Format::kR},      {"sub", Format::kR},
    {"and", Format::kR},      {"or", Format::kR},
    {"xor", Format::kR},      {"lsh", Format::kR},
    {"rsh", Format::kR},      {"addi", Format::kI},
    {"subi", Format::kI},     {"andi", Format::kI},
    {"ori", Format::kI},      {"lshi", Format::kI},
    {"rshi", Format::kI},     {"movi", Format::kMovi},
    {"beq", Format::kBr},     {"bne", Format::kBr},
    {"blt", Format::kBr},     {"bge", Format::kBr},
    {"beqi", Format::kBri},   {"bnei", Format::kBri},
    {"bi", Format::kBi},      {"sf", Format::kFlag},
    {"sfz", Format::kFlag},   {"andf", Format::kFlag2},
    {"orf", Format::kFlag2},  {"nandf", Format::kFlag2},
    {"notf", Format::kFlag1}, {"bf", Format::kFlagBr},
    {"bfnot", Format::kFlagBr}, {"bfz", Format::kFlagBr},
    {"bfnz", Format::kFlagBr}, {"movsg", Format::kMovsg},
    {"movgs", Format::kMovgs}, {"movis", Format::kMovis},
    {"rdp", Format::kDir},    {"rdw", Format::kDir},
    {"rde", Format::kDir},    {"wdp", Format::kDir},
    {"clp", Format::kDir},    {"clr", Format::kDir},
    {"wde", Format::kDir},    {"wds", Format::kDir},
    {"gad", Format::kNone},   {"wfq", Format::kDir},
    {"pushq", Format::kDir},  {"popq", Format::kDir},
    {"poph", Format::kDir},   {"specq", Format::kDir},
    {"inv", Format::kNone},
}};

constexpr const char* kQueues[] = {"req", "resp", "memresp", "cmd", "memcmd"};
constexpr const char* kCmds[] = {"inv",  "stw",  "wb",   "tr",
                                 "stwb", "sttr", "sttrwb", "rd",
                                 "wr",   "ucrd", "ucwr"};
constexpr const char* kSpecCmds[] = {"set", "unset", "squash", "fwd_mod"};
constexpr const char* kSRegs[] = {
    "paddr",     "req_lce",  "req_way",   "lru_way",  "lru_addr",
    "owner_lce", "owner_way", "owner_state", "next_state", "req_state",
    "lru_state", "coh",      "auto_fwd",  "flags",    "req_type",
    "msg_type",  "msg_addr", "msg_lce",   "sharers"};

uint32_t bits(uint32_t v, int hi, int lo) {
  uint32_t width = static_cast<uint32_t>(hi - lo + 1);
  return (v & ((1u << width) - 1)) << lo;
}

uint32_t field(uint32_t w, int hi, int lo) {
  uint32_t width = static_cast<uint32_t>(hi - lo + 1);
  return (w >> lo) & ((1u << width) - 1);
}

// Which operand-block fields an opcode carries.
struct DirFields {
  bool addr = false, lce = false, way = false, state = false, rd = false,
       p = false, spec = false, cmd = false, queue = false, spec_cmd = false,
       qmask = false;
};

DirFields dir_fields(Op op) {
  DirFields f;
  switch (op) {
    case Op::kRdp:
    case Op::kClp:
      f.addr = true;
      break;
    case Op::kWdp:
      f.addr = f.p = true;
      break;
    case Op::kRdw:
      f.addr = f.lce = f.way = true;
      break;
    case Op::kRde:
      f.addr = f.lce = f.way = f.rd = true;
      break;
    case Op::kClr:
      f.addr = f.lce = true;
      break;
    case Op::kWde:
    case Op::kWds:
      f.addr = f.lce = f.way = f.state = true;
      break;
    case Op::kWfq:
      f.qmask = true;
      break;
    case Op::kPushq:
      f.addr = f.lce = f.way = f.state = f.p = f.spec = f.cmd = f.queue = true;
      break;
    case Op::kPopq:
      f.queue = f.p = true;
      break;
    case Op::kPoph:
      f.queue = f.rd = true;
      break;
    case Op::kSpecq:
      f.addr = f.state = f.spec_cmd = true;
      break;
    default:
      break;
  }
  return f;
}

bool uses_gpr(const Instr& in, const DirFields& f) {
  return (f.addr && in.addr == AddrSel::kGpr) ||
         (f.lce && in.lce == LceSel::kGpr) ||
         (f.way && in.way == WaySel::kGpr);
}

std::string state_operand(StateSel s, uint8_t imm) {
  switch (s) {
    case StateSel::kImm:
      return imm < kNumStates ? to_string(static_cast<CoherenceState>(imm))
                              : std::to_string(imm);
    case StateSel::kNext: return "next";
    case StateSel::kCoh: return "coh";
    case StateSel::kOwner: return "owner";
  }
  return "?";
}

bool state_valued(SReg r) {
  return r == SReg::kOwnerState || r == SReg::kNextState ||
         r == SReg::kReqState || r == SReg::kLruState || r == SReg::kCoh;
}

}  // namespace

const char* mnemonic(Op op) {
  if (op >= Op::kCount) return "illegal";
  return kOps[static_cast<size_t>(op)].name;
}

std::optional<Op> parse_mnemonic(std::string_view text) {
  for (size_t i = 0; i < kOps.size(); ++i) {
    if (text == kOps[i].name) return static_cast<Op>(i);
  }
  return std::nullopt;
}

Format format_of(Op op) { return kOps.at(static_cast<size_t>(op)).format; }

bool is_branch(Op op) {
  Format f = format_of(op);
  return f == Format::kBr || f == Format::kBri || f == Format::kBi ||
         f == Format::kFlagBr;
}

const char* to_string(Queue q) { return kQueues[static_cast<int>(q)]; }

std::optional<Queue> parse_queue(std::string_view text) {
  for (int i = 0; i < 5; ++i) {
    if (text == kQueues[i]) return static_cast<Queue>(i);
  }
  return std::nullopt;
}

const char* to_string(CmdCode c) { return kCmds[static_cast<int>(c)]; }

std::optional<CmdCode> parse_cmd(std::string_view text) {
  for (int i = 0; i < static_cast<int>(CmdCode::kCount); ++i) {
    if (text == kCmds[i]) return static_cast<CmdCode>(i);
  }
  return std::nullopt;
}

bool is_mem_cmd(CmdCode c) { return c >= CmdCode::kMemRd; }

const char* to_string(SpecCmd c) { return kSpecCmds[static_cast<int>(c)]; }

std::optional<SpecCmd> parse_spec_cmd(std::string_view text) {
  for (int i = 0; i < 4; ++i) {
    if (text == kSpecCmds[i]) return static_cast<SpecCmd>(i);
  }
  return std::nullopt;
}

const char* to_string(SReg r) { return kSRegs[static_cast<int>(r)]; }

std::optional<SReg> parse_sreg(std::string_view text) {
  for (int i = 0; i < static_cast<int>(SReg::kCount); ++i) {
    if (text == kSRegs[i]) return static_cast<SReg>(i);
  }
  if (text == "next") return SReg::kNextState;
  return std::nullopt;
}

Instr canonical(const Instr& in) {
  Instr o;
  o.op = in.op;
  switch (format_of(in.op)) {
    case Format::kR:
      o.rd = in.rd;
      o.rs1 = in.rs1;
      o.rs2 = in.rs2;
      break;
    case Format::kI:
      o.rd = in.rd;
      o.rs1 = in.rs1;
      o.imm = in.imm;
      break;
    case Format::kMovi:
      o.rd = in.rd;
      o.imm = in.imm;
      break;
    case Format::kBr:
      o.pt = in.pt;
      o.rs1 = in.rs1;
      o.rs2 = in.rs2;
      o.target = in.target;
      break;
    case Format::kBri:
      o.pt = in.pt;
      o.rs1 = in.rs1;
      o.imm = in.imm & 0x7ff;
      o.target = in.target;
      break;
    case Format::kBi:
      o.pt = true;
      o.target = in.target;
      break;
    case Format::kFlag:
      o.f1 = in.f1;
      break;
    case Format::kFlag2:
      o.rd = in.rd;
      o.f1 = in.f1;
      o.f2 = in.f2;
      break;
    case Format::kFlag1:
      o.rd = in.rd;
      o.f1 = in.f1;
      break;
    case Format::kFlagBr:
      o.pt = in.pt;
      o.mask = in.mask & 0x3fff;
      o.target = in.target;
      break;
    case Format::kMovsg:
      o.rd = in.rd;
      o.sreg = in.sreg;
      break;
    case Format::kMovgs:
      o.rs1 = in.rs1;
      o.sreg = in.sreg;
      break;
    case Format::kMovis:
      o.sreg = in.sreg;
      o.imm = in.imm;
      break;
    case Format::kDir: {
      DirFields f = dir_fields(in.op);
      if (f.addr) o.addr = in.addr;
      if (f.lce) o.lce = in.lce;
      if (f.way) o.way = in.way;
      if (uses_gpr(in, f)) o.src = in.src;
      if (f.state) {
        o.state = in.state;
        if (in.state == StateSel::kImm) o.state_imm = in.state_imm;
      }
      if (f.rd) o.rd = in.rd;
      if (f.p) o.p = in.p;
      if (f.spec) o.spec = in.spec;
      if (f.cmd) o.cmd = in.cmd;
      if (f.queue) o.queue = in.queue;
      if (f.spec_cmd) o.spec_cmd = in.spec_cmd;
      if (f.qmask) o.qmask = in.qmask & 0x3f;
      break;
    }
    case Format::kNone:
      break;
  }
  return o;
}

uint32_t encode(const Instr& raw) {
  Instr in = canonical(raw);
  uint32_t w = bits(static_cast<uint32_t>(in.op), 31, 26);
  switch (format_of(in.op)) {
    case Format::kR:
      w |= bits(in.rd, 25, 23) | bits(in.rs1, 22, 20) | bits(in.rs2, 19, 17);
      break;
    case Format::kI:
      w |= bits(in.rd, 25, 23) | bits(in.rs1, 22, 20) | bits(in.imm, 15, 0);
      break;
    case Format::kMovi:
      w |= bits(in.rd, 25, 23) | bits(in.imm, 15, 0);
      break;
    case Format::kBr:
      w |= bits(in.pt, 25, 25) | bits(in.rs1, 24, 22) | bits(in.rs2, 21, 19) |
           bits(in.target, 7, 0);
      break;
    case Format::kBri:
      w |= bits(in.pt, 25, 25) | bits(in.rs1, 24, 22) | bits(in.imm, 18, 8) |
           bits(in.target, 7, 0);
      break;
    case Format::kBi:
      w |= bits(in.target, 7, 0);
      break;
    case Format::kFlag:
      w |= bits(in.f1, 3, 0);
      break;
    case Format::kFlag2:
      w |= bits(in.rd, 25, 23) | bits(in.f1, 7, 4) | bits(in.f2, 3, 0);
      break;
    case Format::kFlag1:
      w |= bits(in.rd, 25, 23) | bits(in.f1, 7, 4);
      break;
    case Format::kFlagBr:
      w |= bits(in.pt, 25, 25) | bits(in.mask, 21, 8) | bits(in.target, 7, 0);
      break;
    case Format::kMovsg:
      w |= bits(in.rd, 25, 23) | bits(static_cast<uint32_t>(in.sreg), 4, 0);
      break;
    case Format::kMovgs:
      w |= bits(in.rs1, 22, 20) | bits(static_cast<uint32_t>(in.sreg), 4, 0);
      break;
    case Format::kMovis:
      w |= bits(in.imm, 20, 5) | bits(static_cast<uint32_t>(in.sreg), 4, 0);
      break;
    case Format::kDir:
      if (in.op == Op::kWfq) {
        w |= bits(in.qmask, 5, 0);
        break;
      }
      w |= bits(static_cast<uint32_t>(in.addr), 25, 24) |
           bits(static_cast<uint32_t>(in.lce), 23, 22) |
           bits(static_cast<uint32_t>(in.way), 21, 20) | bits(in.src, 19, 17) |
           bits(static_cast<uint32_t>(in.state), 16, 15) |
           bits(in.state_imm, 14, 12) | bits(in.rd, 11, 9) |
           bits(in.p, 8, 8) | bits(in.spec, 7, 7) |
           bits(static_cast<uint32_t>(in.cmd), 6, 3);
      if (in.op == Op::kSpecq)
        w |= bits(static_cast<uint32_t>(in.spec_cmd), 2, 0);
      else
        w |= bits(static_cast<uint32_t>(in.queue), 2, 0);
      break;
    case Format::kNone:
      break;
  }
  return w;
}

Instr decode(uint32_t w) {
  auto illegal = [w](const char* why) {
    std::ostringstream os;
    os << "illegal instruction 0x" << std::hex << w << ": " << why;
    fail(ErrorCode::kIllegalInstruction, os.str());
  };
  uint32_t opc = field(w, 31, 26);
  if (opc >= static_cast<uint32_t>(Op::kCount)) illegal("unknown opcode");
  Instr in;
  in.op = static_cast<Op>(opc);
  switch (format_of(in.op)) {
    case Format::kR:
      in.rd = field(w, 25, 23);
      in.rs1 = field(w, 22, 20);
      in.rs2 = field(w, 19, 17);
      break;
    case Format::kI:
      in.rd = field(w, 25, 23);
      in.rs1 = field(w, 22, 20);
      in.imm = field(w, 15, 0);
      break;
    case Format::kMovi:
      in.rd = field(w, 25, 23);
      in.imm = field(w, 15, 0);
      break;
    case Format::kBr:
      in.pt = field(w, 25, 25);
      in.rs1 = field(w, 24, 22);
      in.rs2 = field(w, 21, 19);
      in.target = field(w, 7, 0);
      break;
    case Format::kBri:
      in.pt = field(w, 25, 25);
      in.rs1 = field(w, 24, 22);
      in.imm = field(w, 18, 8);
      in.target = field(w, 7, 0);
      break;
    case Format::kBi:
      in.pt = true;
      in.target = field(w, 7, 0);
      break;
    case Format::kFlag:
      in.f1 = field(w, 3, 0);
      break;
    case Format::kFlag2:
      in.rd = field(w, 25, 23);
      in.f1 = field(w, 7, 4);
      in.f2 = field(w, 3, 0);
      break;
    case Format::kFlag1:
      in.rd = field(w, 25, 23);
      in.f1 = field(w, 7, 4);
      break;
    case Format::kFlagBr:
      in.pt = field(w, 25, 25);
      in.mask = field(w, 21, 8);
      in.target = field(w, 7, 0);
      break;
    case Format::kMovsg:
      in.rd = field(w, 25, 23);
      in.sreg = static_cast<SReg>(field(w, 4, 0));
      break;
    case Format::kMovgs:
      in.rs1 = field(w, 22, 20);
      in.sreg = static_cast<SReg>(field(w, 4, 0));
      break;
    case Format::kMovis:
      in.imm = field(w, 20, 5);
      in.sreg = static_cast<SReg>(field(w, 4, 0));
      break;
    case Format::kDir:
      if (in.op == Op::kWfq) {
        in.qmask = field(w, 5, 0);
        break;
      }
      in.addr = static_cast<AddrSel>(field(w, 25, 24));
      in.lce = static_cast<LceSel>(field(w, 23, 22));
      in.way = static_cast<WaySel>(field(w, 21, 20));
      in.src = field(w, 19, 17);
      in.state = static_cast<StateSel>(field(w, 16, 15));
      in.state_imm = field(w, 14, 12);
      in.rd = field(w, 11, 9);
      in.p = field(w, 8, 8);
      in.spec = field(w, 7, 7);
      in.cmd = static_cast<CmdCode>(field(w, 6, 3));
      if (in.op == Op::kSpecq)
        in.spec_cmd = static_cast<SpecCmd>(field(w, 2, 0));
      else
        in.queue = static_cast<Queue>(field(w, 2, 0));
      break;
    case Format::kNone:
      break;
  }
  Format f = format_of(in.op);
  if ((f == Format::kFlag || f == Format::kFlag2 || f == Format::kFlag1) &&
      (in.f1 >= kNumFlags || in.f2 >= kNumFlags))
    illegal("flag index out of range");
  if ((f == Format::kMovsg || f == Format::kMovgs || f == Format::kMovis) &&
      in.sreg >= SReg::kCount)
    illegal("special register out of range");
  if (f == Format::kDir && in.op != Op::kWfq) {
    if (in.state == StateSel::kImm && in.state_imm >= kNumStates &&
        dir_fields(in.op).state)
      illegal("state immediate out of range");
    if (in.cmd >= CmdCode::kCount) illegal("command code out of range");
    if (in.op == Op::kSpecq) {
      if (static_cast<int>(in.spec_cmd) > 3) illegal("spec command out of range");
    } else if (static_cast<int>(in.queue) > 4) {
      illegal("queue out of range");
    }
  }
  if (encode(in) != w) illegal("reserved bits set");
  return canonical(in);
}

std::string disassemble(const Instr& raw) {
  return disassemble(raw, std::to_string(raw.target));
}

std::string disassemble(const Instr& raw, const std::string& target) {
  Instr in = canonical(raw);
  std::ostringstream os;
  os << mnemonic(in.op);
  auto reg = [](int r) { return "r" + std::to_string(r); };
  auto flag = [](int f) { return std::string(flag_name(static_cast<Flag>(f))); };
  switch (format_of(in.op)) {
    case Format::kR:
      os << " " << reg(in.rd) << ", " << reg(in.rs1) << ", " << reg(in.rs2);
      break;
    case Format::kI:
      os << " " << reg(in.rd) << ", " << reg(in.rs1) << ", " << in.imm;
      break;
    case Format::kMovi:
      os << " " << reg(in.rd) << ", " << in.imm;
      break;
    case Format::kBr:
      os << " " << reg(in.rs1) << ", " << reg(in.rs2) << ", " << target;
      if (in.pt) os << " pt";
      break;
    case Format::kBri:
      os << " " << reg(in.rs1) << ", " << in.imm << ", " << target;
      if (in.pt) os << " pt";
      break;
    case Format::kBi:
      os << " " << target;
      break;
    case Format::kFlag:
      os << " " << flag(in.f1);
      break;
    case Format::kFlag2:
      os << " " << flag(in.f1) << ", " << flag(in.f2) << ", " << reg(in.rd);
      break;
    case Format::kFlag1:
      os << " " << flag(in.f1) << ", " << reg(in.rd);
      break;
    case Format::kFlagBr:
      os << " " << target;
      for (int f = 0; f < kNumFlags; ++f) {
        if (in.mask & (1u << f)) os << " " << flag(f);
      }
      if (in.pt) os << " pt";
      break;
    case Format::kMovsg:
      os << " " << reg(in.rd) << ", " << to_string(in.sreg);
      break;
    case Format::kMovgs:
      os << " " << to_string(in.sreg) << ", " << reg(in.rs1);
      break;
    case Format::kMovis:
      os << " " << to_string(in.sreg) << ", ";
      if (state_valued(in.sreg) && in.imm < kNumStates)
        os << to_string(static_cast<CoherenceState>(in.imm));
      else
        os << in.imm;
      break;
    case Format::kDir: {
      DirFields f = dir_fields(in.op);
      if (in.op == Op::kWfq) {
        for (int q = 0; q < 5; ++q) {
          if (in.qmask & (1u << q)) os << " " << kQueues[q];
        }
        break;
      }
      if (in.op == Op::kSpecq) os << " " << to_string(in.spec_cmd);
      if (f.queue) os << " " << to_string(in.queue);
      if (f.cmd) os << " " << to_string(in.cmd);
      if (in.op == Op::kPoph) os << " " << reg(in.rd);
      if (f.addr) {
        static const char* n[] = {"req", "lru", "", "msg"};
        os << " addr="
           << (in.addr == AddrSel::kGpr ? reg(in.src)
                                        : n[static_cast<int>(in.addr)]);
      }
      if (f.lce) {
        static const char* n[] = {"req", "owner", "", "msg"};
        os << " lce="
           << (in.lce == LceSel::kGpr ? reg(in.src)
                                      : n[static_cast<int>(in.lce)]);
      }
      if (f.way) {
        static const char* n[] = {"req", "lru", "owner", ""};
        os << " way="
           << (in.way == WaySel::kGpr ? reg(in.src)
                                      : n[static_cast<int>(in.way)]);
      }
      if (f.state) os << " state=" << state_operand(in.state, in.state_imm);
      if (in.op == Op::kRde) os << " dst=" << reg(in.rd);
      if (in.op == Op::kWdp) os << " p=" << (in.p ? 1 : 0);
      if ((in.op == Op::kPushq || in.op == Op::kPopq) && in.p) os << " wp";
      if (in.op == Op::kPushq && in.spec) os << " spec";
      break;
    }
    case Format::kNone:
      break;
  }
  return os.str();
}

}  // namespace bedrock::ucode
