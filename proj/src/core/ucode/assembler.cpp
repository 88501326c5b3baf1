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

#include "bedrock/ucode/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include "bedrock/cce.hpp"
#include "bedrock/error.hpp"
#include "bedrock/protocol.hpp"

namespace bedrock::ucode {

namespace {

struct Token {
  std::string text;
  int col = 0;
};

struct PendingInstr {
  Instr instr;
  int line = 0;
  // Unresolved branch target, if any.
  std::optional<Token> target;
};

class ParseError {
 public:
  ParseError(int col, std::string msg) : col(col), msg(std::move(msg)) {}
  int col;
  std::string msg;
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
      continue;
    }
    size_t start = i;
    while (i < line.size() && line[i] != '#' && line[i] != ',' &&
           !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    out.push_back(Token{std::string(line.substr(start, i - start)),
                        static_cast<int>(start) + 1});
  }
  return out;
}

bool valid_label(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_' &&
      s[0] != '.')
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '.';
  });
}

std::optional<int64_t> parse_number(std::string_view s) {
  bool neg = false;
  if (!s.empty() && s[0] == '-') {
    neg = true;
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return neg ? -v : v;
}

class Operands {
 public:
  Operands(const std::vector<Token>& toks, size_t first, int mnemonic_col)
      : toks_(toks), i_(first), end_col_(mnemonic_col) {}

  bool done() const { return i_ >= toks_.size(); }
  const Token& peek() const { return toks_[i_]; }
  const Token& next(const char* what) {
    if (done()) {
      int col = toks_.empty() ? end_col_ : toks_.back().col;
      throw ParseError(col, std::string("missing operand: ") + what);
    }
    return toks_[i_++];
  }
  void expect_end() {
    if (!done()) throw ParseError(peek().col, "unexpected operand '" + peek().text + "'");
  }

 private:
  const std::vector<Token>& toks_;
  size_t i_;
  int end_col_;
};

uint8_t parse_gpr(const Token& t) {
  std::string s = lower(t.text);
  if (s.size() == 2 && s[0] == 'r' && s[1] >= '0' &&
      s[1] < '0' + kNumGprs)
    return static_cast<uint8_t>(s[1] - '0');
  throw ParseError(t.col, "expected register r0..r7, got '" + t.text + "'");
}

std::optional<uint8_t> gpr_of(std::string_view text) {
  std::string s = lower(text);
  if (s.size() == 2 && s[0] == 'r' && s[1] >= '0' && s[1] < '0' + kNumGprs)
    return static_cast<uint8_t>(s[1] - '0');
  return std::nullopt;
}

// Immediates accept numbers and coherence-state letters.
int64_t parse_imm(const Token& t, int64_t lo, int64_t hi) {
  std::optional<int64_t> v = parse_number(t.text);
  if (!v) {
    if (auto s = parse_state(t.text)) v = static_cast<int64_t>(*s);
  }
  if (!v) throw ParseError(t.col, "expected immediate, got '" + t.text + "'");
  if (*v < lo || *v > hi) {
    throw ParseError(t.col, "immediate " + t.text + " out of range [" +
                                std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
  }
  return *v;
}

uint8_t parse_flag_tok(const Token& t) {
  auto f = parse_flag(lower(t.text));
  if (!f) throw ParseError(t.col, "unknown flag '" + t.text + "'");
  return static_cast<uint8_t>(*f);
}

SReg parse_sreg_tok(const Token& t) {
  auto r = parse_sreg(lower(t.text));
  if (!r) throw ParseError(t.col, "unknown special register '" + t.text + "'");
  return *r;
}

Queue parse_queue_tok(const Token& t) {
  auto q = parse_queue(lower(t.text));
  if (!q) throw ParseError(t.col, "unknown queue '" + t.text + "'");
  return *q;
}

bool is_pt(const Token& t) { return lower(t.text) == "pt"; }

struct KeyValue {
  std::string key;
  std::string value;
  int col;
};

std::optional<KeyValue> split_kv(const Token& t) {
  auto eq = t.text.find('=');
  if (eq == std::string::npos) return std::nullopt;
  return KeyValue{lower(t.text.substr(0, eq)), t.text.substr(eq + 1), t.col};
}

// Parses the key=value operand block of directory and queue instructions.
class DirOperands {
 public:
  explicit DirOperands(Instr& in) : in_(in) {}

  void handle(const Token& t) {
    auto kv = split_kv(t);
    if (!kv) {
      std::string s = lower(t.text);
      if (s == "wp") {
        in_.p = true;
        return;
      }
      if (s == "spec") {
        in_.spec = true;
        return;
      }
      throw ParseError(t.col, "unexpected operand '" + t.text + "'");
    }
    const std::string& k = kv->key;
    std::string v = lower(kv->value);
    if (k == "addr") {
      if (v == "req") in_.addr = AddrSel::kReq;
      else if (v == "lru") in_.addr = AddrSel::kLru;
      else if (v == "msg") in_.addr = AddrSel::kMsg;
      else if (v == "gpr") in_.addr = AddrSel::kGpr;
      else set_gpr(kv->value, t.col, [&] { in_.addr = AddrSel::kGpr; });
    } else if (k == "lce") {
      if (v == "req") in_.lce = LceSel::kReq;
      else if (v == "owner") in_.lce = LceSel::kOwner;
      else if (v == "msg") in_.lce = LceSel::kMsg;
      else if (v == "gpr") in_.lce = LceSel::kGpr;
      else set_gpr(kv->value, t.col, [&] { in_.lce = LceSel::kGpr; });
    } else if (k == "way" || k == "lru_way") {
      if (v == "req") in_.way = WaySel::kReq;
      else if (v == "lru") in_.way = WaySel::kLru;
      else if (v == "owner") in_.way = WaySel::kOwner;
      else if (v == "gpr") in_.way = WaySel::kGpr;
      else set_gpr(kv->value, t.col, [&] { in_.way = WaySel::kGpr; });
    } else if (k == "src") {
      auto r = gpr_of(v);
      if (!r) throw ParseError(t.col, "src must be a register");
      claim_src(*r, t.col);
    } else if (k == "state") {
      if (v == "next") in_.state = StateSel::kNext;
      else if (v == "coh") in_.state = StateSel::kCoh;
      else if (v == "owner") in_.state = StateSel::kOwner;
      else if (auto s = parse_state(kv->value)) {
        in_.state = StateSel::kImm;
        in_.state_imm = static_cast<uint8_t>(*s);
      } else {
        throw ParseError(t.col, "bad state '" + kv->value + "'");
      }
    } else if (k == "p" || k == "wp" || k == "spec") {
      if (v != "0" && v != "1")
        throw ParseError(t.col, k + " must be 0 or 1");
      bool b = v == "1";
      if (k == "spec") in_.spec = b;
      else in_.p = b;
    } else if (k == "dst") {
      auto r = gpr_of(v);
      if (!r) throw ParseError(t.col, "dst must be a register");
      in_.rd = *r;
    } else {
      throw ParseError(t.col, "unknown operand key '" + kv->key + "'");
    }
  }

 private:
  template <typename F>
  void set_gpr(const std::string& v, int col, F select) {
    auto r = gpr_of(v);
    if (!r) throw ParseError(col, "bad select '" + v + "'");
    select();
    claim_src(*r, col);
  }

  void claim_src(uint8_t r, int col) {
    if (src_set_ && in_.src != r)
      throw ParseError(col, "operands name different source registers");
    in_.src = r;
    src_set_ = true;
  }

  Instr& in_;
  bool src_set_ = false;
};

// Parses one instruction (after pseudo-op expansion) from its tokens.
PendingInstr parse_instr(const std::vector<Token>& toks, size_t first,
                         int line) {
  const Token& mt = toks[first];
  std::string m = lower(mt.text);
  Operands ops(toks, first + 1, mt.col);
  PendingInstr out;
  out.line = line;
  Instr& in = out.instr;

  auto take_target = [&]() { out.target = ops.next("branch target"); };
  auto take_pt = [&]() {
    if (!ops.done() && is_pt(ops.peek())) {
      in.pt = true;
      ops.next("pt");
    }
  };

  // Pseudo-ops.
  if (m == "nop") {
    in.op = Op::kAddi;
    ops.expect_end();
    return out;
  }
  if (m == "mov") {
    in.op = Op::kAddi;
    in.rd = parse_gpr(ops.next("rd"));
    in.rs1 = parse_gpr(ops.next("rs"));
    ops.expect_end();
    return out;
  }
  if (m == "inc" || m == "dec") {
    in.op = m == "inc" ? Op::kAddi : Op::kSubi;
    in.rd = in.rs1 = parse_gpr(ops.next("rd"));
    in.imm = 1;
    ops.expect_end();
    return out;
  }
  if (m == "clm" || m == "stm") {
    in.op = Op::kMovis;
    in.sreg = SReg::kAutoFwd;
    in.imm = m == "stm" ? 1 : 0;
    ops.expect_end();
    return out;
  }
  if (m == "bz" || m == "bnz") {
    in.op = m == "bz" ? Op::kBeqi : Op::kBnei;
    in.rs1 = parse_gpr(ops.next("rs"));
    take_target();
    take_pt();
    ops.expect_end();
    return out;
  }
  if (m == "bgt" || m == "ble") {
    in.op = m == "bgt" ? Op::kBlt : Op::kBge;
    in.rs2 = parse_gpr(ops.next("rs1"));
    in.rs1 = parse_gpr(ops.next("rs2"));
    take_target();
    take_pt();
    ops.expect_end();
    return out;
  }
  if (m == "b") {
    in.op = Op::kBi;
    in.pt = true;
    take_target();
    ops.expect_end();
    return out;
  }

  auto op = parse_mnemonic(m);
  if (!op) throw ParseError(mt.col, "unknown instruction '" + mt.text + "'");
  in.op = *op;
  switch (format_of(in.op)) {
    case Format::kR:
      in.rd = parse_gpr(ops.next("rd"));
      in.rs1 = parse_gpr(ops.next("rs1"));
      in.rs2 = parse_gpr(ops.next("rs2"));
      break;
    case Format::kI:
      in.rd = parse_gpr(ops.next("rd"));
      in.rs1 = parse_gpr(ops.next("rs1"));
      in.imm = static_cast<uint16_t>(parse_imm(ops.next("imm"), 0, 0xffff));
      break;
    case Format::kMovi:
      in.rd = parse_gpr(ops.next("rd"));
      in.imm = static_cast<uint16_t>(parse_imm(ops.next("imm"), 0, 0xffff));
      break;
    case Format::kBr:
      in.rs1 = parse_gpr(ops.next("rs1"));
      in.rs2 = parse_gpr(ops.next("rs2"));
      take_target();
      take_pt();
      break;
    case Format::kBri:
      in.rs1 = parse_gpr(ops.next("rs1"));
      in.imm = static_cast<uint16_t>(parse_imm(ops.next("imm"), 0, 0x7ff));
      take_target();
      take_pt();
      break;
    case Format::kBi:
      in.pt = true;
      take_target();
      break;
    case Format::kFlag:
      in.f1 = parse_flag_tok(ops.next("flag"));
      break;
    case Format::kFlag2:
      in.f1 = parse_flag_tok(ops.next("flag"));
      in.f2 = parse_flag_tok(ops.next("flag"));
      in.rd = parse_gpr(ops.next("rd"));
      break;
    case Format::kFlag1:
      in.f1 = parse_flag_tok(ops.next("flag"));
      in.rd = parse_gpr(ops.next("rd"));
      break;
    case Format::kFlagBr: {
      take_target();
      bool any = false;
      while (!ops.done()) {
        const Token& t = ops.next("flag");
        if (is_pt(t)) {
          in.pt = true;
          break;
        }
        in.mask |= static_cast<uint16_t>(1u << parse_flag_tok(t));
        any = true;
      }
      if (!any) throw ParseError(mt.col, "flag branch needs at least one flag");
      break;
    }
    case Format::kMovsg:
      in.rd = parse_gpr(ops.next("rd"));
      in.sreg = parse_sreg_tok(ops.next("special register"));
      break;
    case Format::kMovgs:
      in.sreg = parse_sreg_tok(ops.next("special register"));
      in.rs1 = parse_gpr(ops.next("rs"));
      break;
    case Format::kMovis:
      in.sreg = parse_sreg_tok(ops.next("special register"));
      in.imm = static_cast<uint16_t>(parse_imm(ops.next("imm"), 0, 0xffff));
      break;
    case Format::kDir: {
      if (in.op == Op::kWfq) {
        while (!ops.done()) {
          Queue q = parse_queue_tok(ops.next("queue"));
          in.qmask |= static_cast<uint8_t>(1u << static_cast<int>(q));
        }
        if (!in.qmask) throw ParseError(mt.col, "wfq needs at least one queue");
        break;
      }
      if (in.op == Op::kPushq) {
        const Token& qt = ops.next("queue");
        in.queue = parse_queue_tok(qt);
        if (in.queue != Queue::kCmd && in.queue != Queue::kMemCmd)
          throw ParseError(qt.col, "pushq sends to cmd or memcmd");
        const Token& ct = ops.next("command");
        auto c = parse_cmd(lower(ct.text));
        if (!c) throw ParseError(ct.col, "unknown command '" + ct.text + "'");
        if (is_mem_cmd(*c) != (in.queue == Queue::kMemCmd))
          throw ParseError(ct.col, "command '" + ct.text + "' does not belong on queue " + qt.text);
        in.cmd = *c;
      } else if (in.op == Op::kPopq || in.op == Op::kPoph) {
        const Token& qt = ops.next("queue");
        in.queue = parse_queue_tok(qt);
        if (in.queue == Queue::kCmd || in.queue == Queue::kMemCmd)
          throw ParseError(qt.col, "cannot receive from a send queue");
        if (in.op == Op::kPoph) in.rd = parse_gpr(ops.next("rd"));
      } else if (in.op == Op::kSpecq) {
        const Token& st = ops.next("speculation command");
        auto c = parse_spec_cmd(lower(st.text));
        if (!c) throw ParseError(st.col, "unknown speculation command '" + st.text + "'");
        in.spec_cmd = *c;
      }
      DirOperands d(in);
      while (!ops.done()) d.handle(ops.next("operand"));
      break;
    }
    case Format::kNone:
      break;
  }
  ops.expect_end();
  return out;
}

}  // namespace

std::optional<int> Program::label(const std::string& name) const {
  auto it = labels.find(name);
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

std::vector<uint32_t> Program::words() const {
  std::vector<uint32_t> out;
  out.reserve(instrs.size());
  for (const Instr& in : instrs) out.push_back(encode(in));
  return out;
}

Program Program::from_words(const std::vector<uint32_t>& words) {
  Program p;
  for (uint32_t w : words) {
    p.instrs.push_back(decode(w));
    p.lines.push_back(0);
  }
  return p;
}

std::string Diagnostic::str() const {
  return std::to_string(line) + ":" + std::to_string(col) + ": " + message;
}

AssembleResult assemble(std::string_view source, int imem_size) {
  AssembleResult res;
  std::vector<PendingInstr> pending;
  std::map<std::string, int> labels;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= source.size()) {
    size_t nl = source.find('\n', pos);
    if (nl == std::string_view::npos) nl = source.size();
    std::string_view line = source.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    std::vector<Token> toks = tokenize(line);
    size_t first = 0;
    while (first < toks.size() && toks[first].text.size() > 1 &&
           toks[first].text.back() == ':') {
      std::string name = toks[first].text.substr(0, toks[first].text.size() - 1);
      if (!valid_label(name)) {
        res.diagnostics.push_back({line_no, toks[first].col, "bad label '" + name + "'"});
      } else if (labels.count(name)) {
        res.diagnostics.push_back({line_no, toks[first].col, "duplicate label '" + name + "'"});
      } else {
        labels[name] = static_cast<int>(pending.size());
      }
      ++first;
    }
    if (first >= toks.size()) {
      if (nl == source.size()) break;
      continue;
    }
    try {
      pending.push_back(parse_instr(toks, first, line_no));
    } catch (const ParseError& e) {
      res.diagnostics.push_back({line_no, e.col, e.msg});
    }
    if (nl == source.size()) break;
  }
  for (PendingInstr& p : pending) {
    if (!p.target) continue;
    auto it = labels.find(p.target->text);
    if (it != labels.end()) {
      p.instr.target = static_cast<uint8_t>(it->second);
      continue;
    }
    if (auto n = parse_number(p.target->text); n && *n >= 0 && *n < imem_size) {
      p.instr.target = static_cast<uint8_t>(*n);
      continue;
    }
    res.diagnostics.push_back(
        {p.line, p.target->col, "unresolved label '" + p.target->text + "'"});
  }
  if (static_cast<int>(pending.size()) > imem_size) {
    res.too_large = true;
    res.diagnostics.push_back(
        {line_no, 1, "program has " + std::to_string(pending.size()) +
                         " instructions; instruction memory holds " +
                         std::to_string(imem_size)});
  }
  for (const auto& [name, pc] : labels) {
    if (pc >= imem_size && !res.too_large) {
      res.diagnostics.push_back({line_no, 1, "label '" + name + "' is past the end of instruction memory"});
    }
  }
  if (!res.diagnostics.empty()) {
    std::stable_sort(res.diagnostics.begin(), res.diagnostics.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                       return a.line != b.line ? a.line < b.line : a.col < b.col;
                     });
    return res;
  }
  Program prog;
  for (const PendingInstr& p : pending) {
    prog.instrs.push_back(canonical(p.instr));
    prog.lines.push_back(p.line);
  }
  prog.labels = std::move(labels);
  res.program = std::move(prog);
  return res;
}

Program assemble_or_throw(std::string_view source, int imem_size) {
  AssembleResult r = assemble(source, imem_size);
  if (r.ok()) return std::move(*r.program);
  std::string msg;
  for (size_t i = 0; i < r.diagnostics.size() && i < 8; ++i) {
    if (i) msg += "; ";
    msg += r.diagnostics[i].str();
  }
  fail(r.too_large ? ErrorCode::kProgramTooLarge : ErrorCode::kParse, msg);
}

std::string disassemble(const Program& program) {
  std::map<int, std::string> names;
  std::set<std::string> used;
  for (const auto& [name, pc] : program.labels) {
    if (!names.count(pc)) {
      names[pc] = name;
      used.insert(name);
    }
  }
  for (const Instr& in : program.instrs) {
    if (!is_branch(in.op) || names.count(in.target)) continue;
    std::string n = "L" + std::to_string(in.target);
    while (used.count(n)) n += "_";
    names[in.target] = n;
    used.insert(n);
  }
  std::ostringstream os;
  for (int pc = 0; pc < program.size(); ++pc) {
    if (auto it = names.find(pc); it != names.end()) os << it->second << ":\n";
    const Instr& in = program.instrs[pc];
    std::string text = is_branch(in.op) ? disassemble(in, names.at(in.target))
                                        : disassemble(in);
    os << "  " << text << "\n";
  }
  // Labels that point one past the last instruction.
  if (auto it = names.find(program.size()); it != names.end())
    os << it->second << ":\n";
  return os.str();
}

namespace {
constexpr char kMagic[4] = {'B', 'R', 'U', 'C'};
constexpr uint16_t kBinaryVersion = 1;

void put16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t get32(const std::vector<uint8_t>& b, size_t at) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[at + i]) << (8 * i);
  return v;
}
}  // namespace

std::vector<uint8_t> write_binary(const Program& program) {
  std::vector<uint8_t> out(kMagic, kMagic + 4);
  put16(out, kBinaryVersion);
  put16(out, 0);
  put32(out, static_cast<uint32_t>(program.size()));
  for (uint32_t w : program.words()) put32(out, w);
  return out;
}

bool looks_binary(const std::vector<uint8_t>& bytes) {
  return bytes.size() >= 4 && std::equal(kMagic, kMagic + 4, bytes.begin());
}

Program read_binary(const std::vector<uint8_t>& bytes, int imem_size) {
  if (bytes.size() < 12 || !looks_binary(bytes))
    fail(ErrorCode::kParse, "not a microcode binary");
  uint16_t version = static_cast<uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kBinaryVersion)
    fail(ErrorCode::kParse, "unsupported microcode binary version " +
                                std::to_string(version));
  uint32_t count = get32(bytes, 8);
  if (bytes.size() != 12 + 4ull * count)
    fail(ErrorCode::kParse, "microcode binary length does not match its count");
  if (count > static_cast<uint32_t>(imem_size))
    fail(ErrorCode::kProgramTooLarge,
         "binary holds " + std::to_string(count) + " instructions");
  std::vector<uint32_t> words;
  for (uint32_t i = 0; i < count; ++i) words.push_back(get32(bytes, 12 + 4 * i));
  return Program::from_words(words);
}

}  // namespace bedrock::ucode
