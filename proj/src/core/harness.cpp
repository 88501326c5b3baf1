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

#include "bedrock/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "bedrock/error.hpp"

namespace bedrock {

namespace {

std::string hex(uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view s) {
  size_t h = s.find('#');
  return h == std::string_view::npos ? s : s.substr(0, h);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void parse_error(int line, const std::string& msg) {
  fail(ErrorCode::kParse, "line " + std::to_string(line) + ": " + msg);
}

std::optional<uint64_t> parse_uint(std::string_view s, int base) {
  if (base == 16 && s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X'))
    s.remove_prefix(2);
  if (s.empty()) return std::nullopt;
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

// ---- Config ----

void set_config_key(SimConfig& cfg, std::string_view key_text,
                    std::string_view val) {
  std::string key = lower(trim(key_text));
  val = trim(val);
  auto bad = [&](const std::string& msg) { fail(ErrorCode::kParse, msg); };
  auto num = [&]() -> uint64_t {
    auto v = parse_uint(val, 10);
    if (!v) v = parse_uint(val, 16);
    if (!v) bad("bad number for " + key);
    return *v;
  };
  auto as_int = [&]() -> int {
    uint64_t v = num();
    if (v > 1'000'000'000) bad(key + " out of range");
    return static_cast<int>(v);
  };
  auto as_bool = [&]() -> bool {
    std::string v = lower(val);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad(key + " must be true or false");
    return false;
  };
  if (key == "cores") cfg.cores = as_int();
  else if (key == "sets") cfg.geometry.sets = as_int();
  else if (key == "assoc") cfg.geometry.assoc = as_int();
  else if (key == "block_bytes") cfg.geometry.block_bytes = as_int();
  else if (key == "beat_bytes") cfg.beat_bytes = as_int();
  else if (key == "mem_latency") cfg.mem_latency = as_int();
  else if (key == "net_latency") cfg.net_latency = as_int();
  else if (key == "seed") cfg.seed = num();
  else if (key == "num_cces") cfg.num_cces = as_int();
  else if (key == "mem_credits") cfg.mem_credits = as_int();
  else if (key == "tag_sets_per_row") cfg.tag_sets_per_row = as_int();
  else if (key == "max_cycles") cfg.max_cycles = num();
  else if (key == "watchdog") cfg.watchdog = num();
  else if (key == "ucode") cfg.ucode_path = std::string(val);
  else if (key == "memory_image") cfg.memory_image = std::string(val);
  else if (key == "random_permute") cfg.random_permute = as_bool();
  else if (key == "engine") {
    std::string v = lower(val);
    if (v == "fsm") cfg.engine = EngineKind::kFsm;
    else if (v == "ucode") cfg.engine = EngineKind::kUcode;
    else bad("engine must be fsm or ucode");
  } else if (key == "protocol") {
    auto p = parse_protocol(lower(val));
    if (!p) bad("protocol must be moesif or mesi");
    cfg.protocol = *p;
  } else {
    bad("unknown key '" + key + "'");
  }
}

SimConfig parse_config(std::string_view text) {
  SimConfig cfg;
  int line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos) parse_error(line_no, "expected key = value");
    try {
      set_config_key(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      parse_error(line_no, e.what());
    }
  }
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::string& path) {
  return parse_config(read_file(path));
}

std::string format_config(const SimConfig& c) {
  std::ostringstream os;
  os << "cores = " << c.cores << "\n"
     << "sets = " << c.geometry.sets << "\n"
     << "assoc = " << c.geometry.assoc << "\n"
     << "block_bytes = " << c.geometry.block_bytes << "\n"
     << "beat_bytes = " << c.beat_bytes << "\n"
     << "engine = " << to_string(c.engine) << "\n";
  if (!c.ucode_path.empty()) os << "ucode = " << c.ucode_path << "\n";
  os << "protocol = " << (c.protocol == Protocol::kMesi ? "mesi" : "moesif")
     << "\n"
     << "mem_latency = " << c.mem_latency << "\n"
     << "net_latency = " << c.net_latency << "\n"
     << "seed = " << c.seed << "\n"
     << "num_cces = " << c.num_cces << "\n"
     << "mem_credits = " << c.mem_credits << "\n"
     << "tag_sets_per_row = " << c.tag_sets_per_row << "\n"
     << "random_permute = " << (c.random_permute ? "true" : "false") << "\n"
     << "max_cycles = " << c.max_cycles << "\n"
     << "watchdog = " << c.watchdog << "\n";
  if (!c.memory_image.empty()) os << "memory_image = " << c.memory_image << "\n";
  return os.str();
}

// ---- Traces ----

namespace {

struct TraceName {
  TraceKind kind;
  const char* name;
};
constexpr TraceName kTraceNames[] = {
    {TraceKind::kLd, "LD"},         {TraceKind::kSt, "ST"},
    {TraceKind::kLdu, "LDU"},       {TraceKind::kStu, "STU"},
    {TraceKind::kAmoAdd, "AMOADD"}, {TraceKind::kAmoSwap, "AMOSWAP"},
    {TraceKind::kLr, "LR"},         {TraceKind::kSc, "SC"},
    {TraceKind::kFence, "FENCE"},
};

bool has_data(TraceKind k) {
  return k == TraceKind::kSt || k == TraceKind::kStu ||
         k == TraceKind::kAmoAdd || k == TraceKind::kAmoSwap ||
         k == TraceKind::kSc;
}

CpuOp cpu_op(TraceKind k) {
  switch (k) {
    case TraceKind::kLd: return CpuOp::kLoad;
    case TraceKind::kSt: return CpuOp::kStore;
    case TraceKind::kLdu: return CpuOp::kUncachedLoad;
    case TraceKind::kStu: return CpuOp::kUncachedStore;
    case TraceKind::kAmoAdd: return CpuOp::kAmoAdd;
    case TraceKind::kAmoSwap: return CpuOp::kAmoSwap;
    case TraceKind::kLr: return CpuOp::kLr;
    case TraceKind::kSc: return CpuOp::kSc;
    case TraceKind::kFence: break;
  }
  fail(ErrorCode::kInternal, "FENCE has no CPU operation");
}

}  // namespace

const char* to_string(TraceKind k) {
  for (const auto& n : kTraceNames)
    if (n.kind == k) return n.name;
  return "?";
}

std::vector<TraceOp> parse_trace(std::string_view text, int num_lces) {
  std::vector<TraceOp> out;
  int line_no = 0;
  const int cores = num_lces / 2;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    auto tok = tokens(strip_comment(raw));
    if (tok.empty()) continue;
    TraceOp op;
    auto lce = parse_uint(tok[0], 10);
    if (!lce || *lce >= static_cast<uint64_t>(num_lces))
      parse_error(line_no, "LCE id must be in [0, " + std::to_string(num_lces) + ")");
    op.lce = static_cast<int>(*lce);
    if (tok.size() < 2) parse_error(line_no, "missing operation");
    std::string opname(tok[1]);
    for (char& c : opname) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    size_t dot = opname.find('.');
    std::string base = opname.substr(0, dot);
    bool found = false;
    for (const auto& n : kTraceNames) {
      if (base == n.name) {
        op.op = n.kind;
        found = true;
      }
    }
    if (!found) parse_error(line_no, "unknown operation '" + std::string(tok[1]) + "'");
    if (dot != std::string::npos) {
      auto sz = parse_uint(std::string_view(opname).substr(dot + 1), 10);
      if (!sz || (*sz != 1 && *sz != 2 && *sz != 4 && *sz != 8))
        parse_error(line_no, "size must be 1, 2, 4 or 8");
      op.size = static_cast<int>(*sz);
    }
    if (op.op == TraceKind::kFence) {
      if (tok.size() != 2) parse_error(line_no, "FENCE takes no operands");
      out.push_back(op);
      continue;
    }
    size_t want = has_data(op.op) ? 4 : 3;
    if (tok.size() != want)
      parse_error(line_no, std::string(to_string(op.op)) +
                               (want == 4 ? " takes an address and data"
                                          : " takes an address"));
    auto addr = parse_uint(tok[2], 16);
    if (!addr) parse_error(line_no, "bad hex address");
    op.addr = *addr;
    if (op.addr % op.size != 0) parse_error(line_no, "address not aligned to size");
    if (want == 4) {
      auto d = parse_uint(tok[3], 16);
      if (!d) parse_error(line_no, "bad hex data");
      op.data = *d;
    }
    if (op.lce >= cores && op.op != TraceKind::kLd)
      parse_error(line_no, "instruction-cache LCEs accept LD only");
    out.push_back(op);
  }
  return out;
}

std::vector<TraceOp> load_trace(const std::string& path, int num_lces) {
  return parse_trace(read_file(path), num_lces);
}

std::string format_trace(const std::vector<TraceOp>& trace) {
  std::ostringstream os;
  for (const TraceOp& op : trace) {
    os << op.lce << " " << to_string(op.op);
    if (op.op != TraceKind::kFence) {
      if (op.size != 8) os << "." << op.size;
      os << " " << hex(op.addr);
      if (has_data(op.op)) os << " " << hex(op.data);
    }
    os << "\n";
  }
  return os.str();
}

// ---- Trace execution ----

Snapshot snapshot(const System& sys) {
  Snapshot s;
  s.memory = sys.memory().snapshot();
  const Geometry& g = sys.config().geometry;
  WayGroupMap map{sys.config().num_cces};
  for (int id = 0; id < sys.num_lces(); ++id) {
    for (int set = 0; set < g.sets; ++set) {
      const CoherenceEngine& cce = sys.cce(map.cce_of(set));
      for (int way = 0; way < g.assoc; ++way) {
        const CacheLine& l = sys.lce(id).line(set, way);
        if (l.state != CoherenceState::I)
          s.lines.push_back(LineSnapshot{id, set, way, l.tag, l.state, l.data});
        const TagSetEntry& e = cce.directory().entry(id, set, way);
        if (e.state != CoherenceState::I)
          s.directory.push_back(DirSnapshot{id, set, way, e.tag, e.state});
      }
    }
  }
  return s;
}

std::vector<Violation> way_group_serial(
    const System& sys, const std::vector<std::vector<uint64_t>>& miss_done) {
  struct Interval {
    uint64_t admit;
    uint64_t done;
    int lce;
    uint64_t addr;
  };
  std::vector<Violation> out;
  const Geometry& g = sys.config().geometry;
  std::vector<std::vector<const TransactionRecord*>> per_lce(sys.num_lces());
  for (int k = 0; k < sys.num_cces(); ++k) {
    for (const TransactionRecord& r : sys.cce(k).transactions()) {
      if (r.address_class != AddressClass::kCacheableCoherent) continue;
      if (!r.admit_cycle) continue;
      per_lce.at(r.req_lce).push_back(&r);
    }
  }
  std::map<int, std::vector<Interval>> groups;
  for (int id = 0; id < sys.num_lces(); ++id) {
    auto& recs = per_lce[id];
    std::stable_sort(recs.begin(), recs.end(), [](auto* a, auto* b) {
      return *a->admit_cycle < *b->admit_cycle;
    });
    const auto& done = id < static_cast<int>(miss_done.size())
                           ? miss_done[id]
                           : std::vector<uint64_t>{};
    if (recs.size() != done.size()) {
      out.push_back(Violation{sys.now(), "WayGroupSerial", -1,
                              "LCE " + std::to_string(id) + " completed " +
                                  std::to_string(done.size()) +
                                  " misses but " + std::to_string(recs.size()) +
                                  " transactions were admitted"});
      continue;
    }
    for (size_t i = 0; i < recs.size(); ++i) {
      groups[g.set_of(recs[i]->addr)].push_back(
          Interval{*recs[i]->admit_cycle, done[i], id, recs[i]->addr});
    }
  }
  for (auto& [wg, iv] : groups) {
    std::stable_sort(iv.begin(), iv.end(),
                     [](const Interval& a, const Interval& b) {
                       return a.admit < b.admit;
                     });
    for (size_t i = 1; i < iv.size(); ++i) {
      if (iv[i].admit <= iv[i - 1].done) {
        out.push_back(Violation{
            iv[i].admit, "WayGroupSerial", wg,
            "LCE " + std::to_string(iv[i].lce) + " request for " +
                hex(iv[i].addr) + " admitted while LCE " +
                std::to_string(iv[i - 1].lce) + " request for " +
                hex(iv[i - 1].addr) + " was active"});
      }
    }
  }
  return out;
}

namespace {

[[noreturn]] void abort_violation(const Violation& v) {
  fail(ErrorCode::kMonitorViolation,
       v.invariant + " violation at cycle " + std::to_string(v.cycle) +
           ", way group " + std::to_string(v.way_group) + ": " + v.what);
}

}  // namespace

RunResult run_trace(const SimConfig& cfg, const std::vector<TraceOp>& trace,
                    const RunOptions& opts) {
  System sys(cfg);
  if (!cfg.memory_image.empty()) {
    sys.memory().load_image_file(cfg.memory_image);
    sys.monitor().seed_from(sys.memory());
  }
  const int nl = sys.num_lces();
  const Geometry& g = cfg.geometry;
  for (size_t i = 0; i < trace.size(); ++i) {
    const TraceOp& op = trace[i];
    if (op.lce < 0 || op.lce >= nl)
      fail(ErrorCode::kInvalidArgument,
           "trace op " + std::to_string(i) + " names LCE " + std::to_string(op.lce));
  }

  RunResult res;
  std::vector<std::deque<size_t>> queues(nl);
  for (size_t i = 0; i < trace.size(); ++i) queues[trace[i].lce].push_back(i);
  std::vector<std::optional<size_t>> outstanding(nl);
  std::vector<bool> cacheable_miss(trace.size(), false);
  std::map<int, int> wg_inflight;
  std::vector<std::vector<uint64_t>> miss_done(nl);
  size_t done = 0;
  size_t next = 0;

  auto record = [&](int lce, const CpuCompletion& c) {
    size_t idx = c.id;
    bool miss = outstanding[lce] && *outstanding[lce] == idx;
    if (miss) {
      outstanding[lce].reset();
      if (--wg_inflight[g.set_of(trace[idx].addr)] == 0)
        wg_inflight.erase(g.set_of(trace[idx].addr));
      if (cacheable_miss[idx]) miss_done[lce].push_back(c.cycle);
    }
    res.completions.push_back(CompletedOp{idx, c.cycle, c.value, miss});
    ++done;
  };
  auto collect = [&] {
    for (int id = 0; id < nl; ++id)
      for (const CpuCompletion& c : sys.lce(id).take_completions()) record(id, c);
  };
  auto issue = [&](size_t idx) {
    const TraceOp& op = trace[idx];
    if (op.op == TraceKind::kFence) {
      res.completions.push_back(CompletedOp{idx, sys.now(), 0, false});
      ++done;
      return;
    }
    Lce& lce = sys.lce(op.lce);
    CpuRequest req{cpu_op(op.op), op.addr, op.size, op.data, idx};
    AccessResult a = lce.access(req, sys.now());
    ++res.stats.ops;
    if (a.status == AccessStatus::kMissIssued) {
      ++res.stats.misses;
      outstanding[op.lce] = idx;
      ++wg_inflight[g.set_of(op.addr)];
      cacheable_miss[idx] = op.op != TraceKind::kLdu &&
                            op.op != TraceKind::kStu &&
                            cfg.regions.cacheable(op.addr);
    } else {
      ++res.stats.hits;
    }
    for (const CpuCompletion& c : lce.take_completions()) record(op.lce, c);
  };
  auto dispatch = [&] {
    if (opts.dispatch == Dispatch::kFree) {
      for (int id = 0; id < nl; ++id) {
        if (queues[id].empty() || sys.lce(id).busy()) continue;
        size_t idx = queues[id].front();
        queues[id].pop_front();
        issue(idx);
      }
      return;
    }
    std::vector<bool> used(nl, false);
    while (next < trace.size()) {
      const TraceOp& op = trace[next];
      if (used[op.lce] || sys.lce(op.lce).busy()) break;
      if (op.op != TraceKind::kFence && wg_inflight.count(g.set_of(op.addr)))
        break;
      used[op.lce] = true;
      issue(next++);
    }
  };
  size_t seen_violations = 0;
  auto check = [&] {
    const auto& v = sys.monitor().violations();
    if (opts.abort_on_violation && v.size() > seen_violations)
      abort_violation(v[seen_violations]);
    seen_violations = v.size();
  };

  uint64_t last_sent = sys.network().total_sent();
  size_t last_done = 0;
  uint64_t quiet = 0;
  while (true) {
    dispatch();
    if (done == trace.size()) break;
    sys.tick();
    check();
    collect();
    if (done != last_done || sys.network().total_sent() != last_sent) {
      last_done = done;
      last_sent = sys.network().total_sent();
      quiet = 0;
    } else if (++quiet > cfg.watchdog || sys.now() > cfg.max_cycles) {
      fail(ErrorCode::kDeadlock, "trace stalled at cycle " +
                                     std::to_string(sys.now()) + " with " +
                                     std::to_string(trace.size() - done) +
                                     " ops outstanding");
    }
  }
  sys.drain();
  check();
  collect();

  res.violations = sys.monitor().violations();
  for (const Violation& v : way_group_serial(sys, miss_done)) {
    if (opts.abort_on_violation) abort_violation(v);
    res.violations.push_back(v);
  }
  res.checked_loads = sys.monitor().checked_loads();
  res.snapshot = snapshot(sys);

  RunStats& st = res.stats;
  st.cycles = sys.now();
  st.messages = sys.network().total_sent();
  for (int k = 0; k < sys.num_cces(); ++k) {
    const CoherenceEngine& c = sys.cce(k);
    const EngineStats& e = c.stats();
    st.transactions += e.transactions;
    st.busy_cycles += e.busy_cycles;
    st.stall_cycles += e.stall_cycles;
    st.invalidations += e.invalidations;
    st.transfers += e.transfers;
    st.upgrades += e.upgrades;
    st.replacements += e.replacements;
    for (const TransactionRecord& r : c.transactions()) {
      ClassOccupancy& o = st.by_class[to_string(r.request)];
      ++o.count;
      o.busy_cycles += r.busy_cycles;
    }
  }
  return res;
}

std::string format_report(const RunResult& r) {
  std::ostringstream os;
  const RunStats& s = r.stats;
  os << "cycles: " << s.cycles << "\n"
     << "ops: " << s.ops << "\n"
     << "hits: " << s.hits << "\n"
     << "misses: " << s.misses << "\n"
     << "messages: " << s.messages << "\n"
     << "transactions: " << s.transactions << "\n"
     << "busy_cycles: " << s.busy_cycles << "\n"
     << "stall_cycles: " << s.stall_cycles << "\n"
     << "invalidations: " << s.invalidations << "\n"
     << "transfers: " << s.transfers << "\n"
     << "upgrades: " << s.upgrades << "\n"
     << "replacements: " << s.replacements << "\n";
  for (const auto& [name, o] : s.by_class) {
    os << "class " << name << ": count=" << o.count
       << " busy=" << o.busy_cycles << "\n";
  }
  for (const char* inv : {"SWMR", "SingleOwner", "DataValue", "WayGroupSerial"}) {
    size_t n = 0;
    for (const Violation& v : r.violations) n += v.invariant == inv;
    os << "monitor " << inv << ": " << (n ? std::to_string(n) + " violations" : "ok")
       << "\n";
  }
  for (const Violation& v : r.violations) {
    os << "violation " << v.invariant << " cycle=" << v.cycle
       << " way_group=" << v.way_group << ": " << v.what << "\n";
  }
  return os.str();
}

// ---- Engine equivalence ----

double EquivalenceReport::ratio() const {
  if (fsm_cycles == 0) return 1.0;
  return static_cast<double>(ucode_cycles) / static_cast<double>(fsm_cycles);
}

EquivalenceReport compare_engines(const SimConfig& cfg,
                                  const std::vector<TraceOp>& trace) {
  RunOptions opts;
  opts.dispatch = Dispatch::kOrdered;
  opts.abort_on_violation = false;
  SimConfig a = cfg, b = cfg;
  a.engine = EngineKind::kFsm;
  b.engine = EngineKind::kUcode;
  RunResult ra = run_trace(a, trace, opts);
  RunResult rb = run_trace(b, trace, opts);
  EquivalenceReport rep;
  rep.fsm_cycles = ra.stats.cycles;
  rep.ucode_cycles = rb.stats.cycles;
  rep.fsm_violations = ra.violations.size();
  rep.ucode_violations = rb.violations.size();
  auto note = [&](std::string s) {
    if (rep.differences.size() < 8) rep.differences.push_back(std::move(s));
  };
  if (ra.snapshot.memory != rb.snapshot.memory) {
    rep.memory_equal = false;
    note("memory images differ");
  }
  const auto& la = ra.snapshot.lines;
  const auto& lb = rb.snapshot.lines;
  if (la != lb) {
    rep.caches_equal = false;
    size_t n = std::min(la.size(), lb.size());
    for (size_t i = 0; i < n; ++i) {
      if (!(la[i] == lb[i])) {
        note("cache line differs: LCE " + std::to_string(la[i].lce) + " set " +
             std::to_string(la[i].set) + " way " + std::to_string(la[i].way));
        break;
      }
    }
    if (la.size() != lb.size()) note("valid line counts differ");
  }
  const auto& da = ra.snapshot.directory;
  const auto& db = rb.snapshot.directory;
  auto same_dir = [](const DirSnapshot& x, const DirSnapshot& y) {
    auto norm = [](CoherenceState s) {
      return s == CoherenceState::M ? CoherenceState::E : s;
    };
    return x.lce == y.lce && x.set == y.set && x.way == y.way &&
           x.tag == y.tag && norm(x.state) == norm(y.state);
  };
  if (da.size() != db.size() ||
      !std::equal(da.begin(), da.end(), db.begin(), same_dir)) {
    rep.directory_equal = false;
    note("directory state differs");
  }
  return rep;
}

std::string format_report(const EquivalenceReport& r) {
  std::ostringstream os;
  os << "memory: " << (r.memory_equal ? "equal" : "different") << "\n"
     << "caches: " << (r.caches_equal ? "equal" : "different") << "\n"
     << "directory: " << (r.directory_equal ? "equal" : "different") << "\n"
     << "fsm_cycles: " << r.fsm_cycles << "\n"
     << "ucode_cycles: " << r.ucode_cycles << "\n"
     << "ratio: " << std::fixed << std::setprecision(4) << r.ratio() << "\n"
     << "fsm_violations: " << r.fsm_violations << "\n"
     << "ucode_violations: " << r.ucode_violations << "\n";
  for (const std::string& d : r.differences) os << "difference: " << d << "\n";
  os << "verdict: " << (r.equivalent() ? "equivalent" : "NOT equivalent") << "\n";
  return os.str();
}

// ---- Random workloads ----

std::vector<TraceOp> random_workload(uint64_t seed, const WorkloadParams& p) {
  if (p.cores < 1 || p.footprint < 1 || p.private_blocks < 1 ||
      p.block_bytes < 8)
    fail(ErrorCode::kInvalidArgument, "bad workload parameters");
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto pick = [&](uint64_t n) { return rng() % n; };
  const uint64_t bb = static_cast<uint64_t>(p.block_bytes);
  std::vector<TraceOp> out;
  out.reserve(p.ops);
  for (size_t i = 0; i < p.ops; ++i) {
    TraceOp op;
    int core = static_cast<int>(pick(p.cores));
    op.lce = core;
    uint64_t block;
    if (uniform() < p.sharing) {
      block = p.base + pick(p.footprint) * bb;
    } else {
      block = p.base + static_cast<uint64_t>(p.footprint) * bb +
              (static_cast<uint64_t>(core) * p.private_blocks +
               pick(p.private_blocks)) * bb;
    }
    static constexpr int kSizes[] = {1, 2, 4, 8};
    op.size = kSizes[pick(4)];
    op.addr = block + pick(bb / op.size) * op.size;
    double kind = uniform();
    if (kind < p.uncached_ratio) {
      op.op = pick(2) ? TraceKind::kStu : TraceKind::kLdu;
      if (pick(2)) op.addr = p.io_base + pick(p.footprint) * 8;
      op.size = 8;
      op.addr &= ~uint64_t{7};
    } else if (kind < p.uncached_ratio + p.ifetch_ratio) {
      op.lce = p.cores + core;
      op.op = TraceKind::kLd;
      op.size = 4;
      op.addr &= ~uint64_t{3};
    } else if (kind < p.uncached_ratio + p.ifetch_ratio + p.atomic_ratio) {
      static constexpr TraceKind kAtomics[] = {
          TraceKind::kAmoAdd, TraceKind::kAmoSwap, TraceKind::kLr,
          TraceKind::kSc};
      op.op = kAtomics[pick(4)];
      op.size = pick(2) ? 8 : 4;
      op.addr &= ~static_cast<uint64_t>(op.size - 1);
    } else if (uniform() < p.write_ratio) {
      op.op = TraceKind::kSt;
    } else {
      op.op = TraceKind::kLd;
    }
    if (has_data(op.op)) {
      uint64_t d = rng();
      op.data = op.size == 8 ? d : d & ((uint64_t{1} << (8 * op.size)) - 1);
    }
    out.push_back(op);
  }
  return out;
}

// ---- Occupancy ----

namespace {

struct RowInfo {
  OccRow row;
  const char* name;
  const char* request;
  int fsm_base;
  int ucode_base;
  // Multiplier of S in the extra term: extra = 2 * (S - s_offset) when set.
  bool s_term;
  int s_offset;
  bool n_term;  // adds N
};

// Constant parts of the occupancy table; every row also adds C/2.
constexpr RowInfo kRows[] = {
    {OccRow::kReadExclII, "read_excl_i_i", "Read", 8, 12, false, 0, false},
    {OccRow::kReadNeII, "read_ne_i_i", "Read-NE", 8, 26, false, 0, false},
    {OccRow::kReadIS, "read_i_s", "Read", 8, 26, false, 0, false},
    {OccRow::kReadIEClean, "read_i_e_clean", "Read", 9, 36, false, 0, false},
    {OccRow::kReadIEDirty, "read_i_e_dirty", "Read", 9, 35, false, 0, true},
    {OccRow::kReadIM, "read_i_m", "Read", 9, 32, false, 0, false},
    {OccRow::kReadIOF, "read_i_of", "Read", 9, 27, false, 0, false},
    {OccRow::kWriteII, "write_i_i", "Write", 8, 23, false, 0, false},
    {OccRow::kWriteIS, "write_i_s", "Write", 8, 24, true, 0, false},
    {OccRow::kWriteIEM, "write_i_em", "Write", 9, 27, false, 0, false},
    {OccRow::kWriteIOF, "write_i_of", "Write", 9, 28, true, 0, false},
    {OccRow::kWriteSS, "write_s_s", "Write", 9, 24, true, 1, false},
    {OccRow::kWriteSOF, "write_s_of", "Write", 9, 30, true, 0, false},
    {OccRow::kWriteOFOF, "write_of_of", "Write", 9, 24, true, 0, false},
};

const RowInfo& info(OccRow r) { return kRows[static_cast<int>(r)]; }

bool requester_invalid(OccRow r) {
  return r != OccRow::kWriteSS && r != OccRow::kWriteSOF &&
         r != OccRow::kWriteOFOF;
}

std::vector<CoherenceState> variants(OccRow r) {
  switch (r) {
    case OccRow::kWriteIEM:
      return {CoherenceState::E, CoherenceState::M};
    case OccRow::kReadIOF:
    case OccRow::kWriteIOF:
    case OccRow::kWriteSOF:
    case OccRow::kWriteOFOF:
      return {CoherenceState::O, CoherenceState::F};
    default:
      return {CoherenceState::I};
  }
}

// Allowed S range for a row at C cores.
std::pair<int, int> sharer_range(OccRow r, int cores) {
  switch (r) {
    case OccRow::kReadIS:
    case OccRow::kWriteIS:
    case OccRow::kWriteSS:
    case OccRow::kWriteSOF:
      return {1, cores - 1};
    case OccRow::kReadIOF:
    case OccRow::kWriteIOF:
    case OccRow::kWriteOFOF:
      return {0, cores - 1};
    default:
      return {0, 0};
  }
}

CoherenceState resolved_variant(const OccupancyScenario& sc) {
  auto v = variants(sc.row);
  return sc.variant == CoherenceState::I ? v.front() : sc.variant;
}

}  // namespace

const char* to_string(OccRow r) { return info(r).name; }

std::optional<OccRow> parse_occ_row(std::string_view name) {
  std::string n = lower(name);
  for (const RowInfo& ri : kRows)
    if (n == ri.name) return ri.row;
  return std::nullopt;
}

void validate_scenario(EngineKind engine, const OccupancyScenario& sc) {
  auto impossible = [&](const std::string& why) {
    fail(ErrorCode::kSetupImpossible,
         std::string(to_string(sc.row)) + ": " + why);
  };
  if (static_cast<int>(sc.row) >= kNumOccRows) impossible("unknown row");
  if (sc.cores < 2 || sc.cores > 32 || sc.cores % 2 != 0)
    impossible("cores must be even and in [2, 32]");
  if (sc.beats < 1 || 64 % sc.beats != 0)
    impossible("N must divide the 64-byte block");
  auto [lo, hi] = sharer_range(sc.row, sc.cores);
  if (sc.sharers < lo || sc.sharers > hi)
    impossible("S=" + std::to_string(sc.sharers) + " has no table cell");
  if (sc.variant != CoherenceState::I) {
    auto v = variants(sc.row);
    if (std::find(v.begin(), v.end(), sc.variant) == v.end())
      impossible(std::string("state ") + to_string(sc.variant) +
                 " has no table cell");
  }
  if (sc.replacement != ReplacementKind::kNone) {
    if (!requester_invalid(sc.row))
      impossible("replacement needs a requester miss");
    if (engine == EngineKind::kUcode && sc.row == OccRow::kReadExclII)
      impossible("the fast path has no replacement cell");
  }
}

uint64_t occupancy_model(EngineKind engine, const OccupancyScenario& sc) {
  validate_scenario(engine, sc);
  const RowInfo& ri = info(sc.row);
  const bool fsm = engine == EngineKind::kFsm;
  uint64_t v = static_cast<uint64_t>(fsm ? ri.fsm_base : ri.ucode_base);
  v += static_cast<uint64_t>(sc.cores / 2);
  if (ri.s_term) v += 2 * static_cast<uint64_t>(sc.sharers - ri.s_offset);
  if (ri.n_term) v += static_cast<uint64_t>(sc.beats);
  switch (sc.replacement) {
    case ReplacementKind::kNone: break;
    case ReplacementKind::kClean: v += fsm ? 2 : 7; break;
    case ReplacementKind::kDirty:
      v += (fsm ? 1 : 6) + static_cast<uint64_t>(sc.beats);
      break;
  }
  return v;
}

OccupancyRow setup_and_measure(
    const SimConfig& base, EngineKind engine, const OccupancyScenario& sc,
    const std::function<void(System&)>& before_issue) {
  validate_scenario(engine, sc);
  SimConfig cfg = base;
  cfg.cores = sc.cores;
  cfg.engine = engine;
  cfg.protocol = Protocol::kMoesif;
  cfg.random_permute = false;
  cfg.geometry.block_bytes = 64;
  cfg.beat_bytes = 64 / sc.beats;
  if (cfg.tag_sets_per_row > sc.cores) cfg.tag_sets_per_row = 2;
  System sys(cfg);
  sys.drain();

  const Geometry& g = cfg.geometry;
  const int C = sc.cores;
  const int set = 3 % g.sets;
  auto block = [&](int k) {
    return 0x80000000ull +
           (static_cast<uint64_t>(k) * g.sets + set) * g.block_bytes;
  };
  const uint64_t target = block(1);
  std::vector<uint8_t> data(g.block_bytes);
  for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<uint8_t>(i * 7 + 1);

  const OccRow row = sc.row;
  const int requester = row == OccRow::kReadNeII ? C : 0;
  std::vector<int> others;
  for (int id = 0; id < 2 * C; ++id)
    if (id != requester) others.push_back(id);
  size_t cursor = 0;
  auto take = [&] { return others.at(cursor++); };

  const CoherenceState var = resolved_variant(sc);
  std::vector<std::pair<int, CoherenceState>> holders;
  std::optional<int> dirty_owner;
  std::string lce_state = "I", dir_state = "I";
  int other_sharers = 0;
  switch (row) {
    case OccRow::kReadExclII:
    case OccRow::kReadNeII:
    case OccRow::kWriteII:
      break;
    case OccRow::kReadIS:
    case OccRow::kWriteIS:
      dir_state = "S";
      other_sharers = sc.sharers;
      break;
    case OccRow::kReadIEClean:
      holders.push_back({take(), CoherenceState::E});
      dir_state = "E (clean)";
      break;
    case OccRow::kReadIEDirty:
      dirty_owner = take();
      holders.push_back({*dirty_owner, CoherenceState::E});
      dir_state = "E (dirty)";
      break;
    case OccRow::kReadIM:
      holders.push_back({take(), CoherenceState::M});
      dir_state = "M";
      break;
    case OccRow::kWriteIEM:
      holders.push_back({take(), var});
      dir_state = to_string(var);
      break;
    case OccRow::kReadIOF:
    case OccRow::kWriteIOF:
      holders.push_back({take(), var});
      dir_state = to_string(var);
      other_sharers = sc.sharers;
      break;
    case OccRow::kWriteSS:
      holders.push_back({requester, CoherenceState::S});
      lce_state = dir_state = "S";
      other_sharers = sc.sharers - 1;
      break;
    case OccRow::kWriteSOF:
      holders.push_back({requester, CoherenceState::S});
      holders.push_back({take(), var});
      lce_state = "S";
      dir_state = to_string(var);
      other_sharers = sc.sharers - 1;
      break;
    case OccRow::kWriteOFOF:
      holders.push_back({requester, var});
      lce_state = dir_state = to_string(var);
      other_sharers = sc.sharers;
      break;
  }
  for (int i = 0; i < other_sharers; ++i)
    holders.push_back({take(), CoherenceState::S});

  if (sc.replacement != ReplacementKind::kNone) {
    // Victim in way 0 is touched first, so it is least recently used.
    CoherenceState vs = sc.replacement == ReplacementKind::kDirty
                            ? CoherenceState::M
                            : CoherenceState::E;
    sys.prepare_block(block(2), {{requester, vs}}, data, 0);
    for (int w = 1; w < g.assoc; ++w)
      sys.prepare_block(block(2 + w), {{requester, CoherenceState::S}}, data, w);
  }
  sys.prepare_block(target, holders, data, 0);
  if (dirty_owner) {
    sys.lce(*dirty_owner).set_line(g.set_of(target), 0, g.tag_of(target),
                                   CoherenceState::M, data);
  }

  if (before_issue) before_issue(sys);
  const bool write = info(row).request[0] == 'W';
  CpuRequest req{write ? CpuOp::kStore : CpuOp::kLoad, target, 8,
                 write ? 0x5a5a5a5aull : 0, 1};
  AccessResult a = sys.lce(requester).access(req, sys.now());
  if (a.status != AccessStatus::kMissIssued)
    fail(ErrorCode::kInternal, "occupancy request hit in the cache");
  sys.drain();

  const TransactionRecord* rec = nullptr;
  for (const TransactionRecord& r : sys.cce_for(target).transactions()) {
    if (r.addr == target && r.req_lce == requester) rec = &r;
  }
  if (!rec) fail(ErrorCode::kInternal, "no transaction recorded");

  OccupancyRow out;
  out.engine = engine;
  out.scenario = sc;
  out.scenario.variant = var;
  out.request_class = info(row).request;
  out.lce_state = lce_state;
  out.dir_state = dir_state;
  out.measured = rec->busy_cycles;
  out.model = occupancy_model(engine, out.scenario);
  out.match = out.measured == out.model;
  return out;
}

std::vector<OccupancyScenario> occupancy_grid(EngineKind engine, int cores,
                                              const std::vector<int>& beats) {
  std::vector<OccupancyScenario> out;
  for (const RowInfo& ri : kRows) {
    auto [lo, hi] = sharer_range(ri.row, cores);
    for (CoherenceState v : variants(ri.row)) {
      for (int s = lo; s <= hi; ++s) {
        for (int n : beats) {
          for (ReplacementKind rk :
               {ReplacementKind::kNone, ReplacementKind::kClean,
                ReplacementKind::kDirty}) {
            OccupancyScenario sc{ri.row, cores, s, n, rk, v};
            try {
              validate_scenario(engine, sc);
            } catch (const Error&) {
              continue;
            }
            out.push_back(sc);
          }
        }
      }
    }
  }
  return out;
}

std::vector<OccupancyRow> occupancy_sweep(const SimConfig& base,
                                          EngineKind engine, int cores,
                                          const std::vector<int>& beats) {
  std::vector<OccupancyRow> out;
  for (const OccupancyScenario& sc : occupancy_grid(engine, cores, beats))
    out.push_back(setup_and_measure(base, engine, sc));
  return out;
}

std::string occupancy_csv_header() {
  return "engine,row,request,lce_state,dir_state,C,S,N,replacement,measured,"
         "model,match";
}

std::string occupancy_csv_line(const OccupancyRow& r) {
  const char* repl = r.scenario.replacement == ReplacementKind::kNone ? "none"
                     : r.scenario.replacement == ReplacementKind::kClean
                         ? "clean"
                         : "dirty";
  std::ostringstream os;
  os << to_string(r.engine) << "," << to_string(r.scenario.row) << ","
     << r.request_class << "," << r.lce_state << "," << r.dir_state << ","
     << r.scenario.cores << "," << r.scenario.sharers << ","
     << r.scenario.beats << "," << repl << "," << r.measured << ","
     << r.model << "," << (r.match ? "true" : "false");
  return os.str();
}

// ---- Directory overhead ----

double overhead_percent(const OverheadParams& p) {
  if (p.caches < 2) fail(ErrorCode::kInvalidArgument, "caches must be at least 2");
  if (p.pad < 0 || p.block_bits < 1 || p.tag_bits < 0 || p.state_bits < 0)
    fail(ErrorCode::kInvalidArgument, "bad overhead parameters");
  int bits = p.tag_bits + p.state_bits;
  switch (p.scheme) {
    case OverheadScheme::kDuplicateTag: break;
    case OverheadScheme::kComplete: bits += p.caches; break;
    case OverheadScheme::kCoarse:
      if (p.coarse_bits < 1)
        fail(ErrorCode::kInvalidArgument, "coarse vector needs at least 1 bit");
      bits += p.coarse_bits;
      break;
  }
  int pad = p.pad ? p.pad : p.scheme == OverheadScheme::kDuplicateTag ? 32 : 1;
  int padded = (bits + pad - 1) / pad * pad;
  return 100.0 * padded / p.block_bits;
}

}  // namespace bedrock
