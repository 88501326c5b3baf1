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

#include "bedrock/bedrock.h"

#include <charconv>
#include <cstring>
#include <iomanip>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "bedrock/checker.hpp"
#include "bedrock/error.hpp"
#include "bedrock/harness.hpp"
#include "bedrock/ucode/assembler.hpp"
#include "bedrock/ucode/engine.hpp"

struct br_text {
  std::string data;
};
struct br_config {
  bedrock::SimConfig cfg;
};
struct br_trace {
  std::vector<bedrock::TraceOp> ops;
};
struct br_run {
  bedrock::RunResult result;
};
struct br_program {
  bedrock::ucode::Program program;
};
struct br_check {
  bedrock::CheckResult result;
};

namespace {

thread_local std::string g_last_error;

br_status to_status(bedrock::ErrorCode c) {
  return static_cast<br_status>(static_cast<int>(c));
}

template <typename F>
br_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return BR_OK;
  } catch (const bedrock::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BR_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) bedrock::fail(bedrock::ErrorCode::kInvalidArgument, what);
}

br_text* make_text(std::string s) { return new br_text{std::move(s)}; }

bedrock::EngineKind parse_engine(const char* engine) {
  require(engine != nullptr, "engine is null");
  std::string e = engine;
  if (e == "fsm") return bedrock::EngineKind::kFsm;
  if (e == "ucode") return bedrock::EngineKind::kUcode;
  bedrock::fail(bedrock::ErrorCode::kInvalidArgument,
                "engine must be fsm or ucode");
}

bedrock::Protocol parse_protocol_arg(const char* protocol) {
  require(protocol != nullptr, "protocol is null");
  auto p = bedrock::parse_protocol(protocol);
  if (!p) {
    bedrock::fail(bedrock::ErrorCode::kInvalidArgument,
                  "protocol must be mesi or moesif");
  }
  return *p;
}

bedrock::SimConfig base_config(const br_config* base) {
  return base ? base->cfg : bedrock::SimConfig{};
}

}  // namespace

extern "C" {

const char* br_version(void) { return "0.1.0"; }

const char* br_status_name(br_status status) {
  if (status == BR_OK) return "Ok";
  return bedrock::to_string(static_cast<bedrock::ErrorCode>(status));
}

const char* br_last_error(void) { return g_last_error.c_str(); }

const char* br_text_data(const br_text* text) {
  return text ? text->data.c_str() : "";
}
size_t br_text_size(const br_text* text) { return text ? text->data.size() : 0; }
void br_text_free(br_text* text) { delete text; }

// ---- Configuration ----

br_status br_config_new(br_config** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = new br_config{};
  });
}

br_status br_config_load(const char* path, br_config** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new br_config{bedrock::load_config(path)};
  });
}

br_status br_config_parse(const char* text, br_config** out) {
  return guard([&] {
    require(text && out, "null argument");
    *out = new br_config{bedrock::parse_config(text)};
  });
}

br_status br_config_set(br_config* cfg, const char* key, const char* value) {
  return guard([&] {
    require(cfg && key && value, "null argument");
    bedrock::set_config_key(cfg->cfg, key, value);
  });
}

int br_config_cores(const br_config* cfg) { return cfg ? cfg->cfg.cores : 0; }

br_status br_config_format(const br_config* cfg, br_text** out) {
  return guard([&] {
    require(cfg && out, "null argument");
    *out = make_text(bedrock::format_config(cfg->cfg));
  });
}

void br_config_free(br_config* cfg) { delete cfg; }

// ---- Traces ----

void br_workload_defaults(br_workload* params) {
  if (!params) return;
  bedrock::WorkloadParams p;
  params->cores = p.cores;
  params->ops = p.ops;
  params->footprint = p.footprint;
  params->private_blocks = p.private_blocks;
  params->write_ratio = p.write_ratio;
  params->sharing = p.sharing;
  params->atomic_ratio = p.atomic_ratio;
  params->ifetch_ratio = p.ifetch_ratio;
  params->uncached_ratio = p.uncached_ratio;
}

br_status br_trace_load(const char* path, int num_lces, br_trace** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new br_trace{bedrock::load_trace(path, num_lces)};
  });
}

br_status br_trace_parse(const char* text, int num_lces, br_trace** out) {
  return guard([&] {
    require(text && out, "null argument");
    *out = new br_trace{bedrock::parse_trace(text, num_lces)};
  });
}

br_status br_trace_generate(uint64_t seed, const br_workload* params,
                            br_trace** out) {
  return guard([&] {
    require(params && out, "null argument");
    bedrock::WorkloadParams p;
    p.cores = params->cores;
    p.ops = params->ops;
    p.footprint = params->footprint;
    p.private_blocks = params->private_blocks;
    p.write_ratio = params->write_ratio;
    p.sharing = params->sharing;
    p.atomic_ratio = params->atomic_ratio;
    p.ifetch_ratio = params->ifetch_ratio;
    p.uncached_ratio = params->uncached_ratio;
    for (double r : {p.write_ratio, p.sharing, p.atomic_ratio, p.ifetch_ratio,
                     p.uncached_ratio}) {
      require(r >= 0.0 && r <= 1.0, "ratios must lie in [0, 1]");
    }
    *out = new br_trace{bedrock::random_workload(seed, p)};
  });
}

size_t br_trace_length(const br_trace* trace) {
  return trace ? trace->ops.size() : 0;
}

br_status br_trace_format(const br_trace* trace, br_text** out) {
  return guard([&] {
    require(trace && out, "null argument");
    *out = make_text(bedrock::format_trace(trace->ops));
  });
}

void br_trace_free(br_trace* trace) { delete trace; }

// ---- Simulation ----

br_status br_simulate(const br_config* cfg, const br_trace* trace,
                      br_dispatch dispatch, br_run** out) {
  return guard([&] {
    require(cfg && trace && out, "null argument");
    require(dispatch == BR_DISPATCH_ORDERED || dispatch == BR_DISPATCH_FREE,
            "bad dispatch mode");
    bedrock::RunOptions opts;
    opts.dispatch = dispatch == BR_DISPATCH_FREE ? bedrock::Dispatch::kFree
                                                 : bedrock::Dispatch::kOrdered;
    opts.abort_on_violation = false;
    *out = new br_run{bedrock::run_trace(cfg->cfg, trace->ops, opts)};
  });
}

uint64_t br_run_cycles(const br_run* run) {
  return run ? run->result.stats.cycles : 0;
}

size_t br_run_violations(const br_run* run) {
  return run ? run->result.violations.size() : 0;
}

br_status br_run_report(const br_run* run, br_text** out) {
  return guard([&] {
    require(run && out, "null argument");
    *out = make_text(bedrock::format_report(run->result));
  });
}

br_status br_run_class_csv(const br_run* run, br_text** out) {
  return guard([&] {
    require(run && out, "null argument");
    std::ostringstream os;
    os << "class,count,busy_cycles,mean_busy\n";
    for (const auto& [name, o] : run->result.stats.by_class) {
      double mean = o.count ? static_cast<double>(o.busy_cycles) / o.count : 0;
      os << name << "," << o.count << "," << o.busy_cycles << ","
         << std::fixed << std::setprecision(2) << mean << "\n";
    }
    *out = make_text(os.str());
  });
}

void br_run_free(br_run* run) { delete run; }

br_status br_compare(const br_config* cfg, const br_trace* trace,
                     int* equivalent, br_text** report) {
  return guard([&] {
    require(cfg && trace && equivalent, "null argument");
    bedrock::EquivalenceReport r = bedrock::compare_engines(cfg->cfg, trace->ops);
    *equivalent = r.equivalent() ? 1 : 0;
    if (report) *report = make_text(bedrock::format_report(r));
  });
}

// ---- Microcode ----

br_status br_assemble(const char* source, br_program** out,
                      br_text** diagnostics) {
  if (diagnostics) *diagnostics = nullptr;
  return guard([&] {
    require(source && out, "null argument");
    bedrock::ucode::AssembleResult r = bedrock::ucode::assemble(source);
    if (!r.ok()) {
      std::string text;
      for (const auto& d : r.diagnostics) text += d.str() + "\n";
      if (diagnostics) *diagnostics = make_text(text);
      std::string first =
          r.diagnostics.empty() ? "assembly failed" : r.diagnostics[0].str();
      bedrock::fail(r.too_large ? bedrock::ErrorCode::kProgramTooLarge
                                : bedrock::ErrorCode::kParse,
                    first);
    }
    *out = new br_program{std::move(*r.program)};
  });
}

br_status br_program_load(const char* path, const char* protocol,
                          br_program** out) {
  return guard([&] {
    require(path && out, "null argument");
    bedrock::Protocol p = parse_protocol_arg(protocol ? protocol : "moesif");
    *out = new br_program{bedrock::ucode::load_program(path, p)};
  });
}

br_status br_program_from_binary(const void* bytes, size_t size,
                                 br_program** out) {
  return guard([&] {
    require(bytes && out, "null argument");
    const auto* p = static_cast<const uint8_t*>(bytes);
    std::vector<uint8_t> v(p, p + size);
    *out = new br_program{bedrock::ucode::read_binary(v)};
  });
}

int br_program_size(const br_program* program) {
  return program ? program->program.size() : 0;
}

br_status br_program_binary(const br_program* program, br_text** out) {
  return guard([&] {
    require(program && out, "null argument");
    std::vector<uint8_t> bin = bedrock::ucode::write_binary(program->program);
    *out = make_text(std::string(bin.begin(), bin.end()));
  });
}

br_status br_program_listing(const br_program* program, br_text** out) {
  return guard([&] {
    require(program && out, "null argument");
    *out = make_text(bedrock::ucode::disassemble(program->program));
  });
}

void br_program_free(br_program* program) { delete program; }

// ---- Model checker ----

br_status br_check_run(const char* protocol, int caches, const char* mutation,
                       uint64_t max_states, br_check** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    bedrock::Protocol p = parse_protocol_arg(protocol);
    bedrock::Mutation m = bedrock::parse_mutation(mutation ? mutation : "none");
    bedrock::CheckOptions opts;
    opts.max_states = max_states;
    *out = new br_check{bedrock::explore(p, caches, m, opts)};
  });
}

int br_check_verified(const br_check* check) {
  return check && check->result.verified ? 1 : 0;
}

int br_check_bounded(const br_check* check) {
  return check && check->result.bounded ? 1 : 0;
}

const char* br_check_invariant(const br_check* check) {
  if (!check || !check->result.invariant) return nullptr;
  return check->result.invariant->c_str();
}

uint64_t br_check_states(const br_check* check) {
  return check ? check->result.states : 0;
}

size_t br_check_trace_length(const br_check* check) {
  return check ? check->result.trace.size() : 0;
}

const char* br_check_trace_step(const br_check* check, size_t index) {
  if (!check || index >= check->result.trace.size()) return nullptr;
  return check->result.trace[index].c_str();
}

br_status br_check_report(const br_check* check, br_text** out) {
  return guard([&] {
    require(check && out, "null argument");
    *out = make_text(bedrock::format_result(check->result));
  });
}

void br_check_free(br_check* check) { delete check; }

// ---- Occupancy ----

br_status br_occupancy_measure(const br_config* base, const char* engine,
                               const char* row, int cores, int sharers,
                               int beats, const char* replacement,
                               const char* variant, br_occupancy_row* out,
                               br_text** csv_line) {
  return guard([&] {
    require(row && out, "null argument");
    bedrock::EngineKind e = parse_engine(engine);
    auto r = bedrock::parse_occ_row(row);
    if (!r) bedrock::fail(bedrock::ErrorCode::kInvalidArgument,
                          std::string("unknown occupancy row ") + row);
    bedrock::OccupancyScenario sc;
    sc.row = *r;
    sc.cores = cores;
    sc.sharers = sharers;
    sc.beats = beats;
    std::string repl = replacement ? replacement : "none";
    if (repl == "none") sc.replacement = bedrock::ReplacementKind::kNone;
    else if (repl == "clean") sc.replacement = bedrock::ReplacementKind::kClean;
    else if (repl == "dirty") sc.replacement = bedrock::ReplacementKind::kDirty;
    else bedrock::fail(bedrock::ErrorCode::kInvalidArgument,
                       "replacement must be none, clean or dirty");
    if (variant && *variant) {
      auto v = bedrock::parse_state(variant);
      if (!v) bedrock::fail(bedrock::ErrorCode::kInvalidArgument,
                            "variant must be a state letter");
      sc.variant = *v;
    }
    bedrock::OccupancyRow res =
        bedrock::setup_and_measure(base_config(base), e, sc);
    out->measured = res.measured;
    out->model = res.model;
    out->match = res.match ? 1 : 0;
    if (csv_line) *csv_line = make_text(bedrock::occupancy_csv_line(res));
  });
}

br_status br_occupancy_table(const br_config* base, const char* engine,
                             int cores, const int* beats, size_t num_beats,
                             int full, br_text** csv, size_t* mismatches) {
  return guard([&] {
    require(csv != nullptr, "csv is null");
    require(beats != nullptr && num_beats > 0, "beats list is empty");
    bedrock::EngineKind e = parse_engine(engine);
    std::vector<int> nbeats(beats, beats + num_beats);
    // Rejects odd core counts and beat counts for every row alike.
    for (int n : nbeats) {
      bedrock::OccupancyScenario probe;
      probe.cores = cores;
      probe.beats = n;
      bedrock::validate_scenario(e, probe);
    }
    bedrock::SimConfig cfg = base_config(base);
    std::vector<bedrock::OccupancyRow> rows;
    if (full) {
      rows = bedrock::occupancy_sweep(cfg, e, cores, nbeats);
    } else {
      for (int n : nbeats) {
        for (int i = 0; i < bedrock::kNumOccRows; ++i) {
          bedrock::OccupancyScenario sc;
          sc.row = static_cast<bedrock::OccRow>(i);
          sc.cores = cores;
          sc.beats = n;
          bool found = false;
          for (int s = 0; s < cores && !found; ++s) {
            sc.sharers = s;
            try {
              bedrock::validate_scenario(e, sc);
              found = true;
            } catch (const bedrock::Error& err) {
              if (err.code() != bedrock::ErrorCode::kSetupImpossible) throw;
            }
          }
          if (!found) continue;
          rows.push_back(bedrock::setup_and_measure(cfg, e, sc));
        }
      }
    }
    std::string text = bedrock::occupancy_csv_header() + "\n";
    size_t bad = 0;
    for (const auto& r : rows) {
      text += bedrock::occupancy_csv_line(r) + "\n";
      bad += r.match ? 0 : 1;
    }
    if (mismatches) *mismatches = bad;
    *csv = make_text(std::move(text));
  });
}

// ---- Directory overhead ----

br_status br_overhead(const char* scheme, int caches, int tag_bits,
                      int state_bits, int block_bits, int pad,
                      double* percent) {
  return guard([&] {
    require(scheme && percent, "null argument");
    bedrock::OverheadParams p;
    std::string s = scheme;
    if (s == "dup") {
      p.scheme = bedrock::OverheadScheme::kDuplicateTag;
    } else if (s == "complete") {
      p.scheme = bedrock::OverheadScheme::kComplete;
    } else if (s.rfind("coarse:", 0) == 0) {
      p.scheme = bedrock::OverheadScheme::kCoarse;
      std::string bits = s.substr(7);
      int b = 0;
      auto [ptr, ec] = std::from_chars(bits.data(), bits.data() + bits.size(), b);
      require(ec == std::errc() && ptr == bits.data() + bits.size() && b > 0,
              "coarse scheme needs a positive bit count");
      p.coarse_bits = b;
    } else {
      bedrock::fail(bedrock::ErrorCode::kInvalidArgument,
                    "scheme must be dup, complete or coarse:<bits>");
    }
    p.caches = caches;
    p.tag_bits = tag_bits;
    p.state_bits = state_bits;
    p.block_bits = block_bits;
    p.pad = pad;
    *percent = bedrock::overhead_percent(p);
  });
}

}  // extern "C"
