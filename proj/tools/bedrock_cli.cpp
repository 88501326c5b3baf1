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

// bedrock: command-line front end over the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bedrock/bedrock.h"

namespace {

constexpr int kOk = 0;
constexpr int kFound = 1;
constexpr int kUsage = 2;

// Input problems are usage errors; everything else is a diagnostic.
int exit_for(br_status s) {
  switch (s) {
    case BR_OK:
      return kOk;
    case BR_INVALID_ARGUMENT:
    case BR_PARSE:
    case BR_IO:
    case BR_UNKNOWN_MUTATION:
    case BR_SETUP_IMPOSSIBLE:
      return kUsage;
    default:
      return kFound;
  }
}

struct Failure {
  int code;
};

void check(br_status s) {
  if (s == BR_OK) return;
  std::cerr << "error: " << br_status_name(s) << ": " << br_last_error() << "\n";
  throw Failure{exit_for(s)};
}

// Owning wrappers for the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) Free(p);
  }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Text = Handle<br_text, br_text_free>;
using Config = Handle<br_config, br_config_free>;
using Trace = Handle<br_trace, br_trace_free>;
using Run = Handle<br_run, br_run_free>;
using Program = Handle<br_program, br_program_free>;
using Check = Handle<br_check, br_check_free>;

std::string text(const Text& t) {
  return std::string(br_text_data(t.get()), br_text_size(t.get()));
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(data.data(), static_cast<std::streamsize>(data.size()))) {
    std::cerr << "error: cannot write " << path << "\n";
    throw Failure{kUsage};
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    throw Failure{kUsage};
  }
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Writes to `path`, or stdout when it is empty.
void emit(const std::string& path, const std::string& data) {
  if (path.empty()) {
    std::cout << data;
  } else {
    write_file(path, data);
  }
}

void load_inputs(const std::string& config, const std::string& trace,
                 Config& cfg, Trace& tr) {
  check(br_config_load(config.c_str(), cfg.out()));
  check(br_trace_load(trace.c_str(), 2 * br_config_cores(cfg.get()), tr.out()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bedrock coherence simulator and verifier"};
  app.require_subcommand(1);
  app.set_version_flag("--version", br_version());

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a trace on a configured system");
  std::string sim_config, sim_trace, sim_engine, sim_ucode, sim_report,
      sim_dispatch = "ordered";
  sim->add_option("--config", sim_config, "Configuration file")
      ->required()->check(CLI::ExistingFile);
  sim->add_option("--trace", sim_trace, "Trace file")
      ->required()->check(CLI::ExistingFile);
  sim->add_option("--engine", sim_engine, "Coherence engine")
      ->check(CLI::IsMember({"fsm", "ucode"}));
  sim->add_option("--ucode", sim_ucode, "Microcode source or binary")
      ->check(CLI::ExistingFile);
  sim->add_option("--report", sim_report, "Per-class occupancy CSV output");
  sim->add_option("--dispatch", sim_dispatch, "Issue order")
      ->check(CLI::IsMember({"ordered", "free"}));

  // assemble
  auto* as = app.add_subcommand("assemble", "Assemble microcode");
  std::string as_in, as_out;
  bool as_listing = false;
  as->add_option("input", as_in, "Microcode source")
      ->required()->check(CLI::ExistingFile);
  as->add_option("-o,--output", as_out, "Binary output")->required();
  as->add_flag("--listing", as_listing, "Print the canonical listing");

  // disasm
  auto* dis = app.add_subcommand("disasm", "Disassemble a microcode binary");
  std::string dis_in, dis_out;
  dis->add_option("input", dis_in, "Microcode binary")
      ->required()->check(CLI::ExistingFile);
  dis->add_option("-o,--output", dis_out, "Listing output");

  // check
  auto* chk = app.add_subcommand("check", "Model-check the single-block protocol");
  std::string chk_protocol, chk_mutation = "none";
  int chk_caches = 2;
  uint64_t chk_max = 0;
  chk->add_option("--protocol", chk_protocol, "Protocol")
      ->required()->check(CLI::IsMember({"mesi", "moesif"}));
  chk->add_option("--caches", chk_caches, "Number of caches")
      ->required()->check(CLI::Range(2, 16));
  chk->add_option("--mutation", chk_mutation, "Seeded rule mutation");
  chk->add_option("--max-states", chk_max, "State limit (0 = none)");

  // occupancy
  auto* occ = app.add_subcommand("occupancy", "Measure request occupancy");
  std::string occ_engine, occ_config, occ_out, occ_row, occ_repl = "none",
      occ_variant;
  int occ_cores = 8, occ_sharers = 0;
  std::vector<int> occ_beats{1};
  bool occ_sweep = false;
  occ->add_option("--engine", occ_engine, "Coherence engine")
      ->required()->check(CLI::IsMember({"fsm", "ucode"}));
  occ->add_option("--cores", occ_cores, "Number of cores (even)")
      ->required()->check(CLI::Range(2, 32));
  occ->add_flag("--sweep", occ_sweep, "Every valid S, variant and replacement");
  occ->add_option("--beats", occ_beats, "Beats per block (N)")
      ->delimiter(',')->check(CLI::Range(1, 64));
  occ->add_option("--config", occ_config, "Base configuration")
      ->check(CLI::ExistingFile);
  occ->add_option("--row", occ_row, "Measure a single row");
  occ->add_option("--sharers", occ_sharers, "S for --row");
  occ->add_option("--replacement", occ_repl, "Replacement for --row")
      ->check(CLI::IsMember({"none", "clean", "dirty"}));
  occ->add_option("--variant", occ_variant, "Owner state for --row");
  occ->add_option("-o,--output", occ_out, "CSV output");

  // compare
  auto* cmp = app.add_subcommand("compare", "Compare FSM and microcode engines");
  std::string cmp_config, cmp_trace;
  cmp->add_option("--config", cmp_config, "Configuration file")
      ->required()->check(CLI::ExistingFile);
  cmp->add_option("--trace", cmp_trace, "Trace file")
      ->required()->check(CLI::ExistingFile);

  // overhead
  auto* ovh = app.add_subcommand("overhead", "Directory storage overhead");
  std::string ovh_scheme;
  int ovh_caches = 2, ovh_tag = 28, ovh_state = 3, ovh_block = 512, ovh_pad = 0;
  ovh->add_option("--scheme", ovh_scheme, "dup, complete or coarse:<bits>")
      ->required();
  ovh->add_option("--caches", ovh_caches, "Number of caches")
      ->required()->check(CLI::Range(2, 1 << 20));
  ovh->add_option("--tag-bits", ovh_tag, "Tag width");
  ovh->add_option("--state-bits", ovh_state, "State width");
  ovh->add_option("--block-bits", ovh_block, "Block size in bits");
  ovh->add_option("--pad", ovh_pad, "Entry rounding in bits (0 = default)");

  // tracegen
  auto* gen = app.add_subcommand("tracegen", "Generate a random trace");
  br_workload wl;
  br_workload_defaults(&wl);
  uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "Random seed")->required();
  gen->add_option("--ops", wl.ops, "Operations")->required();
  gen->add_option("--cores", wl.cores, "Cores")->check(CLI::Range(1, 64));
  gen->add_option("--footprint", wl.footprint, "Shared blocks")
      ->check(CLI::PositiveNumber);
  gen->add_option("--private-blocks", wl.private_blocks, "Private blocks per core")
      ->check(CLI::PositiveNumber);
  gen->add_option("--write-ratio", wl.write_ratio)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--sharing", wl.sharing)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--atomic-ratio", wl.atomic_ratio)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--ifetch-ratio", wl.ifetch_ratio)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--uncached-ratio", wl.uncached_ratio)
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("-o,--output", gen_out, "Trace output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) {
      Config cfg;
      Trace tr;
      check(br_config_load(sim_config.c_str(), cfg.out()));
      if (!sim_engine.empty())
        check(br_config_set(cfg.get(), "engine", sim_engine.c_str()));
      if (!sim_ucode.empty()) {
        check(br_config_set(cfg.get(), "ucode", sim_ucode.c_str()));
        if (sim_engine.empty()) check(br_config_set(cfg.get(), "engine", "ucode"));
      }
      check(br_trace_load(sim_trace.c_str(), 2 * br_config_cores(cfg.get()), tr.out()));
      Run run;
      check(br_simulate(cfg.get(), tr.get(),
                        sim_dispatch == "free" ? BR_DISPATCH_FREE
                                               : BR_DISPATCH_ORDERED,
                        run.out()));
      Text report;
      check(br_run_report(run.get(), report.out()));
      std::cout << text(report);
      if (!sim_report.empty()) {
        Text csv;
        check(br_run_class_csv(run.get(), csv.out()));
        write_file(sim_report, text(csv));
      }
      return br_run_violations(run.get()) ? kFound : kOk;
    }

    if (*as) {
      std::string src = read_file(as_in);
      Program prog;
      Text diags;
      br_status s = br_assemble(src.c_str(), prog.out(), diags.out());
      if (s != BR_OK) {
        std::cerr << text(diags);
        std::cerr << "error: " << br_status_name(s) << "\n";
        return kFound;
      }
      Text bin;
      check(br_program_binary(prog.get(), bin.out()));
      write_file(as_out, text(bin));
      if (as_listing) {
        Text listing;
        check(br_program_listing(prog.get(), listing.out()));
        std::cout << text(listing);
      }
      std::cerr << "assembled " << br_program_size(prog.get())
                << " instructions\n";
      return kOk;
    }

    if (*dis) {
      std::string bytes = read_file(dis_in);
      Program prog;
      check(br_program_from_binary(bytes.data(), bytes.size(), prog.out()));
      Text listing;
      check(br_program_listing(prog.get(), listing.out()));
      emit(dis_out, text(listing));
      return kOk;
    }

    if (*chk) {
      Check res;
      check(br_check_run(chk_protocol.c_str(), chk_caches, chk_mutation.c_str(),
                         chk_max, res.out()));
      Text report;
      check(br_check_report(res.get(), report.out()));
      std::cout << text(report);
      return br_check_invariant(res.get()) ? kFound : kOk;
    }

    if (*occ) {
      Config cfg;
      if (!occ_config.empty()) check(br_config_load(occ_config.c_str(), cfg.out()));
      if (!occ_row.empty()) {
        if (occ_beats.size() != 1) {
          std::cerr << "error: --row takes a single --beats value\n";
          return kUsage;
        }
        br_occupancy_row row{};
        Text line;
        check(br_occupancy_measure(cfg.get(), occ_engine.c_str(), occ_row.c_str(),
                                   occ_cores, occ_sharers, occ_beats[0],
                                   occ_repl.c_str(), occ_variant.c_str(), &row,
                                   line.out()));
        emit(occ_out, "engine,row,request,lce_state,dir_state,C,S,N,replacement,"
                      "measured,model,match\n" + text(line) + "\n");
        return row.match ? kOk : kFound;
      }
      Text csv;
      size_t bad = 0;
      check(br_occupancy_table(cfg.get(), occ_engine.c_str(), occ_cores,
                               occ_beats.data(), occ_beats.size(),
                               occ_sweep ? 1 : 0, csv.out(), &bad));
      emit(occ_out, text(csv));
      return bad ? kFound : kOk;
    }

    if (*cmp) {
      Config cfg;
      Trace tr;
      load_inputs(cmp_config, cmp_trace, cfg, tr);
      int eq = 0;
      Text report;
      check(br_compare(cfg.get(), tr.get(), &eq, report.out()));
      std::cout << text(report);
      return eq ? kOk : kFound;
    }

    if (*ovh) {
      double pct = 0;
      check(br_overhead(ovh_scheme.c_str(), ovh_caches, ovh_tag, ovh_state,
                        ovh_block, ovh_pad, &pct));
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f%%\n", pct);
      std::cout << buf;
      return kOk;
    }

    if (*gen) {
      Trace tr;
      check(br_trace_generate(gen_seed, &wl, tr.out()));
      Text out;
      check(br_trace_format(tr.get(), out.out()));
      emit(gen_out, text(out));
      return kOk;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kUsage;
}
