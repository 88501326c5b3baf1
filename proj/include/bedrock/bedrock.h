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

/* C interface of the bedrock simulator library. Every handle is opaque and
 * owned by the caller once returned; release it with the matching _free
 * function. Functions return BR_OK or an error code and leave a message in
 * br_last_error() (per thread). */

#ifndef BEDROCK_BEDROCK_H_
#define BEDROCK_BEDROCK_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BR_API __declspec(dllexport)
#else
#define BR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum br_status {
  BR_OK = 0,
  BR_INVALID_ARGUMENT = 1,
  BR_PARSE = 2,
  BR_IO = 3,
  BR_IMPOSSIBLE_TRANSITION = 10,
  BR_OUT_OF_RANGE = 11,
  BR_UNDERFLOW = 12,
  BR_OVERFLOW = 13,
  BR_DOUBLE_SPECULATION = 14,
  BR_MULTIPLE_OWNERS = 15,
  BR_BUSY = 16,
  BR_UNEXPECTED_FILL = 17,
  BR_SPEC_STATE_MISSING = 18,
  BR_ILLEGAL_INSTRUCTION = 19,
  BR_PROGRAM_TOO_LARGE = 20,
  BR_UNKNOWN_MUTATION = 21,
  BR_SETUP_IMPOSSIBLE = 22,
  BR_MONITOR_VIOLATION = 23,
  BR_PROTOCOL = 24,
  BR_DEADLOCK = 25,
  BR_INTERNAL = 99
} br_status;

typedef struct br_text br_text;
typedef struct br_config br_config;
typedef struct br_trace br_trace;
typedef struct br_run br_run;
typedef struct br_program br_program;
typedef struct br_check br_check;

BR_API const char* br_version(void);
BR_API const char* br_status_name(br_status status);
BR_API const char* br_last_error(void);

/* ---- Text and byte buffers ---- */

BR_API const char* br_text_data(const br_text* text);
BR_API size_t br_text_size(const br_text* text);
BR_API void br_text_free(br_text* text);

/* ---- Configuration (flat key = value text) ---- */

BR_API br_status br_config_new(br_config** out);
BR_API br_status br_config_load(const char* path, br_config** out);
BR_API br_status br_config_parse(const char* text, br_config** out);
/* Same keys and value syntax as the configuration file. */
BR_API br_status br_config_set(br_config* cfg, const char* key,
                               const char* value);
BR_API int br_config_cores(const br_config* cfg);
BR_API br_status br_config_format(const br_config* cfg, br_text** out);
BR_API void br_config_free(br_config* cfg);

/* ---- Traces ---- */

typedef struct br_workload {
  int cores;
  uint64_t ops;
  int footprint;
  int private_blocks;
  double write_ratio;
  double sharing;
  double atomic_ratio;
  double ifetch_ratio;
  double uncached_ratio;
} br_workload;

BR_API void br_workload_defaults(br_workload* params);
BR_API br_status br_trace_load(const char* path, int num_lces, br_trace** out);
BR_API br_status br_trace_parse(const char* text, int num_lces, br_trace** out);
BR_API br_status br_trace_generate(uint64_t seed, const br_workload* params,
                                   br_trace** out);
BR_API size_t br_trace_length(const br_trace* trace);
BR_API br_status br_trace_format(const br_trace* trace, br_text** out);
BR_API void br_trace_free(br_trace* trace);

/* ---- Simulation ---- */

typedef enum br_dispatch { BR_DISPATCH_ORDERED = 0, BR_DISPATCH_FREE = 1 } br_dispatch;

/* Monitor violations do not fail the call; inspect br_run_violations(). */
BR_API br_status br_simulate(const br_config* cfg, const br_trace* trace,
                             br_dispatch dispatch, br_run** out);
BR_API uint64_t br_run_cycles(const br_run* run);
BR_API size_t br_run_violations(const br_run* run);
BR_API br_status br_run_report(const br_run* run, br_text** out);
/* Per request class: class,count,busy_cycles,mean_busy */
BR_API br_status br_run_class_csv(const br_run* run, br_text** out);
BR_API void br_run_free(br_run* run);

/* *equivalent receives 1 or 0. */
BR_API br_status br_compare(const br_config* cfg, const br_trace* trace,
                            int* equivalent, br_text** report);

/* ---- Microcode ---- */

/* On BR_PARSE or BR_PROGRAM_TOO_LARGE, *diagnostics (when non-null) receives
 * one line per problem. */
BR_API br_status br_assemble(const char* source, br_program** out,
                             br_text** diagnostics);
/* Source or binary file; an empty path picks the built-in program of the
 * protocol ("moesif" or "mesi"). */
BR_API br_status br_program_load(const char* path, const char* protocol,
                                 br_program** out);
BR_API br_status br_program_from_binary(const void* bytes, size_t size,
                                        br_program** out);
BR_API int br_program_size(const br_program* program);
BR_API br_status br_program_binary(const br_program* program, br_text** out);
BR_API br_status br_program_listing(const br_program* program, br_text** out);
BR_API void br_program_free(br_program* program);

/* ---- Model checker ---- */

/* mutation: NULL or "none" for the unmodified tables. max_states 0 means
 * unbounded. */
BR_API br_status br_check_run(const char* protocol, int caches,
                              const char* mutation, uint64_t max_states,
                              br_check** out);
BR_API int br_check_verified(const br_check* check);
BR_API int br_check_bounded(const br_check* check);
/* NULL when no invariant was violated. */
BR_API const char* br_check_invariant(const br_check* check);
BR_API uint64_t br_check_states(const br_check* check);
BR_API size_t br_check_trace_length(const br_check* check);
BR_API const char* br_check_trace_step(const br_check* check, size_t index);
BR_API br_status br_check_report(const br_check* check, br_text** out);
BR_API void br_check_free(br_check* check);

/* ---- Occupancy ---- */

typedef struct br_occupancy_row {
  uint64_t measured;
  uint64_t model;
  int match;
} br_occupancy_row;

/* row: occupancy row name such as "read_i_s"; replacement: "none", "clean"
 * or "dirty"; variant: "" or an owner state letter. csv_line may be NULL. */
BR_API br_status br_occupancy_measure(const br_config* base, const char* engine,
                                      const char* row, int cores, int sharers,
                                      int beats, const char* replacement,
                                      const char* variant,
                                      br_occupancy_row* out, br_text** csv_line);
/* full = 0: one scenario per row (fewest sharers, no replacement, first
 * owner variant) for each N in beats. full = 1: every valid combination.
 * The CSV includes its header; *mismatches counts rows with match=false. */
BR_API br_status br_occupancy_table(const br_config* base, const char* engine,
                                    int cores, const int* beats,
                                    size_t num_beats, int full, br_text** csv,
                                    size_t* mismatches);

/* ---- Directory overhead ---- */

/* scheme: "dup", "complete" or "coarse:<bits>". pad 0 picks the default. */
BR_API br_status br_overhead(const char* scheme, int caches, int tag_bits,
                             int state_bits, int block_bits, int pad,
                             double* percent);

#ifdef __cplusplus
}
#endif

#endif /* BEDROCK_BEDROCK_H_ */
