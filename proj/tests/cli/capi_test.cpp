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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "bedrock/bedrock.h"

namespace {

std::string take(br_text* t) {
  std::string s(br_text_data(t), br_text_size(t));
  br_text_free(t);
  return s;
}

}  // namespace

TEST_CASE("status names and last error") {
  CHECK(std::string(br_status_name(BR_OK)) == "Ok");
  CHECK(std::string(br_status_name(BR_UNKNOWN_MUTATION)) == "UnknownMutation");
  br_config* cfg = nullptr;
  CHECK(br_config_parse("cores = 2\nbogus = 1\n", &cfg) == BR_PARSE);
  CHECK(cfg == nullptr);
  CHECK(std::string(br_last_error()).find("bogus") != std::string::npos);
  CHECK(br_config_new(nullptr) == BR_INVALID_ARGUMENT);
}

TEST_CASE("config set and format round trip") {
  br_config* cfg = nullptr;
  REQUIRE(br_config_new(&cfg) == BR_OK);
  REQUIRE(br_config_set(cfg, "cores", "4") == BR_OK);
  REQUIRE(br_config_set(cfg, "engine", "ucode") == BR_OK);
  CHECK(br_config_set(cfg, "engine", "dataflow") == BR_PARSE);
  CHECK(br_config_cores(cfg) == 4);
  br_text* t = nullptr;
  REQUIRE(br_config_format(cfg, &t) == BR_OK);
  std::string text = take(t);
  br_config* again = nullptr;
  REQUIRE(br_config_parse(text.c_str(), &again) == BR_OK);
  REQUIRE(br_config_format(again, &t) == BR_OK);
  CHECK(take(t) == text);
  br_config_free(again);
  br_config_free(cfg);
}

TEST_CASE("generated trace simulates and compares") {
  br_workload wl;
  br_workload_defaults(&wl);
  wl.cores = 2;
  wl.ops = 500;
  br_trace* tr = nullptr;
  REQUIRE(br_trace_generate(3, &wl, &tr) == BR_OK);
  CHECK(br_trace_length(tr) == 500);
  br_config* cfg = nullptr;
  REQUIRE(br_config_new(&cfg) == BR_OK);
  br_run* run = nullptr;
  REQUIRE(br_simulate(cfg, tr, BR_DISPATCH_ORDERED, &run) == BR_OK);
  CHECK(br_run_violations(run) == 0);
  CHECK(br_run_cycles(run) > 0);
  br_text* csv = nullptr;
  REQUIRE(br_run_class_csv(run, &csv) == BR_OK);
  CHECK(take(csv).rfind("class,count,busy_cycles,mean_busy\n", 0) == 0);
  br_run_free(run);
  int eq = 0;
  br_text* report = nullptr;
  REQUIRE(br_compare(cfg, tr, &eq, &report) == BR_OK);
  CHECK(eq == 1);
  CHECK(take(report).find("verdict: equivalent") != std::string::npos);
  br_config_free(cfg);
  br_trace_free(tr);
}

TEST_CASE("trace text round trip") {
  br_trace* tr = nullptr;
  REQUIRE(br_trace_parse("0 ST 80000000 5\n1 LD.4 80000004\n", 2, &tr) == BR_OK);
  br_text* t = nullptr;
  REQUIRE(br_trace_format(tr, &t) == BR_OK);
  std::string text = take(t);
  br_trace* back = nullptr;
  REQUIRE(br_trace_parse(text.c_str(), 2, &back) == BR_OK);
  CHECK(br_trace_length(back) == 2);
  br_trace_free(back);
  br_trace_free(tr);
  CHECK(br_trace_parse("2 LD 80000000\n", 2, &tr) == BR_PARSE);
}

TEST_CASE("microcode assemble, binary and listing") {
  br_program* builtin = nullptr;
  REQUIRE(br_program_load("", "moesif", &builtin) == BR_OK);
  CHECK(br_program_size(builtin) <= 256);
  br_text* listing = nullptr;
  REQUIRE(br_program_listing(builtin, &listing) == BR_OK);
  std::string src = take(listing);
  br_program* again = nullptr;
  REQUIRE(br_assemble(src.c_str(), &again, nullptr) == BR_OK);
  br_text* a = nullptr;
  br_text* b = nullptr;
  REQUIRE(br_program_binary(builtin, &a) == BR_OK);
  REQUIRE(br_program_binary(again, &b) == BR_OK);
  std::string bin = take(a);
  CHECK(bin == take(b));
  br_program* decoded = nullptr;
  REQUIRE(br_program_from_binary(bin.data(), bin.size(), &decoded) == BR_OK);
  CHECK(br_program_size(decoded) == br_program_size(builtin));
  br_program_free(decoded);
  br_program_free(again);
  br_program_free(builtin);

  br_program* bad = nullptr;
  br_text* diags = nullptr;
  CHECK(br_assemble("  nonsense r9\n", &bad, &diags) == BR_PARSE);
  CHECK(bad == nullptr);
  CHECK(take(diags).rfind("1:3: unknown instruction", 0) == 0);
}

TEST_CASE("checker through the C API") {
  br_check* c = nullptr;
  REQUIRE(br_check_run("mesi", 2, nullptr, 0, &c) == BR_OK);
  CHECK(br_check_verified(c) == 1);
  CHECK(br_check_invariant(c) == nullptr);
  CHECK(br_check_states(c) > 0);
  br_check_free(c);
  REQUIRE(br_check_run("moesif", 2, "drop-invalidations", 0, &c) == BR_OK);
  CHECK(br_check_verified(c) == 0);
  REQUIRE(br_check_invariant(c) != nullptr);
  CHECK(std::string(br_check_invariant(c)) == "SWMR");
  CHECK(br_check_trace_length(c) >= 1);
  CHECK(br_check_trace_length(c) <= 12);
  CHECK(br_check_trace_step(c, 0) != nullptr);
  CHECK(br_check_trace_step(c, 1000) == nullptr);
  br_check_free(c);
  CHECK(br_check_run("mesi", 2, "nope", 0, &c) == BR_UNKNOWN_MUTATION);
  CHECK(br_check_run("msi", 2, nullptr, 0, &c) == BR_INVALID_ARGUMENT);
}

TEST_CASE("occupancy through the C API") {
  br_occupancy_row row{};
  REQUIRE(br_occupancy_measure(nullptr, "fsm", "read_excl_i_i", 8, 0, 1, "none",
                               "", &row, nullptr) == BR_OK);
  CHECK(row.measured == 12);
  CHECK(row.model == 12);
  CHECK(row.match == 1);
  CHECK(br_occupancy_measure(nullptr, "fsm", "write_i_s", 8, 0, 1, "none", "",
                             &row, nullptr) == BR_SETUP_IMPOSSIBLE);
  CHECK(br_occupancy_measure(nullptr, "gpu", "write_i_s", 8, 1, 1, "none", "",
                             &row, nullptr) == BR_INVALID_ARGUMENT);
  int beats[] = {1};
  br_text* csv = nullptr;
  size_t bad = 99;
  REQUIRE(br_occupancy_table(nullptr, "ucode", 4, beats, 1, 0, &csv, &bad) ==
          BR_OK);
  CHECK(bad == 0);
  CHECK(take(csv).find("ucode,read_ne_i_i") != std::string::npos);
}

TEST_CASE("overhead through the C API") {
  double pct = 0;
  REQUIRE(br_overhead("dup", 64, 28, 3, 512, 0, &pct) == BR_OK);
  CHECK(pct == doctest::Approx(6.25));
  REQUIRE(br_overhead("coarse:8", 64, 28, 3, 512, 0, &pct) == BR_OK);
  CHECK(pct == doctest::Approx(100.0 * 39 / 512));
  CHECK(br_overhead("coarse:x", 64, 28, 3, 512, 0, &pct) == BR_INVALID_ARGUMENT);
  CHECK(br_overhead("dup", 1, 28, 3, 512, 0, &pct) == BR_INVALID_ARGUMENT);
}
