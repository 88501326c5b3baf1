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

#ifndef BEDROCK_UCODE_ENGINE_HPP_
#define BEDROCK_UCODE_ENGINE_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "bedrock/cce.hpp"
#include "bedrock/ucode/assembler.hpp"

namespace bedrock::ucode {

// Architectural state visible to the program.
struct ArchState {
  std::array<uint64_t, kNumGprs> gpr{};
  Mshr mshr;
  CoherenceState coh = CoherenceState::I;
  bool auto_fwd = true;
  // Header latched by poph.
  MsgType msg_type = MsgType::kReqRd;
  uint64_t msg_addr = 0;
  int msg_lce = 0;
};

// Microcode-programmable coherence engine: fetch / execute pipeline with a
// one-cycle mispredict bubble, a message unit that shares the directory,
// pending-write and speculative-read ports with the program and wins ties.
class UcodeCce : public CoherenceEngine {
 public:
  UcodeCce(const CceConfig& cfg, Program program);

  EngineKind kind() const override { return EngineKind::kUcode; }
  void tick(Network& net, uint64_t now) override;
  bool idle() const override;

  // pc <- 0, registers cleared, auto-forward set.
  void reset();
  const Program& program() const { return prog_; }
  const ArchState& arch() const { return arch_; }
  int pc() const { return pc_; }
  uint64_t retired() const { return retired_; }
  uint64_t mispredicts() const { return mispredicts_; }
  // Mispredict bubbles charged to the open or most recent transaction.
  uint64_t transaction_bubbles() const { return txn_bubbles_; }
  // Called after each instruction retires with its pc.
  void set_retire_hook(std::function<void(int, const Instr&)> hook) {
    retire_hook_ = std::move(hook);
  }

 private:
  // kContinue: the instruction did work this cycle and stays in execute.
  enum class Outcome { kDone, kStall, kContinue };
  struct InvState {
    std::vector<std::pair<int, int>> targets;  // lce, way
    size_t sent = 0;
    size_t acked = 0;
    bool issued = false;
  };

  Outcome execute(const Instr& in, Network& net, uint64_t now, int& next_pc);
  Outcome exec_dir(const Instr& in, Network& net, uint64_t now);
  Outcome exec_queue(const Instr& in, Network& net, uint64_t now);
  Outcome exec_inv(Network& net, uint64_t now);
  // Message-unit side: consume one CohAck from the response head.
  void sink_coh_ack(Network& net);
  const Message* resp_head(Network& net) const;
  bool queue_ready(Network& net, Queue q) const;

  uint64_t addr_of(const Instr& in) const;
  int lce_of(const Instr& in) const;
  int way_of(const Instr& in) const;
  CoherenceState state_of(const Instr& in) const;
  uint64_t read_sreg(SReg r) const;
  void write_sreg(SReg r, uint64_t v);
  bool flag(int f) const;
  [[noreturn]] void trap(const std::string& why) const;

  Program prog_;
  ArchState arch_;
  int pc_ = 0;
  int hold_ = 0;
  bool bubble_ = false;
  bool busy_window_ = false;
  WayGroupRead sharers_;
  bool have_sharers_ = false;
  InvState inv_;
  std::vector<uint8_t> wb_data_;
  uint64_t retired_ = 0;
  uint64_t mispredicts_ = 0;
  uint64_t txn_bubbles_ = 0;
  std::function<void(int, const Instr&)> retire_hook_;
};

// Loads a program from a source or binary file; empty path selects the
// built-in program for the configured protocol.
Program load_program(const std::string& path, Protocol protocol);

std::unique_ptr<CoherenceEngine> make_ucode_engine(const CceConfig& cfg,
                                                   const std::string& path);

}  // namespace bedrock::ucode

namespace bedrock {
using ucode::make_ucode_engine;
}

#endif  // BEDROCK_UCODE_ENGINE_HPP_
