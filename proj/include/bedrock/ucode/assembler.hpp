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

#ifndef BEDROCK_UCODE_ASSEMBLER_HPP_
#define BEDROCK_UCODE_ASSEMBLER_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bedrock/ucode/isa.hpp"

namespace bedrock::ucode {

struct Program {
  std::vector<Instr> instrs;
  std::map<std::string, int> labels;
  std::vector<int> lines;  // source line of each instruction, 0 if unknown

  int size() const { return static_cast<int>(instrs.size()); }
  std::optional<int> label(const std::string& name) const;
  std::vector<uint32_t> words() const;
  // Decodes every word; labels are not recoverable from a binary.
  static Program from_words(const std::vector<uint32_t>& words);
};

struct Diagnostic {
  int line = 0;
  int col = 0;
  std::string message;

  std::string str() const;
};

struct AssembleResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;
  bool too_large = false;

  bool ok() const { return program.has_value(); }
};

AssembleResult assemble(std::string_view source, int imem_size = kImemSize);
// Throws Parse with the first diagnostics, or ProgramTooLarge.
Program assemble_or_throw(std::string_view source, int imem_size = kImemSize);

// Canonical listing. Branch targets use program labels where they exist and
// generated L<pc> labels otherwise.
std::string disassemble(const Program& program);

// "BRUC", u16 version, u16 reserved, u32 count, then little-endian words.
std::vector<uint8_t> write_binary(const Program& program);
Program read_binary(const std::vector<uint8_t>& bytes,
                    int imem_size = kImemSize);
bool looks_binary(const std::vector<uint8_t>& bytes);

// Built-in programs shipped with the simulator.
const char* builtin_source(const std::string& name);  // "moesif" or "mesi"
const Program& builtin_program(const std::string& name);

}  // namespace bedrock::ucode

#endif  // BEDROCK_UCODE_ASSEMBLER_HPP_
