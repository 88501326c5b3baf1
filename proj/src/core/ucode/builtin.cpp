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

#include "bedrock/error.hpp"
#include "bedrock/ucode/assembler.hpp"

namespace bedrock::ucode {

namespace {
#include "bedrock/builtin_microcode.inc"
}  // namespace

const char* builtin_source(const std::string& name) {
  if (name == "moesif") return kMoesifSource;
  if (name == "mesi") return kMesiSource;
  fail(ErrorCode::kInvalidArgument, "no built-in microcode named " + name);
}

const Program& builtin_program(const std::string& name) {
  static const Program moesif = assemble_or_throw(kMoesifSource);
  static const Program mesi = assemble_or_throw(kMesiSource);
  if (name == "moesif") return moesif;
  if (name == "mesi") return mesi;
  fail(ErrorCode::kInvalidArgument, "no built-in microcode named " + name);
}

}  // namespace bedrock::ucode
