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

#ifndef BEDROCK_ERROR_HPP_
#define BEDROCK_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace bedrock {

// Error codes are stable: the C API returns them verbatim.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kParse = 2,
  kIo = 3,
  kImpossibleTransition = 10,
  kOutOfRange = 11,
  kUnderflow = 12,
  kOverflow = 13,
  kDoubleSpeculation = 14,
  kMultipleOwners = 15,
  kBusy = 16,
  kUnexpectedFill = 17,
  kSpecStateMissing = 18,
  kIllegalInstruction = 19,
  kProgramTooLarge = 20,
  kUnknownMutation = 21,
  kSetupImpossible = 22,
  kMonitorViolation = 23,
  kProtocol = 24,
  kDeadlock = 25,
  kInternal = 99,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace bedrock

#endif  // BEDROCK_ERROR_HPP_
