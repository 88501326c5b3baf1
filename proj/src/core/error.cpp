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

namespace bedrock {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kImpossibleTransition: return "ImpossibleTransition";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kUnderflow: return "Underflow";
    case ErrorCode::kOverflow: return "Overflow";
    case ErrorCode::kDoubleSpeculation: return "DoubleSpeculation";
    case ErrorCode::kMultipleOwners: return "MultipleOwners";
    case ErrorCode::kBusy: return "Busy";
    case ErrorCode::kUnexpectedFill: return "UnexpectedFill";
    case ErrorCode::kSpecStateMissing: return "SpecStateMissing";
    case ErrorCode::kIllegalInstruction: return "IllegalInstruction";
    case ErrorCode::kProgramTooLarge: return "ProgramTooLarge";
    case ErrorCode::kUnknownMutation: return "UnknownMutation";
    case ErrorCode::kSetupImpossible: return "SetupImpossible";
    case ErrorCode::kMonitorViolation: return "MonitorViolation";
    case ErrorCode::kProtocol: return "Protocol";
    case ErrorCode::kDeadlock: return "Deadlock";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace bedrock
