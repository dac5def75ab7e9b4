/*
 * Copyright 2026 The vebpf-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vebpf {

/// Every failure the library reports through an exception carries one of
/// these codes. Execution faults inside a running core are not exceptions;
/// they surface through the core's Error_out state instead.
enum class ErrorCode {
  // isa
  UnknownOpcode,
  TruncatedWideImmediate,
  BadRegister,
  ParseError,
  UndefinedLabel,
  JumpOutOfRange,
  // vcore
  StartPcOutOfRange,
  OutOfBoundsStore,
  NotInReset,
  // pktio
  OutOfPacketMemory,
  DescriptorFifoFull,
  EmptyFifo,
  BadMagic,
  TruncatedRecord,
  UnsupportedLinkType,
  InvalidSpec,
  Io,
  // manycore
  ImageTooLarge,
  EngineBusy,
  RulesNotUploaded,
  HeaderTooLong,
  CoreBusy,
  RuleIndexOutOfRange,
  NoActivePacket,
  // experiment
  InvalidConfig,
  VerdictMismatch,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vebpf
