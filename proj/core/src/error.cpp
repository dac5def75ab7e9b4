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

#include "vebpf/error.hpp"

namespace vebpf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownOpcode: return "UnknownOpcode";
    case ErrorCode::TruncatedWideImmediate: return "TruncatedWideImmediate";
    case ErrorCode::BadRegister: return "BadRegister";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UndefinedLabel: return "UndefinedLabel";
    case ErrorCode::JumpOutOfRange: return "JumpOutOfRange";
    case ErrorCode::StartPcOutOfRange: return "StartPcOutOfRange";
    case ErrorCode::OutOfBoundsStore: return "OutOfBoundsStore";
    case ErrorCode::NotInReset: return "NotInReset";
    case ErrorCode::OutOfPacketMemory: return "OutOfPacketMemory";
    case ErrorCode::DescriptorFifoFull: return "DescriptorFifoFull";
    case ErrorCode::EmptyFifo: return "EmptyFifo";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedRecord: return "TruncatedRecord";
    case ErrorCode::UnsupportedLinkType: return "UnsupportedLinkType";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::Io: return "Io";
    case ErrorCode::ImageTooLarge: return "ImageTooLarge";
    case ErrorCode::EngineBusy: return "EngineBusy";
    case ErrorCode::RulesNotUploaded: return "RulesNotUploaded";
    case ErrorCode::HeaderTooLong: return "HeaderTooLong";
    case ErrorCode::CoreBusy: return "CoreBusy";
    case ErrorCode::RuleIndexOutOfRange: return "RuleIndexOutOfRange";
    case ErrorCode::NoActivePacket: return "NoActivePacket";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::VerdictMismatch: return "VerdictMismatch";
  }
  return "Unknown";
}

}  // namespace vebpf
