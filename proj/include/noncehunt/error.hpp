/*
 * Copyright 2026 The noncehunt Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace noncehunt {

enum class ErrorCode {
  // arithmetic
  ZeroInverse,
  // curve
  IdentityPoint,
  NoSuchPoint,
  InvalidEncoding,
  // ecdsa
  DegenerateNonce,
  NonceSequenceExhausted,
  // detector
  MalformedRecord,
  // recovery
  PreconditionViolated,
  NotCollinear,
  DegenerateDifference,
  Underdetermined,
  Inconsistent,
  ValidationFailed,
  SingularSystem,
  SignCombinationCap,
  // codec
  Truncated,
  NonCanonical,
  TrailingBytes,
  UnknownTxType,
  MalformedFieldCount,
  SignatureOutOfRange,
  RecoveryFailed,
  // scanner
  BlockUnavailable,
  RpcError,
  FixtureMissing,
  // cli
  InvalidScenario,
  MissingInput,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroInverse: return "ZeroInverse";
    case ErrorCode::IdentityPoint: return "IdentityPoint";
    case ErrorCode::NoSuchPoint: return "NoSuchPoint";
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::DegenerateNonce: return "DegenerateNonce";
    case ErrorCode::NonceSequenceExhausted: return "NonceSequenceExhausted";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::NotCollinear: return "NotCollinear";
    case ErrorCode::DegenerateDifference: return "DegenerateDifference";
    case ErrorCode::Underdetermined: return "Underdetermined";
    case ErrorCode::Inconsistent: return "Inconsistent";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SignCombinationCap: return "SignCombinationCap";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::NonCanonical: return "NonCanonical";
    case ErrorCode::TrailingBytes: return "TrailingBytes";
    case ErrorCode::UnknownTxType: return "UnknownTxType";
    case ErrorCode::MalformedFieldCount: return "MalformedFieldCount";
    case ErrorCode::SignatureOutOfRange: return "SignatureOutOfRange";
    case ErrorCode::RecoveryFailed: return "RecoveryFailed";
    case ErrorCode::BlockUnavailable: return "BlockUnavailable";
    case ErrorCode::RpcError: return "RpcError";
    case ErrorCode::FixtureMissing: return "FixtureMissing";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::MissingInput: return "MissingInput";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace noncehunt
