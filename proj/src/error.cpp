// Copyright 2026 The segsynth Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "segsynth/error.hpp"

namespace segsynth {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MissingManifest: return "MissingManifest";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::ShapeMismatchWithManifest: return "ShapeMismatchWithManifest";
    case ErrorCode::MissingSotToken: return "MissingSotToken";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnsupportedResolution: return "UnsupportedResolution";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoDefinedClasses: return "NoDefinedClasses";
    case ErrorCode::NoBundles: return "NoBundles";
    case ErrorCode::UnwritableOutput: return "UnwritableOutput";
    case ErrorCode::UnknownStage: return "UnknownStage";
    case ErrorCode::MissingInput: return "MissingInput";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace segsynth
