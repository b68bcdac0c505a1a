// Copyright 2026 The flamespec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flamespec/error.hpp"

namespace flamespec {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyBand: return "EmptyBand";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kExposureMismatch: return "ExposureMismatch";
    case ErrorCode::kNonPositiveBand: return "NonPositiveBand";
    case ErrorCode::kFactorOutOfRange: return "FactorOutOfRange";
    case ErrorCode::kStageMismatch: return "StageMismatch";
    case ErrorCode::kInvalidGrid: return "InvalidGrid";
    case ErrorCode::kOutOfEnvelope: return "OutOfEnvelope";
    case ErrorCode::kBadPlan: return "BadPlan";
    case ErrorCode::kZeroDenominator: return "ZeroDenominator";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDegenerateBounds: return "DegenerateBounds";
    case ErrorCode::kSingularCorrelation: return "SingularCorrelation";
    case ErrorCode::kBadSites: return "BadSites";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNotInTrainingMode: return "NotInTrainingMode";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kNotStochastic: return "NotStochastic";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kProvenanceMismatch: return "ProvenanceMismatch";
    case ErrorCode::kUsage: return "UsageError";
  }
  return "Unknown";
}

ErrorClass ClassOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kFormat:
      return ErrorClass::kIo;
    case ErrorCode::kRankDeficient:
    case ErrorCode::kDegenerateBounds:
    case ErrorCode::kSingularCorrelation:
    case ErrorCode::kZeroDenominator:
    case ErrorCode::kNotStochastic:
      return ErrorClass::kNumeric;
    default:
      return ErrorClass::kUsage;
  }
}

}  // namespace flamespec
