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

#ifndef FLAMESPEC_ERROR_HPP_
#define FLAMESPEC_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace flamespec {

enum class ErrorCode {
  // spectral core
  kEmptyBand,
  kGridMismatch,
  kExposureMismatch,
  kNonPositiveBand,
  kFactorOutOfRange,
  kStageMismatch,
  kInvalidGrid,
  // synthgen
  kOutOfEnvelope,
  kBadPlan,
  kZeroDenominator,
  // pod
  kRankDeficient,
  kLengthMismatch,
  kDegenerateBounds,
  // kriging
  kSingularCorrelation,
  kBadSites,
  // dnn
  kShapeMismatch,
  kNotInTrainingMode,
  kEmptyDataset,
  kConfigInvalid,
  // eval
  kEmptyInput,
  kNotStochastic,
  // persistence
  kIo,
  kFormat,
  kProvenanceMismatch,
  kUsage,
};

/// Failure class used for process exit codes and C API status values.
enum class ErrorClass { kUsage = 2, kIo = 3, kNumeric = 4 };

std::string_view ErrorCodeName(ErrorCode code);
ErrorClass ClassOf(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorClass error_class() const noexcept { return ClassOf(code_); }

 private:
  ErrorCode code_;
};

}  // namespace flamespec

#endif  // FLAMESPEC_ERROR_HPP_
