// Copyright 2026 The infolab Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace infolab {

// Mirrors il_status in the C API; the numeric values are part of the ABI.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kNonMonotoneBoundaries = 2,
  kProbabilityNotNormalized = 3,
  kNegativeProbability = 4,
  kIndexOutOfRange = 5,
  kDimensionMismatch = 6,
  kOutsideSupport = 7,
  kInvalidCount = 8,
  kPositionConflict = 9,
  kNotOrthonormal = 10,
  kHeterogeneousGrids = 11,
  kNotExactlyComputable = 12,
  kSupportViolation = 13,
  kNotACoarsening = 14,
  kShapeMismatch = 15,
  kTooLarge = 16,
  kSelfCheckFailed = 17,
  kParse = 18,
  kIo = 19,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace infolab
