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

#include "infolab/error.hpp"

namespace infolab {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonMonotoneBoundaries: return "NonMonotoneBoundaries";
    case ErrorCode::kProbabilityNotNormalized: return "ProbabilityNotNormalized";
    case ErrorCode::kNegativeProbability: return "NegativeProbability";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kOutsideSupport: return "OutsideSupport";
    case ErrorCode::kInvalidCount: return "InvalidCount";
    case ErrorCode::kPositionConflict: return "PositionConflict";
    case ErrorCode::kNotOrthonormal: return "NotOrthonormal";
    case ErrorCode::kHeterogeneousGrids: return "HeterogeneousGrids";
    case ErrorCode::kNotExactlyComputable: return "NotExactlyComputable";
    case ErrorCode::kSupportViolation: return "SupportViolation";
    case ErrorCode::kNotACoarsening: return "NotACoarsening";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kSelfCheckFailed: return "SelfCheckFailed";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace infolab
