// Copyright 2026 The aexplain Authors
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

#include "aexplain/errors.hpp"

namespace aexplain {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedRow: return "MalformedRow";
    case ErrorKind::kNonMonotonicTime: return "NonMonotonicTime";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kSchemaError: return "SchemaError";
    case ErrorKind::kDomainArityError: return "DomainArityError";
    case ErrorKind::kMissingSensor: return "MissingSensor";
    case ErrorKind::kConstraintMismatch: return "ConstraintMismatch";
    case ErrorKind::kEmptyExactSet: return "EmptyExactSet";
    case ErrorKind::kOverlapError: return "OverlapError";
    case ErrorKind::kDanglingConstraint: return "DanglingConstraint";
    case ErrorKind::kNotACandidate: return "NotACandidate";
    case ErrorKind::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::kInfeasible: return "Infeasible";
    case ErrorKind::kUnknownBaseline: return "UnknownBaseline";
    case ErrorKind::kUnknownEvent: return "UnknownEvent";
    case ErrorKind::kGenerationFailure: return "GenerationFailure";
    case ErrorKind::kKindMismatch: return "KindMismatch";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kUsageError: return "UsageError";
  }
  return "UnknownError";
}

}  // namespace aexplain
