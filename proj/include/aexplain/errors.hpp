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

#ifndef AEXPLAIN_ERRORS_HPP_
#define AEXPLAIN_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aexplain {

enum class ErrorKind {
  kMalformedRow,
  kNonMonotonicTime,
  kEmptyInput,
  kSchemaError,
  kDomainArityError,
  kMissingSensor,
  kConstraintMismatch,
  kEmptyExactSet,
  kOverlapError,
  kDanglingConstraint,
  kNotACandidate,
  kInstanceTooLarge,
  kInfeasible,
  kUnknownBaseline,
  kUnknownEvent,
  kGenerationFailure,
  kKindMismatch,
  kIoError,
  kUsageError,
};

const char* error_kind_name(ErrorKind kind);

// Domain error carrying a machine-readable kind next to the human message.
// The CLI maps these to exit code 1; kUsageError maps to exit code 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace aexplain

#endif  // AEXPLAIN_ERRORS_HPP_
