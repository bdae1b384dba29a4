// Copyright 2026 The piou Authors. All Rights Reserved.
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

#ifndef PIOU_ERROR_HPP_
#define PIOU_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace piou {

// Numeric values are part of the C ABI (see piou.h); do not renumber.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kShapeMismatch = 2,
  kNonFinite = 3,
  kDegenerate = 4,
  kNonConvex = 5,
  kNumeric = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace piou

#endif  // PIOU_ERROR_HPP_
