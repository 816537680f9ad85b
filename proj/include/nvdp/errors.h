//
// Copyright 2026 The NVDP Authors
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
//

#ifndef NVDP_ERRORS_H_
#define NVDP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace nvdp {

// Precondition violated by the caller (bad shapes, out-of-range parameters).
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Argument outside the mathematical domain of a function, e.g. a pole.
class DomainError : public ArgumentError {
 public:
  explicit DomainError(const std::string& what) : ArgumentError(what) {}
};

// Malformed, truncated or mismatched file contents.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values produced during a numerical procedure.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nvdp

#endif  // NVDP_ERRORS_H_
