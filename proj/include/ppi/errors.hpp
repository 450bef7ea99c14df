/* Copyright 2026 The ppi-carbon Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <stdexcept>
#include <string>

namespace ppi {

/// Coarse classification used by the command line front end to pick an exit code.
enum class ErrorKind { Validation, Numerical };

/// Base class for every error raised by the library.
/// `code()` is a stable identifier such as "NotPositiveDefinite".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

/// Bad input: invalid parameters, wrong shapes, out-of-range queries.
class ValidationError : public Error {
 public:
  ValidationError(std::string code, const std::string& message)
      : Error(ErrorKind::Validation, std::move(code), message) {}
};

/// The input was acceptable but the numerics failed (blow-up, lost positivity).
class NumericalError : public Error {
 public:
  NumericalError(std::string code, const std::string& message)
      : Error(ErrorKind::Numerical, std::move(code), message) {}
};

}  // namespace ppi
