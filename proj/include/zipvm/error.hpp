// Copyright 2026 The zipvm Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zipvm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Assembly failure, tagged with the 1-based source line (0 when global).
class AsmError : public Error {
 public:
  AsmError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Machine-level failure (bad opcode, pc or memory access out of range).
/// Security faults are not errors; they are reported in RunResult.
class VmError : public Error {
 public:
  using Error::Error;
};

}  // namespace zipvm
