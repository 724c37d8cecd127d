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

#include "zipvm/programs.hpp"

#include <array>
#include <utility>

namespace zipvm {
namespace {

struct Builtin {
  std::string_view name;
  std::string_view source;
};

// Generated from samples/*.zasm at configure time.
constexpr Builtin kBuiltins[] = {
#include "builtin_programs.inc"
};

}  // namespace

std::optional<std::string_view> builtin_program(std::string_view name) noexcept {
  for (const auto& b : kBuiltins) {
    if (b.name == name) return b.source;
  }
  return std::nullopt;
}

std::vector<std::string_view> builtin_program_names() {
  std::vector<std::string_view> names;
  for (const auto& b : kBuiltins) names.push_back(b.name);
  return names;
}

}  // namespace zipvm
