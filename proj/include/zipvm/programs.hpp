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

#include <optional>
#include <string_view>
#include <vector>

namespace zipvm {

/// Assembly source of a program shipped under samples/ (name without the
/// .zasm extension), or nullopt.
[[nodiscard]] std::optional<std::string_view> builtin_program(std::string_view name) noexcept;
[[nodiscard]] std::vector<std::string_view> builtin_program_names();

}  // namespace zipvm
