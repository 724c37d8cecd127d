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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>
#include <algorithm>

#include "zipvm/assembler.hpp"
#include "zipvm/machine.hpp"
#include "zipvm/programs.hpp"

namespace testing {

inline zipvm::ProgramImage sample(std::string_view name) {
  auto src = zipvm::builtin_program(name);
  if (!src) throw std::runtime_error("missing sample " + std::string(name));
  return zipvm::assemble(*src);
}

inline zipvm::MachineConfig config(zipvm::ProtectionKind kind, std::uint64_t seed = 0,
                                   bool cache = true, unsigned mac_bits = 24,
                                   unsigned address_bits = 40) {
  zipvm::MachineConfig c;
  c.mode.kind = kind;
  c.seed = seed;
  c.cache_enabled = cache;
  c.widths = zipvm::MacWidths{address_bits, mac_bits};
  return c;
}

inline zipvm::RunResult run(const zipvm::ProgramImage& img, const zipvm::MachineConfig& cfg,
                            std::uint64_t max_cycles = 10'000'000) {
  zipvm::Machine m(img, cfg);
  return m.run(max_cycles);
}

inline zipvm::RunResult run_source(std::string_view src, const zipvm::MachineConfig& cfg,
                                   std::uint64_t max_cycles = 10'000'000) {
  return run(zipvm::assemble(src), cfg, max_cycles);
}

// Data region with jump-buffer top/auth slots cleared; those hold
// protection metadata and legitimately differ between modes.
inline std::vector<std::uint8_t> masked_data(const zipvm::Machine& m) {
  const auto d = m.data_region();
  std::vector<std::uint8_t> out(d.begin(), d.end());
  if (const auto jb = m.image().find_symbol("jb")) {
    const auto off = *jb - m.image().data_base;
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(off + zipvm::jmpbuf::kTop), 16, 0);
  }
  return out;
}

}  // namespace testing
