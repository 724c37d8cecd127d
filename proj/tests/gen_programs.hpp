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
#include <random>
#include <sstream>
#include <string>

namespace testing {

// main -> f0 -> f1 -> ... -> f{depth-1}, with ALU filler and side calls.
inline std::string chain_program(std::mt19937_64& rng, unsigned depth) {
  std::ostringstream s;
  auto filler = [&](int max) {
    const int n = static_cast<int>(rng() % static_cast<unsigned>(max + 1));
    for (int i = 0; i < n; ++i) {
      const unsigned rd = 4 + rng() % 6, ra = 4 + rng() % 6, rb = 4 + rng() % 6;
      switch (rng() % 3) {
        case 0: s << "    addi r" << rd << ", r" << ra << ", " << (rng() % 100) << "\n"; break;
        case 1: s << "    add r" << rd << ", r" << ra << ", r" << rb << "\n"; break;
        default: s << "    xor r" << rd << ", r" << ra << ", r" << rb << "\n"; break;
      }
    }
  };
  s << "main:\n    call f0\n    halt\n";
  for (unsigned i = 0; i < depth; ++i) {
    s << ".func f" << i << "\n";
    filler(3);
    if (i + 1 < depth) {
      if (rng() % 3 == 0) s << "    call side\n";
      s << "    call f" << (i + 1) << "\n";
      filler(3);
    }
    s << "    ret\n.endfunc\n";
  }
  s << ".func side\n    call leaf\n    ret\n.endfunc\n";
  s << ".func leaf\n    addi r9, r9, 1\n    ret\n.endfunc\n";
  return s.str();
}

// k explicit ZIPs over random return addresses, each result spilled to the
// stack, then k UNZIPs in reverse order. No calls involved.
inline std::string zip_ladder(std::mt19937_64& rng, unsigned k) {
  std::ostringstream s;
  s << "main:\n    addi sp, sp, -" << 8 * k << "\n";
  for (unsigned i = 0; i < k; ++i) {
    s << "    li ra, " << (0x1000 + 4 * (rng() % 0x4000)) << "\n    zip\n    st ra, " << 8 * i
      << "(sp)\n";
  }
  for (unsigned i = k; i-- > 0;) s << "    ld ra, " << 8 * i << "(sp)\n    unzip\n";
  s << "    addi sp, sp, " << 8 * k << "\n    halt\n";
  return s.str();
}

}  // namespace testing
