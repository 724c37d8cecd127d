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

#include <array>
#include <cstddef>
#include <cstdint>

namespace zipvm {

/// Keccak-f[400] state: 25 lanes of 16 bits, lane (x, y) at index x + 5*y.
using KeccakState = std::array<std::uint16_t, 25>;

inline constexpr std::size_t kKeccakLaneBits = 16;
inline constexpr std::size_t kKeccakStateBits = 400;
inline constexpr std::size_t kKeccakRounds = 20;  // 12 + 2*l with l = 4

/// Applies the full 20-round Keccak-f[400] permutation in place.
void keccak_f400(KeccakState& state) noexcept;

/// Value-returning convenience overload.
[[nodiscard]] inline KeccakState keccak_f400_copy(KeccakState state) noexcept {
  keccak_f400(state);
  return state;
}

/// Reads/writes bit `index` of the state in the little-endian lane order
/// (bit i lives in lane i / 16 at position i % 16).
[[nodiscard]] bool keccak_get_bit(const KeccakState& state,
                                  std::size_t index) noexcept;
void keccak_set_bit(KeccakState& state, std::size_t index, bool value) noexcept;

}  // namespace zipvm
